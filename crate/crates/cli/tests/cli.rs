use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tsviz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsviz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("roads.csv");
    let out = tsviz(&["synth", "--seed", "1", "--rows", "60", "--out", path(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("row_id,time,x,y,direction,congestion"));
    assert_eq!(text.lines().count(), 61);

    let out = tsviz(&["inspect", path(&csv)]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["total_rows"], 60);
    let kinds: Vec<&str> = report["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds[0], "identifier");
    assert_eq!(kinds[1], "timestamp");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert!(tsviz(&["synth", "--seed", "9", "--rows", "100", "--out", path(p)]).status.success());
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn pipeline_on_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("roads.csv");
    assert!(tsviz(&["synth", "--seed", "2", "--rows", "2000", "--out", path(&csv)]).status.success());
    let out_dir = dir.path().join("out");
    let out = tsviz(&[
        "pipeline",
        "--input",
        path(&csv),
        "--time-col",
        "time",
        "--target",
        "congestion",
        "--unit",
        "hour",
        "--hue",
        "direction,day",
        "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unit: hour"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["hue_candidates"], serde_json::json!(["direction", "day"]));
    assert!(out_dir.join("plots/line-hour-by-direction.svg").is_file());
    assert!(out_dir.join("tables/line-hour-by-day_counts.csv").is_file());
}

#[test]
fn seed_demo_needs_no_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = tsviz(&["pipeline", "--seed-demo", "1", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.json").is_file());
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = tsviz(&["pipeline", "--input", path(&empty), "--time-col", "time", "--target", "v"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("load"));

    let out = tsviz(&["inspect", path(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = tsviz(&["pipeline", "--seed-demo", "1", "--unit", "fortnight"]);
    assert_eq!(out.status.code(), Some(2));

    let out = tsviz(&["synth", "--seed", "1", "--rows", "0", "--out", path(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let out = tsviz(&["pipeline", "--seed-demo", "1", "--out", path(&blocker.join("out"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = tsviz(&["synth", "--seed", "1", "--rows", "5", "--out", path(&blocker.join("x.csv"))]);
    assert_eq!(out.status.code(), Some(3));
}
