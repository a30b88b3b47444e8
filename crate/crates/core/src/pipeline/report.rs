//! The pipeline's output record and its on-disk layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::aggregation::{ExcludedCandidate, HueRanking};
use crate::dataset::{CleanReport, ColumnSchema, ImputeLog, ImputePolicy};
use crate::plot::PlotKind;

use super::unit::{TimeUnit, UnitRanking};
use super::Stage;

pub const REPORT_FILE: &str = "report.json";
pub const PLOTS_DIR: &str = "plots";
pub const TABLES_DIR: &str = "tables";

/// One default or choice the pipeline applied, tagged with its stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub stage: Stage,
    pub step: u8,
    pub topic: String,
    pub choice: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Plot,
    MeansTable,
    CountsTable,
}

/// A file the pipeline emits. `contents` is kept out of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub artifact: ArtifactKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<PlotKind>,
    pub x: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hue: Option<String>,
    /// 1-based part number when a crowded hue was split across plots.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub part: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<String>>,
    #[serde(skip)]
    pub contents: Vec<u8>,
}

/// What an artifact shows; the file name is derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactLabel {
    pub prefix: String,
    pub x: String,
    pub hue: Option<String>,
    pub part: Option<usize>,
}

impl ArtifactLabel {
    pub fn new(prefix: &str, x: &str, hue: Option<&str>, part: Option<usize>) -> Self {
        ArtifactLabel {
            prefix: prefix.to_string(),
            x: x.to_string(),
            hue: hue.map(str::to_string),
            part,
        }
    }

    fn stem(&self) -> String {
        let mut s = format!("{} {}", self.prefix, self.x);
        if let Some(h) = &self.hue {
            s.push_str(" by ");
            s.push_str(h);
        }
        if let Some(p) = self.part {
            s.push_str(&format!(" part {p}"));
        }
        slugify(&s)
    }
}

/// Lowercase ASCII letters and digits; every other run becomes one `-`.
pub fn slugify(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("artifact");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRecord {
    pub column: String,
    pub bin_column: String,
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitSelection {
    pub method: String,
    pub requested: String,
    pub chosen: TimeUnit,
    pub column: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranking: Option<UnitRanking>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Combination {
    pub columns: Vec<String>,
    pub name: String,
    pub categories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub input: String,
    pub time_column: String,
    pub target_column: String,
    pub rows_loaded: usize,
    pub rows_analyzed: usize,
    pub schema: Vec<ColumnSchema>,
    pub clean_report: CleanReport,
    pub impute_policy: ImputePolicy,
    pub imputation_log: ImputeLog,
    pub unit: Option<UnitSelection>,
    pub hue_candidates: Vec<String>,
    pub excluded_hues: Vec<ExcludedCandidate>,
    pub bins: Vec<BinRecord>,
    pub hue_ranking: Option<HueRanking>,
    pub combination: Option<Combination>,
    pub manifest: Vec<ManifestEntry>,
    pub decisions: Vec<Decision>,
    #[serde(skip)]
    used_stems: BTreeMap<&'static str, BTreeSet<String>>,
}

impl Report {
    pub(crate) fn new(input: String, time_column: &str, target_column: &str) -> Self {
        Report {
            input,
            time_column: time_column.to_string(),
            target_column: target_column.to_string(),
            rows_loaded: 0,
            rows_analyzed: 0,
            schema: Vec::new(),
            clean_report: CleanReport::default(),
            impute_policy: ImputePolicy::default(),
            imputation_log: ImputeLog::default(),
            unit: None,
            hue_candidates: Vec::new(),
            excluded_hues: Vec::new(),
            bins: Vec::new(),
            hue_ranking: None,
            combination: None,
            manifest: Vec::new(),
            decisions: Vec::new(),
            used_stems: BTreeMap::new(),
        }
    }

    pub fn decide(&mut self, stage: Stage, topic: &str, choice: impl Into<String>) {
        self.decisions.push(Decision {
            stage,
            step: stage.index(),
            topic: topic.to_string(),
            choice: choice.into(),
        });
    }

    /// Reserves a file name in `dir`, appending `-2`, `-3`… on collision.
    fn reserve(&mut self, dir: &'static str, stem: String) -> String {
        let used = self.used_stems.entry(dir).or_default();
        let mut candidate = stem.clone();
        let mut n = 2;
        while used.contains(&candidate) {
            candidate = format!("{stem}-{n}");
            n += 1;
        }
        used.insert(candidate.clone());
        candidate
    }

    pub fn add_plot(
        &mut self,
        label: &ArtifactLabel,
        chart: PlotKind,
        title: &str,
        series: Vec<String>,
        svg: Vec<u8>,
    ) -> String {
        let stem = self.reserve(PLOTS_DIR, label.stem());
        let file = format!("{PLOTS_DIR}/{stem}.svg");
        self.manifest.push(ManifestEntry {
            file: file.clone(),
            artifact: ArtifactKind::Plot,
            chart: Some(chart),
            x: label.x.clone(),
            hue: label.hue.clone(),
            part: label.part,
            title: Some(title.to_string()),
            series: Some(series),
            contents: svg,
        });
        file
    }

    /// Adds `<stem>.csv` and `<stem>_counts.csv`.
    pub fn add_tables(&mut self, label: &ArtifactLabel, means: String, counts: String) -> (String, String) {
        let stem = self.reserve(TABLES_DIR, label.stem());
        let means_file = format!("{TABLES_DIR}/{stem}.csv");
        let counts_file = format!("{TABLES_DIR}/{stem}_counts.csv");
        for (file, artifact, body) in [
            (&means_file, ArtifactKind::MeansTable, means),
            (&counts_file, ArtifactKind::CountsTable, counts),
        ] {
            self.manifest.push(ManifestEntry {
                file: file.clone(),
                artifact,
                chart: None,
                x: label.x.clone(),
                hue: label.hue.clone(),
                part: label.part,
                title: None,
                series: None,
                contents: body.into_bytes(),
            });
        }
        (means_file, counts_file)
    }

    pub fn plots(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.manifest.iter().filter(|e| e.artifact == ArtifactKind::Plot)
    }

    /// `report.json` text: keys sorted, two-space indent, trailing newline.
    pub fn to_json(&self) -> String {
        // serde_json's default map is ordered, so going through Value sorts keys
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("cannot write `{path}`: {reason}")]
pub struct IoError {
    pub path: String,
    pub reason: String,
}

fn io_err(path: &Path, e: std::io::Error) -> IoError {
    IoError {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Writes via a sibling temp file and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path, e)
    })
}

/// Files listed by a `report.json` already in `out_dir`, if any.
fn previous_manifest(out_dir: &Path) -> Vec<String> {
    let Ok(text) = fs::read_to_string(out_dir.join(REPORT_FILE)) else {
        return Vec::new();
    };
    let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) else {
        return Vec::new();
    };
    value["manifest"]
        .as_array()
        .map(|entries| {
            entries
                .iter()
                .filter_map(|e| e["file"].as_str().map(str::to_string))
                .collect()
        })
        .unwrap_or_default()
}

/// Keeps stale-file removal inside our own subdirectories.
fn is_managed(rel: &str) -> bool {
    let mut parts = rel.split('/');
    matches!(
        (parts.next(), parts.next(), parts.next()),
        (Some(PLOTS_DIR | TABLES_DIR), Some(name), None) if !name.is_empty() && name != ".." && name != "."
    )
}

/// Writes every manifest file plus `report.json` under `out_dir` and removes
/// files a previous run listed that this report no longer does. Returns the
/// written paths, `report.json` last.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    for dir in [out_dir.to_path_buf(), out_dir.join(PLOTS_DIR), out_dir.join(TABLES_DIR)] {
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    }
    let current: BTreeSet<&str> = report.manifest.iter().map(|e| e.file.as_str()).collect();
    for stale in previous_manifest(out_dir) {
        if is_managed(&stale) && !current.contains(stale.as_str()) {
            let path = out_dir.join(&stale);
            if path.is_file() {
                fs::remove_file(&path).map_err(|e| io_err(&path, e))?;
            }
        }
    }
    let mut written = Vec::with_capacity(report.manifest.len() + 1);
    for entry in &report.manifest {
        let path = out_dir.join(&entry.file);
        write_atomic(&path, &entry.contents)?;
        written.push(path);
    }
    let path = out_dir.join(REPORT_FILE);
    write_atomic(&path, report.to_json().as_bytes())?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_with_plots(n: usize) -> Report {
        let mut r = Report::new("mem".into(), "time", "v");
        for i in 0..n {
            let label = ArtifactLabel::new("line", "hour", Some(&format!("h{i}")), None);
            r.add_plot(&label, PlotKind::Line, "t", vec!["a".into()], b"<svg/>".to_vec());
        }
        r
    }

    #[test]
    fn slugs() {
        assert_eq!(slugify("line hour by x+y"), "line-hour-by-x-y");
        assert_eq!(slugify("bar PM"), "bar-pm");
        assert_eq!(slugify("  Ünïcode__ "), "n-code");
        assert_eq!(slugify("%%"), "artifact");
    }

    #[test]
    fn colliding_slugs_get_suffixes() {
        let mut r = Report::new("mem".into(), "time", "v");
        let a = r.add_plot(&ArtifactLabel::new("bar", "PM", None, None), PlotKind::Bar, "", vec![], vec![]);
        let b = r.add_plot(&ArtifactLabel::new("bar", "pm", None, None), PlotKind::Bar, "", vec![], vec![]);
        let c = r.add_plot(&ArtifactLabel::new("bar", "p.m", None, None), PlotKind::Bar, "", vec![], vec![]);
        assert_eq!((a.as_str(), b.as_str(), c.as_str()), ("plots/bar-pm.svg", "plots/bar-pm-2.svg", "plots/bar-p-m.svg"));
        let d = r.add_plot(&ArtifactLabel::new("bar", "PM!", None, None), PlotKind::Bar, "", vec![], vec![]);
        assert_eq!(d, "plots/bar-pm-3.svg");
    }

    #[test]
    fn three_plots_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = report_with_plots(3);
        emit_report(&r, dir.path()).unwrap();
        let svgs: Vec<_> = fs::read_dir(dir.path().join(PLOTS_DIR)).unwrap().collect();
        assert_eq!(svgs.len(), 3);
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(json["manifest"].as_array().unwrap().len(), 3);
        for e in json["manifest"].as_array().unwrap() {
            assert!(dir.path().join(e["file"].as_str().unwrap()).is_file());
        }
    }

    #[test]
    fn rerun_removes_stale_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&report_with_plots(3), dir.path()).unwrap();
        emit_report(&report_with_plots(1), dir.path()).unwrap();
        let svgs: Vec<_> = fs::read_dir(dir.path().join(PLOTS_DIR)).unwrap().collect();
        assert_eq!(svgs.len(), 1);
    }

    #[test]
    fn unwritable_dir() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&report_with_plots(1), &blocker.join("out")).unwrap_err();
        assert!(err.path.contains("file"));
    }

    #[test]
    fn keys_are_sorted() {
        let json = report_with_plots(1).to_json();
        let clean = json.find("\"clean_report\"").unwrap();
        let decisions = json.find("\"decisions\"").unwrap();
        let input = json.find("\"input\"").unwrap();
        assert!(clean < decisions && decisions < input);
    }

    #[test]
    fn managed_paths_only() {
        assert!(is_managed("plots/a.svg"));
        assert!(!is_managed("../a.svg"));
        assert!(!is_managed("plots/../../x"));
        assert!(!is_managed("report.json"));
    }
}
