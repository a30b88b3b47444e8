#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use tsviz_core::dataset::{format_number, Column, ColumnKind, Dataset};
use tsviz_core::plot::{PlotKind, PlotSpec, SeriesSpec, CANVAS_HEIGHT, CANVAS_WIDTH};

pub const GOLDEN_SVG: &str = "tests/golden/line_two_series.svg";

pub fn golden_spec() -> PlotSpec {
    PlotSpec {
        kind: PlotKind::Line,
        title: "Mean congestion by hour, split by direction".into(),
        x_label: "hour".into(),
        y_label: "mean congestion".into(),
        x_categories: vec!["7".into(), "8".into(), "9".into()],
        series: vec![
            SeriesSpec {
                name: "EB".into(),
                palette_index: 0,
                points: vec![Some(42.5), Some(61.25), None],
            },
            SeriesSpec {
                name: "WB".into(),
                palette_index: 1,
                points: vec![Some(30.0), Some(35.125), Some(28.0)],
            },
        ],
        y_ticks: vec![20.0, 30.0, 40.0, 50.0, 60.0, 70.0],
        width: CANVAS_WIDTH,
        height: CANVAS_HEIGHT,
    }
}

pub const DAYS: [&str; 7] = [
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday",
];

/// Flat records with three key columns of different flavours:
/// `a` integers, `b` short words, `c` day names.
#[derive(Debug, Clone)]
pub struct Records {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    pub t: Vec<f64>,
}

impl Records {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn key(&self, col: &str) -> &[String] {
        match col {
            "a" => &self.a,
            "b" => &self.b,
            "c" => &self.c,
            _ => panic!("no key column {col}"),
        }
    }

    pub fn dataset(&self) -> Dataset {
        self.dataset_with_target(&self.t)
    }

    pub fn dataset_with_target(&self, t: &[f64]) -> Dataset {
        let t: Vec<String> = t.iter().map(|v| format_number(*v)).collect();
        Dataset::new(vec![
            Column::from_raw("a", ColumnKind::Categorical, &self.a),
            Column::from_raw("b", ColumnKind::Categorical, &self.b),
            Column::from_raw("c", ColumnKind::Categorical, &self.c),
            Column::from_raw("t", ColumnKind::Continuous, &t),
        ])
        .unwrap()
    }

    pub fn permuted<R: Rng>(&self, rng: &mut R) -> Records {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(rng);
        let pick = |v: &Vec<String>| idx.iter().map(|&i| v[i].clone()).collect();
        Records {
            a: pick(&self.a),
            b: pick(&self.b),
            c: pick(&self.c),
            t: idx.iter().map(|&i| self.t[i]).collect(),
        }
    }
}

const WORDS: [&str; 6] = ["east", "north", "ramp", "south", "tunnel", "west"];

/// Random records of 1..=max_rows rows. Each hue-like column gets its own
/// random effect on `t` so rankings are rarely tied.
pub fn random_records<R: Rng>(rng: &mut R, max_rows: usize) -> Records {
    let n = rng.gen_range(1..=max_rows);
    let ka = rng.gen_range(1..=8);
    let kb = rng.gen_range(1..=WORDS.len());
    let kc = rng.gen_range(1..=DAYS.len());
    let eff_b: Vec<f64> = (0..kb).map(|_| rng.gen_range(-20.0..20.0)).collect();
    let eff_c: Vec<f64> = (0..kc).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let mut r = Records {
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let a = rng.gen_range(0..ka);
        let b = rng.gen_range(0..kb);
        let c = rng.gen_range(0..kc);
        let noise: f64 = rng.gen_range(-10.0..10.0);
        let t = 50.0 + a as f64 + eff_b[b] + eff_c[c] + noise;
        r.a.push(a.to_string());
        r.b.push(WORDS[b].to_string());
        r.c.push(DAYS[c].to_string());
        r.t.push((t * 1000.0).round() / 1000.0);
    }
    r
}

/// Relative closeness used by the oracle comparisons.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
