//! Seeded stand-in for a roadway congestion feed: one reading per roadway
//! every 20 minutes, with known month, weekday and hour effects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{format_number, Column, ColumnKind, Dataset};
use crate::temporal::Timestamp;

pub const SYNTH_TIME_COL: &str = "time";
pub const SYNTH_TARGET_COL: &str = "congestion";
pub const SYNTH_FLAG_COL: &str = "flag";

/// Seconds between consecutive readings of one roadway.
pub const STEP_SECONDS: i64 = 20 * 60;

/// `(x, y, direction)` of every simulated roadway.
pub const ROADWAYS: [(u8, u8, &str); 6] = [
    (0, 0, "EB"),
    (0, 0, "NB"),
    (0, 1, "SB"),
    (1, 0, "WB"),
    (1, 1, "NE"),
    (2, 3, "SW"),
];

/// Morning and evening peaks.
pub const DEFAULT_HOUR_PROFILE: [f64; 24] = [
    2.0, 1.0, 0.0, 0.0, 1.0, 4.0, 10.0, 18.0, 24.0, 20.0, 14.0, 12.0, 12.0, 13.0, 15.0, 19.0,
    24.0, 26.0, 20.0, 14.0, 9.0, 6.0, 4.0, 3.0,
];

/// Effect sizes for [`synth_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub base: f64,
    /// Added once per calendar month number (April = 4).
    pub month_trend: f64,
    /// Added on Monday..Friday.
    pub weekday_bump: f64,
    pub hour_profile: [f64; 24],
    /// Standard deviation of the uniform noise.
    pub noise_sigma: f64,
    /// Adds an independent fair-coin `flag` column.
    pub random_flag: bool,
}

impl SynthSpec {
    /// Default effects at the given size.
    pub fn new(rows: usize) -> Self {
        SynthSpec {
            rows,
            base: 20.0,
            month_trend: 2.0,
            weekday_bump: 15.0,
            hour_profile: DEFAULT_HOUR_PROFILE,
            noise_sigma: 4.0,
            random_flag: false,
        }
    }

    /// No effects and no noise: every target equals `base`.
    pub fn flat(rows: usize, base: f64) -> Self {
        SynthSpec {
            rows,
            base,
            month_trend: 0.0,
            weekday_bump: 0.0,
            hour_profile: [0.0; 24],
            noise_sigma: 0.0,
            random_flag: false,
        }
    }
}

/// Rows covering `days` full days of readings.
pub fn rows_for_days(days: usize) -> usize {
    days * 72 * ROADWAYS.len()
}

/// First reading: 1991-04-01 00:00:00.
pub fn synth_start() -> Timestamp {
    Timestamp::new(1991, 4, 1, 0, 0, 0).expect("valid start date")
}

/// Columns `row_id, time, x, y, direction, congestion` and optionally
/// `flag`. Targets are rounded to integers and clamped to 0..=100.
///
/// # Panics
/// If `spec.rows` is 0.
pub fn synth_dataset(seed: u64, spec: &SynthSpec) -> Dataset {
    assert!(spec.rows >= 1, "synth_dataset needs at least one row");
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flag_rng = ChaCha8Rng::seed_from_u64(seed);
    flag_rng.set_stream(1);
    let half_width = spec.noise_sigma * 3f64.sqrt();
    let start = synth_start().epoch_seconds();

    let n = spec.rows;
    let mut ids = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut dirs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for row in 0..n {
        let step = (row / ROADWAYS.len()) as i64;
        let (x, y, dir) = ROADWAYS[row % ROADWAYS.len()];
        let t = Timestamp::from_epoch_seconds(start + step * STEP_SECONDS);
        let f = t.calendar_features();
        let noise = if half_width > 0.0 {
            noise_rng.gen_range(-half_width..half_width)
        } else {
            0.0
        };
        let v = spec.base
            + spec.month_trend * f64::from(t.month)
            + spec.weekday_bump * f64::from(f.weekday_flag)
            + spec.hour_profile[t.hour as usize]
            + noise;
        ids.push(row.to_string());
        times.push(t.to_string());
        xs.push(x.to_string());
        ys.push(y.to_string());
        dirs.push(dir);
        targets.push(format_number(v.round().clamp(0.0, 100.0)));
        if spec.random_flag {
            flags.push(if flag_rng.gen_bool(0.5) { "1" } else { "0" });
        }
    }

    let mut cols = vec![
        Column::from_raw("row_id", ColumnKind::Identifier, &ids),
        Column::from_raw(SYNTH_TIME_COL, ColumnKind::Timestamp, &times),
        Column::from_raw("x", ColumnKind::Categorical, &xs),
        Column::from_raw("y", ColumnKind::Categorical, &ys),
        Column::from_raw("direction", ColumnKind::Categorical, &dirs),
        Column::from_raw(SYNTH_TARGET_COL, ColumnKind::Continuous, &targets),
    ];
    if spec.random_flag {
        cols.push(Column::from_raw(SYNTH_FLAG_COL, ColumnKind::BinaryFlag, &flags));
    }
    Dataset::new(cols).expect("generated columns are consistent")
}
