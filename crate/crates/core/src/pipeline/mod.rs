//! End-to-end run: load, clean, engineer calendar features, choose a unit,
//! plot the target split by every usable hue, rank and combine hues, and
//! write everything under one output directory.

mod report;
mod synth;
mod unit;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::aggregation::{
    combine_categories_named, group_mean, hue_aggregate, partition_series, pivot_table, rank_hues,
    unsplit_table, AggregationError, AggregationTable,
};
use crate::binning::{bin_column, BinningError};
use crate::dataset::{
    impute, load_csv, validate, ColumnKind, Dataset, DatasetError, ImputePolicy, LoadOptions,
};
use crate::plot::{make_bar_plot, make_line_plot, render_svg, PlotError, PlotKind};
use crate::temporal::{decompose_with_names, derive_calendar_flags_with_names, TemporalError, TimeFormat};

pub(crate) use crate::aggregation::serialize_score;

pub use report::{
    emit_report, slugify, ArtifactKind, ArtifactLabel, BinRecord, Combination, Decision, IoError,
    ManifestEntry, Report, UnitSelection, PLOTS_DIR, REPORT_FILE, TABLES_DIR,
};
pub use synth::{
    rows_for_days, synth_dataset, synth_start, SynthSpec, DEFAULT_HOUR_PROFILE, ROADWAYS,
    STEP_SECONDS, SYNTH_FLAG_COL, SYNTH_TARGET_COL, SYNTH_TIME_COL,
};
pub use unit::{recommend_unit, TimeUnit, UnitColumns, UnitError, UnitRanking, UnitScore};

pub const DEFAULT_MAX_SERIES: usize = 12;
pub const DEFAULT_TOP_K: usize = 2;
/// Day-of-month hues are split into groups of this many dates.
pub const DEFAULT_DAY_GROUP_SIZE: usize = 11;
/// Two months of synthetic readings.
pub const DEFAULT_DEMO_ROWS: usize = 6 * 72 * 61;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Validate,
    Impute,
    Decompose,
    CalendarFlags,
    UnitSelection,
    BasePlot,
    HuePlots,
    BinnedHuePlots,
    Combination,
    FlagBars,
    Emit,
}

impl Stage {
    /// 1-based position in the run.
    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Load => "load",
            Stage::Validate => "validate",
            Stage::Impute => "impute",
            Stage::Decompose => "decompose",
            Stage::CalendarFlags => "calendar_flags",
            Stage::UnitSelection => "unit_selection",
            Stage::BasePlot => "base_plot",
            Stage::HuePlots => "hue_plots",
            Stage::BinnedHuePlots => "binned_hue_plots",
            Stage::Combination => "combination",
            Stage::FlagBars => "flag_bars",
            Stage::Emit => "emit",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Csv(PathBuf),
    Synthetic { seed: u64, rows: usize },
}

impl fmt::Display for InputSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSource::Csv(p) => write!(f, "{}", p.display()),
            InputSource::Synthetic { seed, rows } => write!(f, "synthetic(seed={seed}, rows={rows})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitChoice {
    #[default]
    Auto,
    Fixed(TimeUnit),
}

impl FromStr for UnitChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            Ok(UnitChoice::Auto)
        } else {
            s.parse().map(UnitChoice::Fixed)
        }
    }
}

impl fmt::Display for UnitChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitChoice::Auto => f.write_str("auto"),
            UnitChoice::Fixed(u) => u.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum HueSelection {
    #[default]
    Auto,
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub time_col: String,
    pub target_col: String,
    pub unit: UnitChoice,
    pub hues: HueSelection,
    pub max_series: usize,
    /// How many top-ranked hues to combine.
    pub top_k: usize,
    pub day_group_size: usize,
    pub out_dir: PathBuf,
    pub impute_policy: ImputePolicy,
    pub time_format: TimeFormat,
    pub delimiter: u8,
}

impl PipelineConfig {
    pub fn new(
        input: InputSource,
        time_col: impl Into<String>,
        target_col: impl Into<String>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            input,
            time_col: time_col.into(),
            target_col: target_col.into(),
            unit: UnitChoice::Auto,
            hues: HueSelection::Auto,
            max_series: DEFAULT_MAX_SERIES,
            top_k: DEFAULT_TOP_K,
            day_group_size: DEFAULT_DAY_GROUP_SIZE,
            out_dir: out_dir.into(),
            impute_policy: ImputePolicy::default(),
            time_format: TimeFormat::default(),
            delimiter: b',',
        }
    }

    /// Synthetic input with its own column names.
    pub fn synthetic(seed: u64, rows: usize, out_dir: impl Into<PathBuf>) -> Self {
        Self::new(
            InputSource::Synthetic { seed, rows },
            SYNTH_TIME_COL,
            SYNTH_TARGET_COL,
            out_dir,
        )
    }

    fn check(&self) -> Result<(), String> {
        if self.time_col == self.target_col {
            return Err(format!("time and target column are both `{}`", self.time_col));
        }
        if self.max_series == 0 {
            return Err("max_series must be at least 1".into());
        }
        if self.top_k == 0 {
            return Err("top_k must be at least 1".into());
        }
        if self.day_group_size == 0 {
            return Err("day_group_size must be at least 1".into());
        }
        if let InputSource::Synthetic { rows: 0, .. } = self.input {
            return Err("synthetic input needs at least one row".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineErrorKind {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Binning(#[from] BinningError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("stage `{stage}`: {kind}")]
pub struct PipelineError {
    pub stage: Stage,
    pub kind: PipelineErrorKind,
}

impl PipelineError {
    /// True for failures reading or writing files (as opposed to bad input).
    pub fn is_io(&self) -> bool {
        matches!(
            self.kind,
            PipelineErrorKind::Io(_) | PipelineErrorKind::Dataset(DatasetError::Io { .. })
        )
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<PipelineErrorKind>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            kind: e.into(),
        })
    }
}

fn load(config: &PipelineConfig) -> Result<Dataset, PipelineError> {
    let ds = match &config.input {
        InputSource::Csv(path) => {
            let options = LoadOptions {
                delimiter: config.delimiter,
                time_format: config.time_format.clone(),
                ..LoadOptions::default()
            }
            .hint(&config.target_col, ColumnKind::Continuous)
            .hint(&config.time_col, ColumnKind::Timestamp);
            load_csv(path, &options).at(Stage::Load)?
        }
        InputSource::Synthetic { seed, rows } => {
            let ds = synth_dataset(*seed, &SynthSpec::new(*rows));
            for col in [&config.time_col, &config.target_col] {
                ds.column(col).at(Stage::Load)?;
            }
            ds
        }
    };
    ds.column_of_kind(&config.target_col, &[ColumnKind::Continuous])
        .at(Stage::Load)?;
    ds.column_of_kind(&config.time_col, &[ColumnKind::Timestamp])
        .at(Stage::Load)?;
    Ok(ds)
}

/// Hue candidates after the exclusion rules, split by how they are used.
struct Hues {
    categorical: Vec<String>,
    continuous: Vec<String>,
}

fn select_hues(
    ds: &Dataset,
    config: &PipelineConfig,
    x_col: &str,
    report: &mut Report,
) -> Result<Hues, PipelineError> {
    let names: Vec<String> = match &config.hues {
        HueSelection::Auto => ds
            .columns()
            .filter(|c| c.kind() != ColumnKind::Identifier && c.kind() != ColumnKind::Timestamp)
            .map(|c| c.name().to_string())
            .collect(),
        HueSelection::Explicit(list) => {
            let mut seen = Vec::new();
            for n in list {
                if !seen.contains(n) {
                    seen.push(n.clone());
                }
            }
            seen
        }
    };
    let mut hues = Hues {
        categorical: Vec::new(),
        continuous: Vec::new(),
    };
    for name in names {
        let col = ds.column(&name).at(Stage::HuePlots)?;
        let reason = if name == x_col {
            Some("x column")
        } else if name == config.target_col {
            Some("target column")
        } else {
            match col.kind() {
                ColumnKind::Identifier => Some("identifier"),
                ColumnKind::Timestamp => Some("timestamp"),
                _ if col.categories().len() < 2 => Some("constant"),
                _ => None,
            }
        };
        if let Some(reason) = reason {
            // auto mode silently skips the x column and the target
            let implicit = config.hues == HueSelection::Auto && (name == x_col || name == config.target_col);
            if !implicit {
                report.excluded_hues.push(crate::aggregation::ExcludedCandidate {
                    column: name,
                    reason: reason.to_string(),
                });
            }
            continue;
        }
        if col.kind() == ColumnKind::Continuous {
            hues.continuous.push(name);
        } else {
            hues.categorical.push(name);
        }
    }
    Ok(hues)
}

fn plot_title(target: &str, x: &str, hue: Option<&str>, part: Option<(usize, usize)>) -> String {
    let mut t = format!("Mean {target} by {x}");
    if let Some(h) = hue {
        t.push_str(&format!(", split by {h}"));
    }
    if let Some((i, n)) = part {
        t.push_str(&format!(" (part {i} of {n})"));
    }
    t
}

fn add_line_plot(
    report: &mut Report,
    stage: Stage,
    table: &AggregationTable,
    label: &ArtifactLabel,
    title: &str,
) -> Result<(), PipelineError> {
    let spec = make_line_plot(table, title).at(stage)?;
    let svg = render_svg(&spec).at(stage)?;
    let names = table.series.iter().map(|s| s.name.clone()).collect();
    report.add_plot(label, PlotKind::Line, title, names, svg);
    Ok(())
}

/// One hue-split line plot, or several when the hue is crowded.
fn add_hue_plots(
    report: &mut Report,
    stage: Stage,
    table: &AggregationTable,
    chunk: usize,
) -> Result<(), PipelineError> {
    let hue = table.hue_name.as_deref();
    let parts = partition_series(table, chunk);
    if parts.len() > 1 {
        report.decide(
            stage,
            "crowded hue",
            format!(
                "`{}` has {} categories; split into {} plots of at most {chunk} series",
                hue.unwrap_or_default(),
                table.series.len(),
                parts.len()
            ),
        );
    }
    let n = parts.len();
    for (i, part) in parts.iter().enumerate() {
        let numbering = (n > 1).then_some((i + 1, n));
        let label = ArtifactLabel::new("line", &table.x_name, hue, numbering.map(|p| p.0));
        let title = plot_title(&table.y_name, &table.x_name, hue, numbering);
        add_line_plot(report, stage, part, &label, &title)?;
    }
    Ok(())
}

fn add_hue_tables(report: &mut Report, table: &AggregationTable) {
    let label = ArtifactLabel::new("line", &table.x_name, table.hue_name.as_deref(), None);
    report.add_tables(&label, table.means_csv(), table.counts_csv());
}

fn strategy_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn describe_policy(p: &ImputePolicy) -> String {
    format!(
        "continuous={}, categorical={}, timestamp={}",
        strategy_name(&p.continuous_strategy),
        strategy_name(&p.categorical_strategy),
        strategy_name(&p.timestamp_strategy)
    )
}

/// Runs every stage up to (not including) writing files.
pub fn analyze(config: &PipelineConfig) -> Result<Report, PipelineError> {
    config
        .check()
        .map_err(PipelineErrorKind::Config)
        .at(Stage::Load)?;
    let target = config.target_col.as_str();
    let mut report = Report::new(config.input.to_string(), &config.time_col, target);

    // step 1: clean and impute
    let ds = load(config)?;
    report.rows_loaded = ds.row_count();
    report.schema = ds.schema();
    report.decide(
        Stage::Load,
        "column kinds",
        format!("`{target}` forced continuous, `{}` forced timestamp, others inferred", config.time_col),
    );

    report.clean_report = validate(&ds);
    let dirty = report
        .clean_report
        .columns
        .iter()
        .filter(|c| c.null_count + c.inconsistent_count > 0)
        .count();
    report.decide(
        Stage::Validate,
        "validation",
        format!("{dirty} column(s) with missing or inconsistent values"),
    );

    let (ds, log) = impute(&ds, config.impute_policy).at(Stage::Impute)?;
    report.impute_policy = config.impute_policy;
    report.imputation_log = log;
    report.rows_analyzed = ds.row_count();
    report.decide(
        Stage::Impute,
        "imputation policy",
        format!(
            "{}; values of the wrong type count as missing",
            describe_policy(&config.impute_policy)
        ),
    );

    // feature engineering
    let (ds, calendar) = decompose_with_names(&ds, &config.time_col).at(Stage::Decompose)?;
    report.decide(
        Stage::Decompose,
        "calendar columns",
        "year, month, date, hour, minute and second added; constant ones are never hues",
    );
    let (ds, flags) = derive_calendar_flags_with_names(&ds, &config.time_col).at(Stage::CalendarFlags)?;
    report.decide(
        Stage::CalendarFlags,
        "calendar flags",
        "weekday = Monday..Friday, PM = hour >= 12, day names ordered Monday..Sunday",
    );
    let units = UnitColumns::new(&calendar, &flags);

    let ranking = recommend_unit(&ds, target, &units);
    let (chosen, ranking) = match config.unit {
        UnitChoice::Auto => {
            let r = ranking.at(Stage::UnitSelection)?;
            (r.best(), Some(r))
        }
        UnitChoice::Fixed(u) => (u, ranking.ok()),
    };
    let x_col = units.get(chosen).to_string();
    report.unit = Some(UnitSelection {
        method: "between/within variance ratio of raw target values per unit value (proxy score)".into(),
        requested: config.unit.to_string(),
        chosen,
        column: x_col.clone(),
        ranking,
    });
    report.decide(
        Stage::UnitSelection,
        "unit",
        match config.unit {
            UnitChoice::Auto => format!(
                "`{chosen}` chosen by highest score; exact ties prefer hour, date, day, month, minute, year"
            ),
            UnitChoice::Fixed(_) => format!("`{chosen}` requested explicitly"),
        },
    );

    // step 2: target against the unit
    let base = unsplit_table(&ds, &x_col, target).at(Stage::BasePlot)?;
    let label = ArtifactLabel::new("line", &x_col, None, None);
    add_line_plot(&mut report, Stage::BasePlot, &base, &label, &plot_title(target, &x_col, None, None))?;
    add_hue_tables(&mut report, &base);
    report.decide(
        Stage::BasePlot,
        "statistic",
        "arithmetic mean per cell; cells without rows are gaps, never zero",
    );

    // step 3: categorical hues
    let hues = select_hues(&ds, config, &x_col, &mut report)?;
    for name in &hues.categorical {
        let table = hue_aggregate(&ds, &x_col, name, target).at(Stage::HuePlots)?;
        let chunk = if *name == units.date {
            config.max_series.min(config.day_group_size)
        } else {
            config.max_series
        };
        add_hue_tables(&mut report, &table);
        add_hue_plots(&mut report, Stage::HuePlots, &table, chunk)?;
    }
    report.decide(
        Stage::HuePlots,
        "crowding",
        format!(
            "at most {} series per plot; day-of-month groups of {}",
            config.max_series,
            config.max_series.min(config.day_group_size)
        ),
    );

    // step 4: continuous hues via Sturges bins
    let mut ds = ds;
    let mut ranked_hues = hues.categorical.clone();
    for name in &hues.continuous {
        let (binned, bin_name, spec) = bin_column(&ds, name).at(Stage::BinnedHuePlots)?;
        ds = binned;
        report.bins.push(BinRecord {
            column: name.clone(),
            bin_column: bin_name.clone(),
            edges: spec.edges().to_vec(),
            labels: spec.labels().to_vec(),
        });
        let table = hue_aggregate(&ds, &x_col, &bin_name, target).at(Stage::BinnedHuePlots)?;
        add_hue_tables(&mut report, &table);
        add_hue_plots(&mut report, Stage::BinnedHuePlots, &table, config.max_series)?;
        ranked_hues.push(bin_name);
    }
    report.decide(
        Stage::BinnedHuePlots,
        "binning",
        format!("Sturges bins for continuous hues; the target `{target}` is never binned"),
    );
    report.hue_candidates = ranked_hues.clone();

    // step 5: rank, combine, pivot
    if !ranked_hues.is_empty() {
        let refs: Vec<&str> = ranked_hues.iter().map(String::as_str).collect();
        let ranking = rank_hues(&ds, &x_col, target, &refs).at(Stage::Combination)?;
        report.hue_ranking = Some(ranking);
    }
    let ranked: Vec<String> = report
        .hue_ranking
        .as_ref()
        .map(|r| r.ranked.iter().map(|s| s.hue_name.clone()).collect())
        .unwrap_or_default();
    let k = config.top_k.min(ranked.len());
    if k >= 2 {
        let cols: Vec<&str> = ranked[..k].iter().map(String::as_str).collect();
        let (with_combo, combo) = combine_categories_named(&ds, &cols).at(Stage::Combination)?;
        let table = hue_aggregate(&with_combo, &x_col, &combo, target).at(Stage::Combination)?;
        report.combination = Some(Combination {
            columns: cols.iter().map(|c| c.to_string()).collect(),
            name: combo.clone(),
            categories: table.series.len(),
        });
        add_hue_plots(&mut report, Stage::Combination, &table, config.max_series)?;
        let pivot = pivot_table(&ds, &x_col, &cols, target).at(Stage::Combination)?;
        let label = ArtifactLabel::new("pivot", &x_col, Some(&combo), None);
        report.add_tables(&label, pivot.means_csv(), pivot.counts_csv());
        report.decide(
            Stage::Combination,
            "combination",
            format!(
                "top {k} hues by separability combined as `{combo}` (top_k = {}); pivot rows are `{x_col}`",
                config.top_k
            ),
        );
    } else {
        report.decide(
            Stage::Combination,
            "combination",
            format!(
                "pivot skipped: {} usable categorical feature(s), top_k = {}",
                ranked.len(),
                config.top_k
            ),
        );
    }

    // binary flags as bars
    let flag_cols: Vec<String> = ds
        .columns()
        .filter(|c| c.kind() == ColumnKind::BinaryFlag && c.name() != target)
        .map(|c| c.name().to_string())
        .collect();
    for flag in &flag_cols {
        let stats = group_mean(&ds, flag, target).at(Stage::FlagBars)?;
        let title = format!("Mean {target} by {flag}");
        let spec = make_bar_plot(&stats, &title, flag, target).at(Stage::FlagBars)?;
        let svg = render_svg(&spec).at(Stage::FlagBars)?;
        let label = ArtifactLabel::new("bar", flag, None, None);
        let keys = stats.iter().map(|s| s.key.clone()).collect();
        report.add_plot(&label, PlotKind::Bar, &title, keys, svg);
    }
    report.decide(
        Stage::FlagBars,
        "flag bars",
        format!("{} binary flag(s) drawn as bars", flag_cols.len()),
    );
    report.decide(
        Stage::Emit,
        "output",
        "files written through a temp file and rename; files listed by a previous report are removed",
    );
    Ok(report)
}

/// [`analyze`] followed by [`emit_report`] into `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report, PipelineError> {
    let report = analyze(config)?;
    emit_report(&report, &config.out_dir).at(Stage::Emit)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_indices_follow_declaration() {
        assert_eq!(Stage::Load.index(), 1);
        assert_eq!(Stage::Emit.index(), 12);
    }

    #[test]
    fn unit_choice_parses() {
        assert_eq!("auto".parse(), Ok(UnitChoice::Auto));
        assert_eq!("month".parse(), Ok(UnitChoice::Fixed(TimeUnit::Month)));
        assert!("fortnight".parse::<UnitChoice>().is_err());
    }

    #[test]
    fn same_time_and_target() {
        let mut c = PipelineConfig::synthetic(1, 10, "unused");
        c.target_col = "time".into();
        let err = analyze(&c).unwrap_err();
        assert_eq!(err.stage, Stage::Load);
        assert!(matches!(err.kind, PipelineErrorKind::Config(_)));
    }

    #[test]
    fn empty_csv_fails_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        let c = PipelineConfig::new(InputSource::Csv(path), "time", "congestion", dir.path().join("out"));
        let err = analyze(&c).unwrap_err();
        assert_eq!(err.stage, Stage::Load);
        assert_eq!(err.kind, PipelineErrorKind::Dataset(DatasetError::EmptyInput));
        assert!(!err.is_io());
    }

    #[test]
    fn decisions_follow_stage_order() {
        let report = analyze(&PipelineConfig::synthetic(2, rows_for_days(3), "unused")).unwrap();
        assert!(report.decisions.windows(2).all(|w| w[0].step <= w[1].step));
        let stages: std::collections::BTreeSet<_> = report.decisions.iter().map(|d| d.stage).collect();
        assert_eq!(stages.len(), 12);
    }
}
