//! Exploratory visualization of timestamped tabular data.
//!
//! The crate walks a table through cleaning, calendar feature extraction,
//! Sturges binning, per-unit aggregation split by hue columns, hue ranking and
//! finally deterministic SVG plots plus CSV tables and a JSON report.

pub mod aggregation;
pub mod binning;
pub mod dataset;
pub mod pipeline;
pub mod plot;
pub mod temporal;
