//! Renderer-independent plot descriptions and their SVG rendering.

mod spec;
mod svg;
mod ticks;

use thiserror::Error;

pub use spec::{make_bar_plot, make_line_plot, PlotKind, PlotSpec, SeriesSpec};
pub use svg::render_svg;
pub use ticks::{nice_ticks, tick_decimals};

pub const CANVAS_WIDTH: u32 = 960;
pub const CANVAS_HEIGHT: u32 = 540;
pub const MARGIN: u32 = 60;
pub const MAX_Y_TICKS: usize = 8;
pub const MAX_BARS: usize = 12;
/// Category count above which x labels are drawn at 45°.
pub const ROTATE_LABELS_ABOVE: usize = 12;

/// Fixed series colours, indexed by `palette_index`.
pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("table has no data")]
    EmptyTable,
    #[error("no bars to draw")]
    EmptyInput,
    #[error("{0} bars exceed the limit of 12")]
    TooManyBars(usize),
    #[error("invalid plot spec: {0}")]
    InvalidSpec(String),
}
