use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregationTable, GroupStat};

use super::{nice_ticks, PlotError, CANVAS_HEIGHT, CANVAS_WIDTH, MARGIN, MAX_BARS, MAX_Y_TICKS, PALETTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Line,
    Bar,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::Line => "line",
            PlotKind::Bar => "bar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub name: String,
    pub palette_index: usize,
    /// One entry per x category; `None` is a gap.
    pub points: Vec<Option<f64>>,
}

/// Everything needed to draw one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_categories: Vec<String>,
    pub series: Vec<SeriesSpec>,
    pub y_ticks: Vec<f64>,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    fn present_range(&self) -> Option<(f64, f64)> {
        self.series
            .iter()
            .flat_map(|s| s.points.iter().flatten())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((f64::min(lo, v), f64::max(hi, v))),
            })
    }

    /// Checks every structural invariant the renderer relies on.
    pub fn validate(&self) -> Result<(), PlotError> {
        let bad = |m: String| Err(PlotError::InvalidSpec(m));
        if self.x_categories.is_empty() {
            return bad("no x categories".into());
        }
        if self.series.is_empty() {
            return bad("no series".into());
        }
        if self.width <= 2 * MARGIN || self.height <= 2 * MARGIN {
            return bad(format!("canvas {}x{} too small", self.width, self.height));
        }
        for (i, s) in self.series.iter().enumerate() {
            if s.points.len() != self.x_categories.len() {
                return bad(format!(
                    "series `{}` has {} points for {} x categories",
                    s.name,
                    s.points.len(),
                    self.x_categories.len()
                ));
            }
            if s.palette_index != i % PALETTE.len() {
                return bad(format!("series `{}` has palette index {}", s.name, s.palette_index));
            }
            if s.points.iter().flatten().any(|v| !v.is_finite()) {
                return bad(format!("series `{}` has a non-finite point", s.name));
            }
        }
        if self.y_ticks.len() < 2 || self.y_ticks.windows(2).any(|w| w[0] >= w[1]) {
            return bad("y ticks must be at least two ascending values".into());
        }
        if let Some((lo, hi)) = self.present_range() {
            if lo < self.y_ticks[0] || hi > *self.y_ticks.last().unwrap() {
                return bad(format!("y ticks do not cover [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

/// Line chart of an aggregation table: one series per hue category.
pub fn make_line_plot(table: &AggregationTable, title: &str) -> Result<PlotSpec, PlotError> {
    if table.is_empty() {
        return Err(PlotError::EmptyTable);
    }
    let series: Vec<SeriesSpec> = table
        .series
        .iter()
        .enumerate()
        .map(|(i, s)| SeriesSpec {
            name: s.name.clone(),
            palette_index: i % PALETTE.len(),
            points: s.cells.iter().map(|c| c.mean).collect(),
        })
        .collect();
    let mut spec = PlotSpec {
        kind: PlotKind::Line,
        title: title.to_string(),
        x_label: table.x_name.clone(),
        y_label: format!("mean {}", table.y_name),
        x_categories: table.x_values.clone(),
        series,
        y_ticks: Vec::new(),
        width: CANVAS_WIDTH,
        height: CANVAS_HEIGHT,
    };
    let (lo, hi) = spec.present_range().ok_or(PlotError::EmptyTable)?;
    spec.y_ticks = nice_ticks(lo, hi, MAX_Y_TICKS);
    Ok(spec)
}

/// One bar per key, baseline at zero.
pub fn make_bar_plot(
    stats: &[GroupStat],
    title: &str,
    x_label: &str,
    y_label: &str,
) -> Result<PlotSpec, PlotError> {
    if stats.is_empty() {
        return Err(PlotError::EmptyInput);
    }
    if stats.len() > MAX_BARS {
        return Err(PlotError::TooManyBars(stats.len()));
    }
    let lo = stats.iter().map(|s| s.mean).fold(0.0, f64::min);
    let hi = stats.iter().map(|s| s.mean).fold(0.0, f64::max);
    Ok(PlotSpec {
        kind: PlotKind::Bar,
        title: title.to_string(),
        x_label: x_label.to_string(),
        y_label: format!("mean {y_label}"),
        x_categories: stats.iter().map(|s| s.key.clone()).collect(),
        series: vec![SeriesSpec {
            name: format!("mean {y_label}"),
            palette_index: 0,
            points: stats.iter().map(|s| Some(s.mean)).collect(),
        }],
        y_ticks: nice_ticks(lo, hi, MAX_Y_TICKS),
        width: CANVAS_WIDTH,
        height: CANVAS_HEIGHT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{Cell, HueSeries};

    fn table(x: usize, hues: usize) -> AggregationTable {
        AggregationTable {
            x_name: "hour".into(),
            y_name: "congestion".into(),
            x_values: (0..x).map(|i| i.to_string()).collect(),
            hue_name: Some("day".into()),
            series: (0..hues)
                .map(|h| HueSeries {
                    name: format!("h{h}"),
                    cells: (0..x)
                        .map(|i| Cell {
                            mean: Some((h * 10 + i) as f64),
                            count: 1,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn line_plot_has_one_series_per_hue() {
        let spec = make_line_plot(&table(24, 7), "t").unwrap();
        assert_eq!(spec.series.len(), 7);
        assert_eq!(spec.x_categories.len(), 24);
        spec.validate().unwrap();
    }

    #[test]
    fn palette_wraps_after_twelve() {
        let spec = make_line_plot(&table(2, 14), "t").unwrap();
        let idx: Vec<_> = spec.series.iter().map(|s| s.palette_index).collect();
        assert_eq!(&idx[10..], [10, 11, 0, 1]);
    }

    #[test]
    fn single_x_value() {
        let spec = make_line_plot(&table(1, 3), "t").unwrap();
        assert!(spec.series.iter().all(|s| s.points.len() == 1));
        spec.validate().unwrap();
    }

    #[test]
    fn gaps_stay_gaps() {
        let mut t = table(3, 2);
        t.series[1].cells[1] = Cell { mean: None, count: 0 };
        let spec = make_line_plot(&t, "t").unwrap();
        assert_eq!(spec.series[1].points[1], None);
    }

    #[test]
    fn empty_table() {
        assert_eq!(make_line_plot(&table(0, 2), "t"), Err(PlotError::EmptyTable));
    }

    fn stats(n: usize) -> Vec<GroupStat> {
        (0..n)
            .map(|i| GroupStat {
                key: i.to_string(),
                mean: 10.0 + i as f64,
                count: 3,
            })
            .collect()
    }

    #[test]
    fn bar_plot_bounds() {
        let spec = make_bar_plot(&stats(2), "t", "weekday", "congestion").unwrap();
        assert_eq!(spec.x_categories.len(), 2);
        assert_eq!(spec.y_ticks[0], 0.0);
        spec.validate().unwrap();
        let one = make_bar_plot(&stats(1), "t", "k", "c").unwrap();
        assert_eq!(one.series[0].points, [Some(10.0)]);
        assert_eq!(make_bar_plot(&stats(13), "t", "k", "c"), Err(PlotError::TooManyBars(13)));
        assert_eq!(make_bar_plot(&[], "t", "k", "c"), Err(PlotError::EmptyInput));
    }

    #[test]
    fn validate_catches_mismatched_points() {
        let mut spec = make_line_plot(&table(3, 2), "t").unwrap();
        spec.series[0].points.pop();
        assert!(matches!(spec.validate(), Err(PlotError::InvalidSpec(_))));
    }

    #[test]
    fn validate_catches_uncovered_points() {
        let mut spec = make_line_plot(&table(3, 2), "t").unwrap();
        spec.series[0].points[0] = Some(1e6);
        assert!(matches!(spec.validate(), Err(PlotError::InvalidSpec(_))));
    }
}
