//! Per-unit target means, hue-split tables, combined categories, pivots and
//! hue ranking.
//!
//! All tables carry a `(mean, count)` pair per cell. A cell with no rows has
//! count 0 and no mean; it is never reported as 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dataset::{format_fixed3, Column, ColumnKind, Dataset, DatasetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("hue column `{0}` is the same as the x column")]
    SameColumn(String),
    #[error("need at least {needed} columns to combine, got {found}")]
    TooFewColumns { needed: usize, found: usize },
    #[error("separability needs at least 2 series, `{hue}` has {found}")]
    TooFewSeries { hue: String, found: usize },
    #[error("no usable hue candidates")]
    EmptyCandidates,
    #[error("table is empty")]
    EmptyTable,
}

const GROUP_KINDS: [ColumnKind; 2] = [ColumnKind::Categorical, ColumnKind::BinaryFlag];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub key: String,
    pub mean: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub mean: Option<f64>,
    pub count: u64,
}

impl Cell {
    fn from_sum(sum: f64, count: u64) -> Self {
        Cell {
            mean: (count > 0).then(|| sum / count as f64),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HueSeries {
    pub name: String,
    pub cells: Vec<Cell>,
}

/// Target means per x value, one series per hue category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationTable {
    pub x_name: String,
    pub y_name: String,
    pub x_values: Vec<String>,
    /// `None` for an unsplit table, whose single series is named after the target.
    pub hue_name: Option<String>,
    pub series: Vec<HueSeries>,
}

impl AggregationTable {
    pub fn is_empty(&self) -> bool {
        self.x_values.is_empty() || self.series.is_empty()
    }

    /// Total row count behind each x value.
    pub fn x_counts(&self) -> Vec<u64> {
        (0..self.x_values.len())
            .map(|i| self.series.iter().map(|s| s.cells[i].count).sum())
            .collect()
    }

    /// Count-weighted mean over all hues at each x value.
    pub fn collapsed(&self) -> Vec<GroupStat> {
        (0..self.x_values.len())
            .map(|i| {
                let (sum, count) = self.series.iter().fold((0.0, 0u64), |(s, n), ser| {
                    let c = ser.cells[i];
                    (s + c.mean.unwrap_or(0.0) * c.count as f64, n + c.count)
                });
                GroupStat {
                    key: self.x_values[i].clone(),
                    mean: sum / count as f64,
                    count,
                }
            })
            .collect()
    }

    fn header(&self) -> Vec<&str> {
        std::iter::once(self.x_name.as_str())
            .chain(self.series.iter().map(|s| s.name.as_str()))
            .collect()
    }

    /// CSV of means: x value, then one column per series. Empty cells have no rows.
    pub fn means_csv(&self) -> String {
        write_matrix(&self.header(), &self.x_values, |r, c| {
            self.series[c].cells[r]
                .mean
                .map(format_fixed3)
                .unwrap_or_default()
        }, self.series.len())
    }

    /// CSV of row counts, same layout as [`AggregationTable::means_csv`].
    pub fn counts_csv(&self) -> String {
        write_matrix(&self.header(), &self.x_values, |r, c| {
            self.series[c].cells[r].count.to_string()
        }, self.series.len())
    }
}

fn write_matrix(
    header: &[&str],
    rows: &[String],
    cell: impl Fn(usize, usize) -> String,
    width: usize,
) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for (r, key) in rows.iter().enumerate() {
        let mut rec = vec![key.clone()];
        rec.extend((0..width).map(|c| cell(r, c)));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Target means by row value and combined-category column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotTable {
    pub row_name: String,
    pub col_name: String,
    pub y_name: String,
    pub row_values: Vec<String>,
    pub col_labels: Vec<String>,
    /// `cells[row][col]`.
    pub cells: Vec<Vec<Cell>>,
}

impl PivotTable {
    fn header(&self) -> Vec<&str> {
        std::iter::once(self.row_name.as_str())
            .chain(self.col_labels.iter().map(String::as_str))
            .collect()
    }

    pub fn means_csv(&self) -> String {
        write_matrix(&self.header(), &self.row_values, |r, c| {
            self.cells[r][c].mean.map(format_fixed3).unwrap_or_default()
        }, self.col_labels.len())
    }

    pub fn counts_csv(&self) -> String {
        write_matrix(&self.header(), &self.row_values, |r, c| {
            self.cells[r][c].count.to_string()
        }, self.col_labels.len())
    }
}

fn target_values(dataset: &Dataset, target: &str) -> Result<Vec<f64>, AggregationError> {
    Ok(dataset
        .column_of_kind(target, &[ColumnKind::Continuous])?
        .numbers()?)
}

fn key_column<'a>(dataset: &'a Dataset, name: &str) -> Result<(&'a Column, Vec<u32>), AggregationError> {
    let col = dataset.column_of_kind(name, &GROUP_KINDS)?;
    let codes = col.dense_codes()?;
    Ok((col, codes))
}

/// Sums and counts over an `x × hue` grid of category codes.
struct CrossTab {
    sums: Vec<f64>,
    counts: Vec<u64>,
    width: usize,
}

impl CrossTab {
    fn build(x: &[u32], nx: usize, hue: Option<(&[u32], usize)>, target: &[f64]) -> Self {
        let width = hue.map_or(1, |(_, n)| n);
        let mut sums = vec![0.0; nx * width];
        let mut counts = vec![0u64; nx * width];
        for (row, &v) in target.iter().enumerate() {
            let h = hue.map_or(0, |(codes, _)| codes[row] as usize);
            let idx = x[row] as usize * width + h;
            sums[idx] += v;
            counts[idx] += 1;
        }
        CrossTab { sums, counts, width }
    }

    fn cell(&self, x: usize, h: usize) -> Cell {
        let i = x * self.width + h;
        Cell::from_sum(self.sums[i], self.counts[i])
    }

    fn observed_rows(&self) -> Vec<usize> {
        (0..self.counts.len() / self.width)
            .filter(|&x| (0..self.width).any(|h| self.counts[x * self.width + h] > 0))
            .collect()
    }

    fn observed_cols(&self) -> Vec<usize> {
        (0..self.width)
            .filter(|&h| self.counts.iter().skip(h).step_by(self.width).any(|&c| c > 0))
            .collect()
    }
}

/// Mean of `target` per value of `key_col`, keys in canonical order.
pub fn group_mean(dataset: &Dataset, key_col: &str, target: &str) -> Result<Vec<GroupStat>, AggregationError> {
    let (col, codes) = key_column(dataset, key_col)?;
    let values = target_values(dataset, target)?;
    let tab = CrossTab::build(&codes, col.categories().len(), None, &values);
    Ok(tab
        .observed_rows()
        .into_iter()
        .map(|x| {
            let c = tab.cell(x, 0);
            GroupStat {
                key: col.categories()[x].clone(),
                mean: c.mean.expect("observed rows have data"),
                count: c.count,
            }
        })
        .collect())
}

/// Single-series table of `target` by `x_col`.
pub fn unsplit_table(dataset: &Dataset, x_col: &str, target: &str) -> Result<AggregationTable, AggregationError> {
    let stats = group_mean(dataset, x_col, target)?;
    Ok(AggregationTable {
        x_name: x_col.to_string(),
        y_name: target.to_string(),
        x_values: stats.iter().map(|s| s.key.clone()).collect(),
        hue_name: None,
        series: vec![HueSeries {
            name: target.to_string(),
            cells: stats
                .iter()
                .map(|s| Cell {
                    mean: Some(s.mean),
                    count: s.count,
                })
                .collect(),
        }],
    })
}

/// Mean of `target` per `x_col` value, one series per `hue_col` category.
pub fn hue_aggregate(
    dataset: &Dataset,
    x_col: &str,
    hue_col: &str,
    target: &str,
) -> Result<AggregationTable, AggregationError> {
    if x_col == hue_col {
        return Err(AggregationError::SameColumn(hue_col.to_string()));
    }
    let (xc, x_codes) = key_column(dataset, x_col)?;
    let (hc, h_codes) = key_column(dataset, hue_col)?;
    let values = target_values(dataset, target)?;
    let tab = CrossTab::build(
        &x_codes,
        xc.categories().len(),
        Some((&h_codes, hc.categories().len())),
        &values,
    );
    let xs = tab.observed_rows();
    let hs = tab.observed_cols();
    Ok(AggregationTable {
        x_name: x_col.to_string(),
        y_name: target.to_string(),
        x_values: xs.iter().map(|&x| xc.categories()[x].clone()).collect(),
        hue_name: Some(hue_col.to_string()),
        series: hs
            .iter()
            .map(|&h| HueSeries {
                name: hc.categories()[h].clone(),
                cells: xs.iter().map(|&x| tab.cell(x, h)).collect(),
            })
            .collect(),
    })
}

/// Name and label conventions for combined columns: `a+b` and `(va,vb)`.
pub fn combined_name(cols: &[&str]) -> String {
    cols.join("+")
}

/// Adds one column whose value is the tuple of the given columns' values.
pub fn combine_categories(dataset: &Dataset, cols: &[&str]) -> Result<Dataset, AggregationError> {
    combine_categories_named(dataset, cols).map(|(d, _)| d)
}

/// [`combine_categories`] that also returns the new column's name. Only
/// combinations that occur are kept, ordered by tuple.
pub fn combine_categories_named(
    dataset: &Dataset,
    cols: &[&str],
) -> Result<(Dataset, String), AggregationError> {
    if cols.len() < 2 {
        return Err(AggregationError::TooFewColumns {
            needed: 2,
            found: cols.len(),
        });
    }
    let parts: Vec<(&Column, Vec<u32>)> = cols
        .iter()
        .map(|c| key_column(dataset, c))
        .collect::<Result<_, _>>()?;

    // Tuple of component codes; component categories are already in
    // canonical order, so ordering by code tuple is ordering by value tuple.
    let mut ids: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut row_keys: Vec<u32> = Vec::with_capacity(dataset.row_count());
    let mut buf = vec![0u32; parts.len()];
    for row in 0..dataset.row_count() {
        for (slot, (_, codes)) in buf.iter_mut().zip(&parts) {
            *slot = codes[row];
        }
        let id = match ids.get(buf.as_slice()) {
            Some(&id) => id,
            None => {
                let id = ids.len() as u32;
                ids.insert(buf.clone(), id);
                id
            }
        };
        row_keys.push(id);
    }
    // rank provisional ids by tuple order
    let mut rank = vec![0u32; ids.len()];
    let mut labels = Vec::with_capacity(ids.len());
    for (pos, (tuple, id)) in ids.iter().enumerate() {
        rank[*id as usize] = pos as u32;
        let values: Vec<&str> = tuple
            .iter()
            .zip(&parts)
            .map(|(&code, (col, _))| col.categories()[code as usize].as_str())
            .collect();
        labels.push(format!("({})", values.join(",")));
    }
    let codes = row_keys.iter().map(|&id| Some(rank[id as usize])).collect();
    let name = dataset.unique_name(&combined_name(cols), "");
    let column = Column::from_codes_in_order(name.clone(), ColumnKind::Categorical, labels, codes);
    Ok((dataset.with_column(column)?, name))
}

/// Mean of `target` with `row_col` values as rows and combinations of
/// `combo_cols` as columns.
pub fn pivot_table(
    dataset: &Dataset,
    row_col: &str,
    combo_cols: &[&str],
    target: &str,
) -> Result<PivotTable, AggregationError> {
    let (with_combo, combo) = combine_categories_named(dataset, combo_cols)?;
    let table = hue_aggregate(&with_combo, row_col, &combo, target)?;
    let n_rows = table.x_values.len();
    Ok(PivotTable {
        row_name: row_col.to_string(),
        col_name: combo,
        y_name: target.to_string(),
        row_values: table.x_values,
        col_labels: table.series.iter().map(|s| s.name.clone()).collect(),
        cells: (0..n_rows)
            .map(|r| table.series.iter().map(|s| s.cells[r]).collect())
            .collect(),
    })
}

pub(crate) fn serialize_score<S: Serializer>(score: &f64, s: S) -> Result<S::Ok, S::Error> {
    if score.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*score)
    }
}

/// Between/within variance ratio of a hue's series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityScore {
    pub hue_name: String,
    /// `f64::INFINITY` when series are internally flat but differ.
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
    pub series_count: usize,
}

/// Count-weighted between-group and within-group variance.
///
/// Each group is a list of `(value, weight)` members. Returns `(B, W)` where
/// B is the weighted variance of group means around the grand mean and W the
/// weighted mean of each group's variance around its own mean.
pub fn between_within(groups: &[Vec<(f64, u64)>]) -> (f64, f64) {
    let mut stats = Vec::with_capacity(groups.len());
    for g in groups {
        let n: u64 = g.iter().map(|(_, c)| c).sum();
        if n == 0 {
            continue;
        }
        let nf = n as f64;
        let mean = g.iter().map(|(m, c)| m * *c as f64).sum::<f64>() / nf;
        let var = g
            .iter()
            .map(|(m, c)| *c as f64 * (m - mean).powi(2))
            .sum::<f64>()
            / nf;
        stats.push((nf, mean, var));
    }
    let total: f64 = stats.iter().map(|s| s.0).sum();
    if total == 0.0 {
        return (0.0, 0.0);
    }
    let grand = stats.iter().map(|(n, m, _)| n * m).sum::<f64>() / total;
    let between = stats.iter().map(|(n, m, _)| n * (m - grand).powi(2)).sum::<f64>() / total;
    let within = stats.iter().map(|(n, _, v)| n * v).sum::<f64>() / total;
    (between, within)
}

/// B/W with exact-degeneracy handling. Variances below a tolerance relative
/// to the data's magnitude count as zero, so rounding noise in
/// identical series does not produce huge ratios.
pub fn variance_ratio(groups: &[Vec<(f64, u64)>]) -> f64 {
    let (b, w) = between_within(groups);
    let scale = groups
        .iter()
        .flatten()
        .filter(|(_, c)| *c > 0)
        .map(|(m, _)| m.abs())
        .fold(0.0f64, f64::max);
    let tol = (1e-9 * scale).powi(2);
    if b <= tol {
        0.0
    } else if w <= tol {
        f64::INFINITY
    } else {
        b / w
    }
}

pub fn separability_score(table: &AggregationTable) -> Result<SeparabilityScore, AggregationError> {
    let groups: Vec<Vec<(f64, u64)>> = table
        .series
        .iter()
        .map(|s| {
            s.cells
                .iter()
                .filter_map(|c| c.mean.map(|m| (m, c.count)))
                .collect::<Vec<_>>()
        })
        .filter(|g: &Vec<(f64, u64)>| !g.is_empty())
        .collect();
    let hue = table.hue_name.clone().unwrap_or_default();
    if groups.len() < 2 {
        return Err(AggregationError::TooFewSeries {
            hue,
            found: groups.len(),
        });
    }
    Ok(SeparabilityScore {
        hue_name: hue,
        score: variance_ratio(&groups),
        series_count: groups.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedCandidate {
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HueRanking {
    pub ranked: Vec<SeparabilityScore>,
    pub excluded: Vec<ExcludedCandidate>,
}

/// Scores every usable candidate as a hue over `x_col` and sorts them:
/// descending score, then fewer series, then name.
pub fn rank_hues(
    dataset: &Dataset,
    x_col: &str,
    target: &str,
    candidates: &[&str],
) -> Result<HueRanking, AggregationError> {
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    let mut exclude = |column: &str, reason: &str| {
        excluded.push(ExcludedCandidate {
            column: column.to_string(),
            reason: reason.to_string(),
        })
    };
    for &cand in candidates {
        if cand == x_col {
            exclude(cand, "x column");
            continue;
        }
        if cand == target {
            exclude(cand, "target column");
            continue;
        }
        let col = dataset.column(cand)?;
        match col.kind() {
            ColumnKind::Identifier => {
                exclude(cand, "identifier");
                continue;
            }
            ColumnKind::Timestamp => {
                exclude(cand, "timestamp");
                continue;
            }
            ColumnKind::Continuous => {
                exclude(cand, "continuous; bin it first");
                continue;
            }
            _ => {}
        }
        if col.schema().distinct_count < 2 {
            exclude(cand, "constant");
            continue;
        }
        let table = hue_aggregate(dataset, x_col, cand, target)?;
        ranked.push(separability_score(&table)?);
    }
    if ranked.is_empty() {
        return Err(AggregationError::EmptyCandidates);
    }
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.series_count.cmp(&b.series_count))
            .then_with(|| a.hue_name.cmp(&b.hue_name))
    });
    Ok(HueRanking { ranked, excluded })
}

/// Splits a crowded table into tables of at most `max_series` series each,
/// keeping every x value and the original series order.
pub fn partition_series(table: &AggregationTable, max_series: usize) -> Vec<AggregationTable> {
    let max_series = max_series.max(1);
    if table.series.len() <= max_series {
        return vec![table.clone()];
    }
    table
        .series
        .chunks(max_series)
        .map(|chunk| AggregationTable {
            series: chunk.to_vec(),
            ..table.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: Vec<(&str, ColumnKind, Vec<&str>)>) -> Dataset {
        Dataset::new(
            cols.into_iter()
                .map(|(n, k, v)| Column::from_raw(n, k, &v))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn group_mean_by_month() {
        let d = ds(vec![
            ("month", ColumnKind::Categorical, vec!["4", "4", "5"]),
            ("c", ColumnKind::Continuous, vec!["10", "20", "30"]),
        ]);
        let g = group_mean(&d, "month", "c").unwrap();
        assert_eq!(
            g,
            [
                GroupStat { key: "4".into(), mean: 15.0, count: 2 },
                GroupStat { key: "5".into(), mean: 30.0, count: 1 },
            ]
        );
    }

    #[test]
    fn group_mean_single_row_and_single_key() {
        let d = ds(vec![
            ("k", ColumnKind::Categorical, vec!["a"]),
            ("c", ColumnKind::Continuous, vec!["7.5"]),
        ]);
        assert_eq!(group_mean(&d, "k", "c").unwrap()[0].mean, 7.5);
        let d = ds(vec![
            ("k", ColumnKind::Categorical, vec!["a", "a", "a"]),
            ("c", ColumnKind::Continuous, vec!["1", "2", "6"]),
        ]);
        assert_eq!(group_mean(&d, "k", "c").unwrap()[0].mean, 3.0);
    }

    #[test]
    fn keys_sort_numerically_and_by_weekday() {
        let d = ds(vec![
            ("h", ColumnKind::Categorical, vec!["10", "9", "2"]),
            ("day", ColumnKind::Categorical, vec!["Sunday", "Monday", "Friday"]),
            ("c", ColumnKind::Continuous, vec!["1", "2", "3"]),
        ]);
        let keys: Vec<_> = group_mean(&d, "h", "c").unwrap().into_iter().map(|g| g.key).collect();
        assert_eq!(keys, ["2", "9", "10"]);
        let keys: Vec<_> = group_mean(&d, "day", "c").unwrap().into_iter().map(|g| g.key).collect();
        assert_eq!(keys, ["Monday", "Friday", "Sunday"]);
    }

    #[test]
    fn wrong_kinds_are_rejected() {
        let d = ds(vec![
            ("k", ColumnKind::Continuous, vec!["1"]),
            ("c", ColumnKind::Continuous, vec!["1"]),
            ("s", ColumnKind::Categorical, vec!["1"]),
        ]);
        assert!(matches!(
            group_mean(&d, "k", "c"),
            Err(AggregationError::Dataset(DatasetError::WrongKind { .. }))
        ));
        assert!(matches!(
            group_mean(&d, "s", "s"),
            Err(AggregationError::Dataset(DatasetError::WrongKind { .. }))
        ));
        assert!(matches!(
            group_mean(&d, "zz", "c"),
            Err(AggregationError::Dataset(DatasetError::UnknownColumn(_)))
        ));
        assert_eq!(
            hue_aggregate(&d, "s", "s", "c"),
            Err(AggregationError::SameColumn("s".into()))
        );
    }

    #[test]
    fn hue_table_marks_absent_cells() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["1", "1", "2"]),
            ("h", ColumnKind::Categorical, vec!["a", "b", "a"]),
            ("c", ColumnKind::Continuous, vec!["10", "20", "30"]),
        ]);
        let t = hue_aggregate(&d, "x", "h", "c").unwrap();
        assert_eq!(t.x_values, ["1", "2"]);
        assert_eq!(t.series[1].name, "b");
        assert_eq!(t.series[1].cells[1], Cell { mean: None, count: 0 });
        assert_eq!(t.x_counts(), [2, 1]);
        assert_eq!(t.means_csv(), "x,a,b\n1,10.000,20.000\n2,30.000,\n");
        assert_eq!(t.counts_csv(), "x,a,b\n1,1,1\n2,1,0\n");
    }

    #[test]
    fn single_category_hue_equals_group_mean() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["1", "1", "2"]),
            ("h", ColumnKind::Categorical, vec!["a", "a", "a"]),
            ("c", ColumnKind::Continuous, vec!["10", "20", "30"]),
        ]);
        let t = hue_aggregate(&d, "x", "h", "c").unwrap();
        assert_eq!(t.collapsed(), group_mean(&d, "x", "c").unwrap());
        assert_eq!(t.series.len(), 1);
    }

    #[test]
    fn combine_full_grid() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["0", "0", "1", "1"]),
            ("y", ColumnKind::Categorical, vec!["0", "1", "0", "1"]),
        ]);
        let (out, name) = combine_categories_named(&d, &["x", "y"]).unwrap();
        assert_eq!(name, "x+y");
        assert_eq!(out.column("x+y").unwrap().categories(), ["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
    }

    #[test]
    fn combine_keeps_observed_pairs_only() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["1", "0", "1"]),
            ("y", ColumnKind::Categorical, vec!["1", "0", "1"]),
        ]);
        let out = combine_categories(&d, &["x", "y"]).unwrap();
        assert_eq!(out.column("x+y").unwrap().categories(), ["(0,0)", "(1,1)"]);
        let c = ds(vec![
            ("x", ColumnKind::Categorical, vec!["0", "1", "2"]),
            ("y", ColumnKind::Categorical, vec!["5", "5", "5"]),
        ]);
        let out = combine_categories(&c, &["x", "y"]).unwrap();
        assert_eq!(out.column("x+y").unwrap().schema().distinct_count, 3);
    }

    #[test]
    fn combine_orders_by_tuple_not_by_text() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["10", "2", "2"]),
            ("y", ColumnKind::Categorical, vec!["0", "10", "9"]),
        ]);
        let out = combine_categories(&d, &["x", "y"]).unwrap();
        assert_eq!(out.column("x+y").unwrap().categories(), ["(2,9)", "(2,10)", "(10,0)"]);
    }

    #[test]
    fn combine_rejects_bad_input() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["0"]),
            ("v", ColumnKind::Continuous, vec!["0.5"]),
        ]);
        assert!(matches!(
            combine_categories(&d, &["x"]),
            Err(AggregationError::TooFewColumns { .. })
        ));
        assert!(matches!(
            combine_categories(&d, &["x", "v"]),
            Err(AggregationError::Dataset(DatasetError::WrongKind { .. }))
        ));
    }

    #[test]
    fn pivot_two_by_two() {
        let d = ds(vec![
            ("month", ColumnKind::Categorical, vec!["4", "4", "4", "4", "5", "5", "5", "5"]),
            ("x", ColumnKind::Categorical, vec!["0", "0", "1", "1", "0", "0", "1", "1"]),
            ("y", ColumnKind::Categorical, vec!["0", "0", "1", "1", "0", "0", "1", "1"]),
            ("c", ColumnKind::Continuous, vec!["10", "20", "30", "50", "1", "3", "5", "9"]),
        ]);
        let p = pivot_table(&d, "month", &["x", "y"], "c").unwrap();
        assert_eq!(p.row_values, ["4", "5"]);
        assert_eq!(p.col_labels, ["(0,0)", "(1,1)"]);
        let means: Vec<Vec<f64>> = p
            .cells
            .iter()
            .map(|r| r.iter().map(|c| c.mean.unwrap()).collect())
            .collect();
        assert_eq!(means, [[15.0, 40.0], [2.0, 7.0]]);
        assert_eq!(p.means_csv(), "month,\"(0,0)\",\"(1,1)\"\n4,15.000,40.000\n5,2.000,7.000\n");
    }

    #[test]
    fn pivot_absent_combo_has_zero_count() {
        let d = ds(vec![
            ("m", ColumnKind::Categorical, vec!["4", "5"]),
            ("x", ColumnKind::Categorical, vec!["0", "1"]),
            ("y", ColumnKind::Categorical, vec!["0", "0"]),
            ("c", ColumnKind::Continuous, vec!["1", "2"]),
        ]);
        let p = pivot_table(&d, "m", &["x", "y"], "c").unwrap();
        assert_eq!(p.cells[0][1], Cell { mean: None, count: 0 });
        assert_eq!(p.cells[1][0], Cell { mean: None, count: 0 });
    }

    fn table(series: &[&[f64]]) -> AggregationTable {
        let n = series[0].len();
        AggregationTable {
            x_name: "x".into(),
            y_name: "y".into(),
            x_values: (0..n).map(|i| i.to_string()).collect(),
            hue_name: Some("h".into()),
            series: series
                .iter()
                .enumerate()
                .map(|(i, s)| HueSeries {
                    name: i.to_string(),
                    cells: s.iter().map(|&m| Cell { mean: Some(m), count: 3 }).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn identical_series_score_zero() {
        let s = separability_score(&table(&[&[0.1, 0.1, 0.1], &[0.1, 0.1, 0.1]])).unwrap();
        assert_eq!(s.score, 0.0);
        let s = separability_score(&table(&[&[1.0, 2.0], &[1.0, 2.0]])).unwrap();
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn flat_distinct_series_score_infinite() {
        let s = separability_score(&table(&[&[30.0, 30.0], &[60.0, 60.0]])).unwrap();
        assert!(s.score.is_infinite());
        assert_eq!(s.series_count, 2);
    }

    #[test]
    fn score_matches_hand_computation() {
        // series A: 1, 3 (mean 2, var 1); series B: 5, 7 (mean 6, var 1)
        // grand mean 4, B = 4, W = 1
        let s = separability_score(&table(&[&[1.0, 3.0], &[5.0, 7.0]])).unwrap();
        assert!((s.score - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_series_is_too_few() {
        assert!(matches!(
            separability_score(&table(&[&[1.0]])),
            Err(AggregationError::TooFewSeries { found: 1, .. })
        ));
    }

    #[test]
    fn score_serializes_infinity_as_text() {
        let s = SeparabilityScore {
            hue_name: "h".into(),
            score: f64::INFINITY,
            series_count: 2,
        };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"hue_name":"h","score":"inf","series_count":2}"#
        );
    }

    #[test]
    fn ranking_excludes_and_orders() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["1", "2", "1", "2"]),
            ("good", ColumnKind::BinaryFlag, vec!["0", "0", "1", "1"]),
            ("noise", ColumnKind::BinaryFlag, vec!["0", "1", "1", "0"]),
            ("const", ColumnKind::Categorical, vec!["k", "k", "k", "k"]),
            ("id", ColumnKind::Identifier, vec!["0", "1", "2", "3"]),
            ("c", ColumnKind::Continuous, vec!["10", "11", "50", "52"]),
        ]);
        let r = rank_hues(&d, "x", "c", &["noise", "good", "const", "id", "x", "c"]).unwrap();
        let names: Vec<_> = r.ranked.iter().map(|s| s.hue_name.as_str()).collect();
        assert_eq!(names, ["good", "noise"]);
        let excl: Vec<_> = r.excluded.iter().map(|e| e.column.as_str()).collect();
        assert_eq!(excl, ["const", "id", "x", "c"]);
        assert_eq!(
            rank_hues(&d, "x", "c", &["const"]),
            Err(AggregationError::EmptyCandidates)
        );
        assert_eq!(rank_hues(&d, "x", "c", &[]), Err(AggregationError::EmptyCandidates));
    }

    #[test]
    fn ranking_ties_prefer_fewer_series_then_name() {
        let d = ds(vec![
            ("x", ColumnKind::Categorical, vec!["1", "1", "1", "1"]),
            ("b", ColumnKind::Categorical, vec!["p", "p", "q", "q"]),
            ("a", ColumnKind::Categorical, vec!["p", "p", "q", "q"]),
            ("m", ColumnKind::Categorical, vec!["p", "p", "q", "r"]),
            ("c", ColumnKind::Continuous, vec!["1", "1", "5", "5"]),
        ]);
        let r = rank_hues(&d, "x", "c", &["m", "b", "a"]).unwrap();
        let names: Vec<_> = r.ranked.iter().map(|s| s.hue_name.as_str()).collect();
        // all infinite: two-series hues first, alphabetical among them
        assert_eq!(names, ["a", "b", "m"]);
    }

    #[test]
    fn partition_sizes() {
        let cats: Vec<f64> = vec![1.0; 2];
        let many: Vec<&[f64]> = (0..31).map(|_| cats.as_slice()).collect();
        let t = table(&many);
        let parts = partition_series(&t, 12);
        let sizes: Vec<_> = parts.iter().map(|p| p.series.len()).collect();
        assert_eq!(sizes, [12, 12, 7]);
        let joined: Vec<HueSeries> = parts.iter().flat_map(|p| p.series.clone()).collect();
        assert_eq!(joined, t.series);
        assert!(parts.iter().all(|p| p.x_values == t.x_values));

        let five: Vec<&[f64]> = (0..5).map(|_| cats.as_slice()).collect();
        assert_eq!(partition_series(&table(&five), 12), vec![table(&five)]);
        assert_eq!(partition_series(&table(&five), 1).len(), 5);
    }
}
