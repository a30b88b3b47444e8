use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::temporal::parse_timestamp;

use super::{format_number, parse_number, Column, ColumnKind, Dataset, DatasetError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCleanReport {
    pub name: String,
    pub kind: ColumnKind,
    pub null_count: usize,
    /// Non-null values that fail to parse under the column's kind.
    pub inconsistent_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanReport {
    pub total_rows: usize,
    pub columns: Vec<ColumnCleanReport>,
}

impl CleanReport {
    pub fn column(&self, name: &str) -> Option<&ColumnCleanReport> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn is_clean(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.null_count == 0 && c.inconsistent_count == 0)
    }
}

/// Per-category validity under the column's kind. Identifier duplicates are
/// counted separately because validity there is a property of the whole column.
fn category_validity(col: &Column, dataset: &Dataset) -> Vec<bool> {
    let cats = col.categories();
    match col.kind() {
        ColumnKind::Continuous => cats.iter().map(|c| parse_number(c).is_some()).collect(),
        ColumnKind::BinaryFlag => cats.iter().map(|c| c == "0" || c == "1").collect(),
        ColumnKind::Timestamp => cats
            .iter()
            .map(|c| parse_timestamp(c, dataset.time_format()).is_ok())
            .collect(),
        ColumnKind::Identifier | ColumnKind::Categorical => vec![true; cats.len()],
    }
}

fn category_frequencies(col: &Column) -> Vec<usize> {
    let mut freq = vec![0usize; col.categories().len()];
    for c in col.codes().iter().flatten() {
        freq[*c as usize] += 1;
    }
    freq
}

/// Counts nulls and kind violations per column. Pure.
pub fn validate(dataset: &Dataset) -> CleanReport {
    let columns = dataset
        .columns()
        .map(|col| {
            let valid = category_validity(col, dataset);
            let freq = category_frequencies(col);
            let mut inconsistent: usize = valid
                .iter()
                .zip(&freq)
                .filter(|(ok, _)| !**ok)
                .map(|(_, n)| n)
                .sum();
            if col.kind() == ColumnKind::Identifier {
                // every repeat of an identifier beyond its first occurrence
                inconsistent += freq.iter().map(|n| n.saturating_sub(1)).sum::<usize>();
            }
            ColumnCleanReport {
                name: col.name().to_string(),
                kind: col.kind(),
                null_count: col.schema().null_count,
                inconsistent_count: inconsistent,
            }
        })
        .collect();
    CleanReport {
        total_rows: dataset.row_count(),
        columns,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousStrategy {
    #[default]
    Mean,
    Median,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalStrategy {
    #[default]
    Mode,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimestampStrategy {
    #[default]
    DropRow,
    Fail,
}

/// How missing values are repaired. Binary flags follow the categorical
/// strategy; identifiers follow the timestamp (row-level) strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ImputePolicy {
    pub continuous_strategy: ContinuousStrategy,
    pub categorical_strategy: CategoricalStrategy,
    pub timestamp_strategy: TimestampStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ImputeEntry {
    Filled {
        column: String,
        row: usize,
        value: String,
    },
    DroppedRow {
        row: usize,
        column: String,
    },
}

/// Every repair made by [`impute`]. Rows are indices into the input dataset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImputeLog {
    pub entries: Vec<ImputeEntry>,
}

impl ImputeLog {
    pub fn dropped_rows(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, ImputeEntry::DroppedRow { .. }))
            .count()
    }

    pub fn filled_cells(&self) -> usize {
        self.entries.len() - self.dropped_rows()
    }
}

/// Rows whose value is null or invalid for the column's kind.
fn missing_rows(col: &Column, dataset: &Dataset) -> Vec<bool> {
    let valid = category_validity(col, dataset);
    col.codes()
        .iter()
        .map(|c| c.is_none_or(|c| !valid[c as usize]))
        .collect()
}

/// Returns a null-free dataset plus a log of every fill and dropped row.
///
/// Values that fail their column's kind are treated exactly like nulls.
/// Fill statistics are computed over the rows that survive row dropping.
pub fn impute(dataset: &Dataset, policy: ImputePolicy) -> Result<(Dataset, ImputeLog), DatasetError> {
    let cols: Vec<&Column> = dataset.columns().collect();
    let missing: Vec<Vec<bool>> = cols.iter().map(|c| missing_rows(c, dataset)).collect();

    for (col, miss) in cols.iter().zip(&missing) {
        if !miss.is_empty() && miss.iter().all(|m| *m) {
            return Err(DatasetError::ImputationImpossible(col.name().to_string()));
        }
    }

    let mut log = ImputeLog::default();
    let mut drop = vec![false; dataset.row_count()];
    let mut drop_reason: Vec<Option<&str>> = vec![None; dataset.row_count()];
    for (col, miss) in cols.iter().zip(&missing) {
        if !matches!(col.kind(), ColumnKind::Timestamp | ColumnKind::Identifier) {
            continue;
        }
        if !miss.iter().any(|m| *m) {
            continue;
        }
        if policy.timestamp_strategy == TimestampStrategy::Fail {
            return Err(DatasetError::PolicyFail(col.name().to_string()));
        }
        for (row, m) in miss.iter().enumerate() {
            if *m && !drop[row] {
                drop[row] = true;
                drop_reason[row] = Some(col.name());
            }
        }
    }
    for (row, reason) in drop_reason.iter().enumerate() {
        if let Some(column) = reason {
            log.entries.push(ImputeEntry::DroppedRow {
                row,
                column: column.to_string(),
            });
        }
    }
    let kept: Vec<usize> = (0..dataset.row_count()).filter(|&r| !drop[r]).collect();
    if kept.is_empty() {
        return Err(DatasetError::EmptyInput);
    }

    let mut out_columns = Vec::with_capacity(cols.len());
    for (col, miss) in cols.iter().zip(&missing) {
        let gaps: Vec<usize> = kept.iter().copied().filter(|&r| miss[r]).collect();
        if gaps.is_empty() || matches!(col.kind(), ColumnKind::Timestamp | ColumnKind::Identifier) {
            out_columns.push(col.take_rows(&kept));
            continue;
        }
        let present = kept.iter().filter(|&&r| !miss[r]).map(|&r| col.value(r).unwrap());
        let fill = match col.kind() {
            ColumnKind::Continuous => {
                let values: Vec<f64> = present.map(|v| parse_number(v).unwrap()).collect();
                if values.is_empty() {
                    return Err(DatasetError::ImputationImpossible(col.name().to_string()));
                }
                match policy.continuous_strategy {
                    ContinuousStrategy::Fail => {
                        return Err(DatasetError::PolicyFail(col.name().to_string()))
                    }
                    ContinuousStrategy::Mean => format_number(mean(&values)),
                    ContinuousStrategy::Median => format_number(median(values)),
                }
            }
            _ => {
                if policy.categorical_strategy == CategoricalStrategy::Fail {
                    return Err(DatasetError::PolicyFail(col.name().to_string()));
                }
                mode(present).ok_or_else(|| DatasetError::ImputationImpossible(col.name().to_string()))?
            }
        };
        let gap_set: BTreeSet<usize> = gaps.iter().copied().collect();
        for &row in &gaps {
            log.entries.push(ImputeEntry::Filled {
                column: col.name().to_string(),
                row,
                value: fill.clone(),
            });
        }
        let cells: Vec<Option<&str>> = kept
            .iter()
            .map(|&r| {
                if gap_set.contains(&r) {
                    Some(fill.as_str())
                } else {
                    col.value(r)
                }
            })
            .collect();
        out_columns.push(Column::from_cells(col.name(), col.kind(), &cells));
    }

    let out = Dataset::with_time_format(out_columns, dataset.time_format().clone())?;
    Ok((out, log))
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Most frequent value; ties go to the lexicographically smallest.
fn mode<'a>(values: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut counts: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    // BTreeMap iterates ascending, and max_by_key keeps the last maximum,
    // so walk it in reverse to keep the smallest key on ties.
    counts
        .into_iter()
        .rev()
        .max_by_key(|(_, n)| *n)
        .map(|(v, _)| v.to_string())
}
