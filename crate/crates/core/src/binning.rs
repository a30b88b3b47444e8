//! Sturges-rule binning of continuous columns into interval categories.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{format_fixed3, Column, ColumnKind, Dataset, DatasetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BinningError {
    #[error("bin count needs a positive instance count, got {0}")]
    NonPositive(u64),
    #[error("invalid range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("edges must be finite and strictly ascending")]
    InvalidEdges,
    #[error("value {0} lies outside the bin edges")]
    OutOfRange(f64),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// `ceil(1 + log2 n)`, computed from the bit length of `n - 1` so exact
/// powers of two land on the right side.
pub fn sturges_bin_count(n: u64) -> Result<u32, BinningError> {
    match n {
        0 => Err(BinningError::NonPositive(n)),
        1 => Ok(1),
        _ => Ok(1 + (u64::BITS - (n - 1).leading_zeros())),
    }
}

/// `k + 1` equally spaced edges from `min` to `max`. A zero-width range
/// becomes the single bin `[min, min + 1]`.
pub fn equal_width_edges(min: f64, max: f64, k: u32) -> Result<Vec<f64>, BinningError> {
    if !(min.is_finite() && max.is_finite()) || min > max || k == 0 {
        return Err(BinningError::InvalidRange { min, max });
    }
    if min == max {
        return Ok(vec![min, min + 1.0]);
    }
    let width = max - min;
    let mut edges: Vec<f64> = (0..=k)
        .map(|i| min + f64::from(i) * width / f64::from(k))
        .collect();
    edges[k as usize] = max;
    Ok(edges)
}

/// Interval bins with their legend labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    edges: Vec<f64>,
    labels: Vec<String>,
}

impl BinSpec {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self, BinningError> {
        if edges.len() < 2
            || edges.iter().any(|e| !e.is_finite())
            || edges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(BinningError::InvalidEdges);
        }
        let last = edges.len() - 2;
        let labels = edges
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let close = if i == last { ']' } else { ')' };
                format!("[{}, {}{close}", format_fixed3(w[0]), format_fixed3(w[1]))
            })
            .collect();
        Ok(BinSpec { edges, labels })
    }

    /// Sturges bins over `values`, with `n_instances` as the rule's N.
    ///
    /// When the range is so narrow that 3-decimal labels would collide, the
    /// bin count is lowered until every label is distinct.
    pub fn sturges(values: &[f64], n_instances: u64) -> Result<Self, BinningError> {
        let (min, max) = min_max(values).ok_or(BinningError::NonPositive(0))?;
        let mut k = sturges_bin_count(n_instances)?;
        loop {
            let spec = Self::from_edges(equal_width_edges(min, max, k)?);
            match spec {
                Ok(spec) if spec.labels_unique() => return Ok(spec),
                _ if k > 1 => k -= 1,
                Ok(spec) => return Ok(spec),
                Err(e) => return Err(e),
            }
        }
    }

    fn labels_unique(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.labels.iter().all(|l| seen.insert(l))
    }

    pub fn count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Bin of `v`: half-open `[lo, hi)` except the last bin, which is closed.
    pub fn bin_index(&self, v: f64) -> Result<usize, BinningError> {
        let first = self.edges[0];
        let last = *self.edges.last().unwrap();
        if !(v >= first && v <= last) {
            return Err(BinningError::OutOfRange(v));
        }
        let idx = self.edges.partition_point(|&e| e <= v) - 1;
        Ok(idx.min(self.count() - 1))
    }
}

fn min_max(values: &[f64]) -> Option<(f64, f64)> {
    values.iter().fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Label of each value under `spec`.
pub fn apply_bins<'a>(values: &[f64], spec: &'a BinSpec) -> Result<Vec<&'a str>, BinningError> {
    values
        .iter()
        .map(|&v| spec.bin_index(v).map(|i| spec.labels[i].as_str()))
        .collect()
}

/// Adds `<column>_bin`, a categorical column of Sturges interval labels, with
/// N taken as the dataset's row count. Categories keep interval order.
pub fn bin_column(dataset: &Dataset, column: &str) -> Result<(Dataset, String, BinSpec), BinningError> {
    let col = dataset.column_of_kind(column, &[ColumnKind::Continuous])?;
    let values = col.numbers()?;
    let spec = BinSpec::sturges(&values, dataset.row_count() as u64)?;
    let codes = values
        .iter()
        .map(|&v| spec.bin_index(v).map(|i| Some(i as u32)))
        .collect::<Result<Vec<_>, _>>()?;
    let name = dataset.unique_name(&format!("{column}_bin"), "");
    let binned = Column::from_codes_in_order(name.clone(), ColumnKind::Categorical, spec.labels.clone(), codes);
    Ok((dataset.with_column(binned)?, name, spec))
}
