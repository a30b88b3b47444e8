//! Typed, immutable tables.
//!
//! Every column is stored dictionary-encoded: the distinct non-null values
//! live once in `categories` (kept in canonical category order) and each row
//! holds an index into that list. Raw cell text is preserved exactly, so a
//! continuous column can still report values that fail to parse, and
//! re-serialising a freshly loaded table reproduces its input.

mod clean;
mod csv_io;
mod order;
mod schema;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::temporal::TimeFormat;

pub use clean::{
    impute, validate, CleanReport, ColumnCleanReport, ContinuousStrategy, CategoricalStrategy,
    ImputeEntry, ImputeLog, ImputePolicy, TimestampStrategy,
};
pub use csv_io::{load_csv, read_csv, write_csv, LoadOptions};
pub use order::{canonical_cmp, sort_canonical};
pub use schema::{infer_schema, infer_schema_with, INTEGER_CATEGORY_LIMIT};

/// Cell spellings treated as missing. Case-sensitive.
pub const NULL_SPELLINGS: [&str; 5] = ["", "NULL", "null", "NaN", "NA"];

pub fn is_null_spelling(s: &str) -> bool {
    NULL_SPELLINGS.contains(&s)
}

/// Parses a finite decimal number. `inf`/`nan` spellings are rejected.
pub fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        // drop the sign of negative zero
        return "0".to_string();
    }
    format!("{v}")
}

/// Fixed three-fractional-digit rendering used for means in tables and labels.
pub fn format_fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("malformed CSV at row {row}: {reason}")]
    MalformedCsv { row: usize, reason: String },
    #[error("input has no data rows")]
    EmptyInput,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` has kind {found}, expected {expected}")]
    WrongKind {
        column: String,
        expected: String,
        found: ColumnKind,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column `{column}` has {found} rows, expected {expected}")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("column `{0}` has no usable values to impute from")]
    ImputationImpossible(String),
    #[error("column `{0}` has missing values and its imputation strategy is `fail`")]
    PolicyFail(String),
    #[error("column `{column}` row {row}: value `{value}` is not valid for kind {kind}")]
    InvalidValue {
        column: String,
        row: usize,
        value: String,
        kind: ColumnKind,
    },
    #[error("column `{column}` row {row} is null")]
    NullValue { column: String, row: usize },
    #[error("I/O error on {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Identifier,
    Timestamp,
    Categorical,
    Continuous,
    BinaryFlag,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Identifier => "identifier",
            ColumnKind::Timestamp => "timestamp",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Continuous => "continuous",
            ColumnKind::BinaryFlag => "binary_flag",
        }
    }

    /// Kinds whose values can serve as grouping keys.
    pub fn is_grouping(self) -> bool {
        matches!(self, ColumnKind::Categorical | ColumnKind::BinaryFlag)
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ColumnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identifier" => Ok(ColumnKind::Identifier),
            "timestamp" => Ok(ColumnKind::Timestamp),
            "categorical" => Ok(ColumnKind::Categorical),
            "continuous" => Ok(ColumnKind::Continuous),
            "binary_flag" | "binary" => Ok(ColumnKind::BinaryFlag),
            other => Err(format!("unknown column kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub null_count: usize,
    pub distinct_count: usize,
}

/// One dictionary-encoded column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    schema: ColumnSchema,
    categories: Vec<String>,
    codes: Vec<Option<u32>>,
}

impl Column {
    /// Builds a column from raw cell text. Null spellings become nulls and
    /// categories are sorted canonically.
    pub fn from_raw<S: AsRef<str>>(name: impl Into<String>, kind: ColumnKind, values: &[S]) -> Self {
        let cells: Vec<Option<&str>> = values
            .iter()
            .map(|v| {
                let v = v.as_ref();
                (!is_null_spelling(v)).then_some(v)
            })
            .collect();
        Self::from_cells(name, kind, &cells)
    }

    /// Builds a column from already-classified cells (`None` = null).
    pub fn from_cells<S: AsRef<str>>(
        name: impl Into<String>,
        kind: ColumnKind,
        cells: &[Option<S>],
    ) -> Self {
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut categories: Vec<String> = Vec::new();
        let codes = cells
            .iter()
            .map(|c| {
                c.as_ref().map(|s| {
                    let s = s.as_ref();
                    *index.entry(s).or_insert_with(|| {
                        categories.push(s.to_string());
                        (categories.len() - 1) as u32
                    })
                })
            })
            .collect();
        Self::assemble(name.into(), kind, categories, codes, None)
    }

    /// Builds a column whose category order follows `order` rather than the
    /// canonical sort. Values missing from `order` are appended canonically.
    pub fn from_cells_ordered<S: AsRef<str>>(
        name: impl Into<String>,
        kind: ColumnKind,
        cells: &[Option<S>],
        order: &[String],
    ) -> Self {
        let col = Self::from_cells(name, kind, cells);
        col.reordered(order)
    }

    /// Low-level constructor from a dictionary and codes. Unused categories
    /// are dropped and the rest sorted canonically.
    pub fn from_codes(
        name: impl Into<String>,
        kind: ColumnKind,
        categories: Vec<String>,
        codes: Vec<Option<u32>>,
    ) -> Self {
        let (categories, codes) = dedupe(categories, codes);
        Self::assemble(name.into(), kind, categories, codes, None)
    }

    /// Like [`Column::from_codes`] but keeps the given category order
    /// (first occurrence wins for repeated labels).
    pub fn from_codes_in_order(
        name: impl Into<String>,
        kind: ColumnKind,
        categories: Vec<String>,
        codes: Vec<Option<u32>>,
    ) -> Self {
        let (categories, codes) = dedupe(categories, codes);
        let order: Vec<usize> = (0..categories.len()).collect();
        Self::assemble(name.into(), kind, categories, codes, Some(order))
    }

    fn assemble(
        name: String,
        kind: ColumnKind,
        categories: Vec<String>,
        codes: Vec<Option<u32>>,
        explicit_order: Option<Vec<usize>>,
    ) -> Self {
        let (categories, codes) = if kind == ColumnKind::BinaryFlag {
            normalize_binary(categories, codes)
        } else {
            (categories, codes)
        };
        let mut used = vec![false; categories.len()];
        for c in codes.iter().flatten() {
            used[*c as usize] = true;
        }
        let mut order: Vec<usize> = match explicit_order {
            Some(o) if o.len() == categories.len() => o,
            _ => {
                let mut o: Vec<usize> = (0..categories.len()).collect();
                o.sort_by(|&a, &b| canonical_cmp(&categories[a], &categories[b]));
                o
            }
        };
        order.retain(|&i| used[i]);
        let mut remap = vec![u32::MAX; categories.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let mut categories = categories;
        let new_categories: Vec<String> = order
            .iter()
            .map(|&i| std::mem::take(&mut categories[i]))
            .collect();
        let codes: Vec<Option<u32>> = codes
            .into_iter()
            .map(|c| c.map(|c| remap[c as usize]))
            .collect();
        let null_count = codes.iter().filter(|c| c.is_none()).count();
        Column {
            schema: ColumnSchema {
                name,
                kind,
                null_count,
                distinct_count: new_categories.len(),
            },
            categories: new_categories,
            codes,
        }
    }

    fn reordered(self, order: &[String]) -> Self {
        let mut pos: Vec<usize> = Vec::with_capacity(self.categories.len());
        let mut seen = vec![false; self.categories.len()];
        let lookup: HashMap<&str, usize> = self
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        for o in order {
            if let Some(&i) = lookup.get(o.as_str()) {
                if !seen[i] {
                    seen[i] = true;
                    pos.push(i);
                }
            }
        }
        // leftovers keep their canonical positions
        pos.extend((0..self.categories.len()).filter(|&i| !seen[i]));
        let Column {
            schema,
            categories,
            codes,
        } = self;
        Self::assemble(schema.name, schema.kind, categories, codes, Some(pos))
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn kind(&self) -> ColumnKind {
        self.schema.kind
    }

    pub fn schema(&self) -> &ColumnSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Distinct non-null values in canonical order.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Per-row index into [`Column::categories`].
    pub fn codes(&self) -> &[Option<u32>] {
        &self.codes
    }

    pub fn value(&self, row: usize) -> Option<&str> {
        self.codes[row].map(|c| self.categories[c as usize].as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<&str>> + '_ {
        self.codes
            .iter()
            .map(move |c| c.map(|c| self.categories[c as usize].as_str()))
    }

    /// Same values under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        let mut c = self.clone();
        c.schema.name = name.into();
        c
    }

    /// Same values reinterpreted under another kind.
    pub fn with_kind(&self, kind: ColumnKind) -> Self {
        if kind == self.kind() {
            return self.clone();
        }
        let order: Vec<usize> = (0..self.categories.len()).collect();
        Self::assemble(
            self.schema.name.clone(),
            kind,
            self.categories.clone(),
            self.codes.clone(),
            (kind != ColumnKind::BinaryFlag).then_some(order),
        )
    }

    /// Keeps only the listed rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Self {
        let codes = rows.iter().map(|&r| self.codes[r]).collect();
        let n = self.categories.len();
        Self::assemble(
            self.schema.name.clone(),
            self.schema.kind,
            self.categories.clone(),
            codes,
            Some((0..n).collect()),
        )
    }

    /// Numeric value of every category, `None` where a category does not parse.
    pub fn category_numbers(&self) -> Vec<Option<f64>> {
        self.categories.iter().map(|c| parse_number(c)).collect()
    }

    /// Dense numeric values. Fails on the first null or unparsable cell.
    pub fn numbers(&self) -> Result<Vec<f64>, DatasetError> {
        let nums = self.category_numbers();
        self.codes
            .iter()
            .enumerate()
            .map(|(row, c)| match c {
                None => Err(DatasetError::NullValue {
                    column: self.name().to_string(),
                    row,
                }),
                Some(c) => nums[*c as usize].ok_or_else(|| DatasetError::InvalidValue {
                    column: self.name().to_string(),
                    row,
                    value: self.categories[*c as usize].clone(),
                    kind: self.kind(),
                }),
            })
            .collect()
    }

    /// Dense category codes. Fails on the first null.
    pub fn dense_codes(&self) -> Result<Vec<u32>, DatasetError> {
        self.codes
            .iter()
            .enumerate()
            .map(|(row, c)| {
                c.ok_or_else(|| DatasetError::NullValue {
                    column: self.name().to_string(),
                    row,
                })
            })
            .collect()
    }
}

/// Merges repeated dictionary entries, keeping first-occurrence order.
fn dedupe(categories: Vec<String>, codes: Vec<Option<u32>>) -> (Vec<String>, Vec<Option<u32>>) {
    let mut index: HashMap<&str, u32> = HashMap::with_capacity(categories.len());
    let mut remap = Vec::with_capacity(categories.len());
    let mut keep = Vec::with_capacity(categories.len());
    for (i, c) in categories.iter().enumerate() {
        let next = index.len() as u32;
        let id = *index.entry(c.as_str()).or_insert(next);
        if id == next {
            keep.push(i);
        }
        remap.push(id);
    }
    if keep.len() == categories.len() {
        return (categories, codes);
    }
    let mut categories = categories;
    let unique = keep.iter().map(|&i| std::mem::take(&mut categories[i])).collect();
    let codes = codes.into_iter().map(|c| c.map(|c| remap[c as usize])).collect();
    (unique, codes)
}

fn normalize_binary(
    categories: Vec<String>,
    codes: Vec<Option<u32>>,
) -> (Vec<String>, Vec<Option<u32>>) {
    // "1.0", "1", "+1" all collapse onto "1"; anything else is kept verbatim
    // so that validation can count it.
    let mut out: Vec<String> = Vec::new();
    let mut remap = Vec::with_capacity(categories.len());
    for c in &categories {
        let canon = match parse_number(c) {
            Some(0.0) => "0".to_string(),
            Some(1.0) => "1".to_string(),
            _ => c.clone(),
        };
        let idx = match out.iter().position(|o| *o == canon) {
            Some(i) => i,
            None => {
                out.push(canon);
                out.len() - 1
            }
        };
        remap.push(idx as u32);
    }
    let codes = codes
        .into_iter()
        .map(|c| c.map(|c| remap[c as usize]))
        .collect();
    (out, codes)
}

/// An immutable table. Columns are shared between derived datasets.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Arc<Column>>,
    row_count: usize,
    time_format: TimeFormat,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.row_count == other.row_count
            && self.time_format == other.time_format
            && self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.as_ref() == b.as_ref())
    }
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self, DatasetError> {
        Self::with_time_format(columns, TimeFormat::default())
    }

    pub fn with_time_format(
        columns: Vec<Column>,
        time_format: TimeFormat,
    ) -> Result<Self, DatasetError> {
        let row_count = columns.first().map_or(0, Column::len);
        let mut names = BTreeSet::new();
        for c in &columns {
            if !names.insert(c.name().to_string()) {
                return Err(DatasetError::DuplicateColumn(c.name().to_string()));
            }
            if c.len() != row_count {
                return Err(DatasetError::LengthMismatch {
                    column: c.name().to_string(),
                    expected: row_count,
                    found: c.len(),
                });
            }
        }
        Ok(Dataset {
            columns: columns.into_iter().map(Arc::new).collect(),
            row_count,
            time_format,
        })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn time_format(&self) -> &TimeFormat {
        &self.time_format
    }

    pub fn columns(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().map(|c| c.as_ref())
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name()).collect()
    }

    pub fn schema(&self) -> Vec<ColumnSchema> {
        self.columns.iter().map(|c| c.schema().clone()).collect()
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.name() == name)
    }

    pub fn column(&self, name: &str) -> Result<&Column, DatasetError> {
        self.columns
            .iter()
            .find(|c| c.name() == name)
            .map(|c| c.as_ref())
            .ok_or_else(|| DatasetError::UnknownColumn(name.to_string()))
    }

    /// Column lookup that also checks the kind.
    pub fn column_of_kind(
        &self,
        name: &str,
        accept: &[ColumnKind],
    ) -> Result<&Column, DatasetError> {
        let col = self.column(name)?;
        if accept.contains(&col.kind()) {
            Ok(col)
        } else {
            Err(DatasetError::WrongKind {
                column: name.to_string(),
                expected: accept
                    .iter()
                    .map(|k| k.as_str())
                    .collect::<Vec<_>>()
                    .join(" or "),
                found: col.kind(),
            })
        }
    }

    /// New dataset with `column` appended.
    pub fn with_column(&self, column: Column) -> Result<Self, DatasetError> {
        self.with_columns(vec![column])
    }

    pub fn with_columns(&self, extra: Vec<Column>) -> Result<Self, DatasetError> {
        let mut names: BTreeSet<&str> = self.columns.iter().map(|c| c.name()).collect();
        for c in &extra {
            if !names.insert(c.name()) {
                return Err(DatasetError::DuplicateColumn(c.name().to_string()));
            }
            if c.len() != self.row_count {
                return Err(DatasetError::LengthMismatch {
                    column: c.name().to_string(),
                    expected: self.row_count,
                    found: c.len(),
                });
            }
        }
        let mut columns = self.columns.clone();
        columns.extend(extra.into_iter().map(Arc::new));
        Ok(Dataset {
            columns,
            row_count: self.row_count,
            time_format: self.time_format.clone(),
        })
    }

    /// New dataset where the named column is replaced.
    pub fn replace_column(&self, column: Column) -> Result<Self, DatasetError> {
        let idx = self
            .columns
            .iter()
            .position(|c| c.name() == column.name())
            .ok_or_else(|| DatasetError::UnknownColumn(column.name().to_string()))?;
        if column.len() != self.row_count {
            return Err(DatasetError::LengthMismatch {
                column: column.name().to_string(),
                expected: self.row_count,
                found: column.len(),
            });
        }
        let mut columns = self.columns.clone();
        columns[idx] = Arc::new(column);
        Ok(Dataset {
            columns,
            row_count: self.row_count,
            time_format: self.time_format.clone(),
        })
    }

    /// New dataset with the given per-column kinds applied.
    pub fn with_kinds(&self, kinds: &[(String, ColumnKind)]) -> Result<Self, DatasetError> {
        let mut out = self.clone();
        for (name, kind) in kinds {
            let col = out.column(name)?.with_kind(*kind);
            out = out.replace_column(col)?;
        }
        Ok(out)
    }

    /// New dataset restricted to `rows`, in that order.
    pub fn take_rows(&self, rows: &[usize]) -> Self {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Arc::new(c.take_rows(rows)))
                .collect(),
            row_count: rows.len(),
            time_format: self.time_format.clone(),
        }
    }

    /// A column name not yet used here: `base`, else `base{suffix}`, else
    /// `base{suffix}_2`, `base{suffix}_3`, ...
    pub fn unique_name(&self, base: &str, suffix: &str) -> String {
        if !self.has_column(base) {
            return base.to_string();
        }
        let stem = format!("{base}{suffix}");
        if !suffix.is_empty() && !self.has_column(&stem) {
            return stem;
        }
        (2..)
            .map(|i| format!("{stem}_{i}"))
            .find(|n| !self.has_column(n))
            .expect("unbounded search")
    }
}
