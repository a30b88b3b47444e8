use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::temporal::TimeFormat;

use super::{infer_schema_with, Column, ColumnKind, Dataset, DatasetError};

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Kinds forced for specific columns; everything else is inferred.
    pub type_hints: BTreeMap<String, ColumnKind>,
    pub time_format: TimeFormat,
    pub sample_limit: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            has_header: true,
            type_hints: BTreeMap::new(),
            time_format: TimeFormat::default(),
            sample_limit: 10_000,
        }
    }
}

impl LoadOptions {
    pub fn hint(mut self, column: impl Into<String>, kind: ColumnKind) -> Self {
        self.type_hints.insert(column.into(), kind);
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DatasetError::FileNotFound(path.display().to_string()),
        _ => DatasetError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        },
    })?;
    read_csv(file, options)
}

/// Reads CSV from any source. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, options: &LoadOptions) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut header: Option<Vec<String>> = None;
    if options.has_header {
        match records.next() {
            None => return Err(DatasetError::EmptyInput),
            Some(r) => {
                let r = r.map_err(|e| malformed(0, e))?;
                header = Some(r.iter().map(|s| s.to_string()).collect());
            }
        }
    }

    let mut raw: Vec<Vec<String>> = Vec::new();
    let mut width = header.as_ref().map(Vec::len);
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| malformed(row, e))?;
        let expected = *width.get_or_insert(rec.len());
        if raw.is_empty() {
            raw = vec![Vec::new(); expected];
        }
        if rec.len() != expected {
            return Err(DatasetError::MalformedCsv {
                row,
                reason: format!("expected {expected} fields, found {}", rec.len()),
            });
        }
        for (col, field) in raw.iter_mut().zip(rec.iter()) {
            col.push(field.to_string());
        }
    }
    if raw.first().is_none_or(Vec::is_empty) {
        return Err(DatasetError::EmptyInput);
    }

    let names = header.unwrap_or_else(|| (1..=raw.len()).map(|i| format!("column_{i}")).collect());
    let columns: Vec<Column> = names
        .iter()
        .zip(&raw)
        .map(|(name, values)| Column::from_raw(name.clone(), ColumnKind::Categorical, values))
        .collect();
    let untyped = Dataset::with_time_format(columns, options.time_format.clone()).map_err(
        |e| match e {
            DatasetError::DuplicateColumn(c) => DatasetError::MalformedCsv {
                row: 0,
                reason: format!("duplicate column name `{c}`"),
            },
            other => other,
        },
    )?;
    for hinted in options.type_hints.keys() {
        untyped.column(hinted)?;
    }

    let kinds: Vec<(String, ColumnKind)> =
        infer_schema_with(&untyped, options.sample_limit, &options.time_format)
            .into_iter()
            .map(|s| {
                let kind = options.type_hints.get(&s.name).copied().unwrap_or(s.kind);
                (s.name, kind)
            })
            .collect();
    untyped.with_kinds(&kinds)
}

fn malformed(row: usize, e: csv::Error) -> DatasetError {
    DatasetError::MalformedCsv {
        row,
        reason: e.to_string(),
    }
}

/// Writes the dataset as RFC-4180 CSV with a header row. Nulls are empty fields.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<(), DatasetError> {
    let io = |e: csv::Error| DatasetError::Io {
        path: "<csv output>".to_string(),
        reason: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let cols: Vec<&Column> = dataset.columns().collect();
    w.write_record(cols.iter().map(|c| c.name())).map_err(io)?;
    for row in 0..dataset.row_count() {
        w.write_record(cols.iter().map(|c| c.value(row).unwrap_or("")))
            .map_err(io)?;
    }
    w.flush().map_err(|e| DatasetError::Io {
        path: "<csv output>".to_string(),
        reason: e.to_string(),
    })
}
