use crate::temporal::{parse_timestamp, TimeFormat};

use super::{parse_number, Column, ColumnKind, ColumnSchema, Dataset};

/// Integer-valued columns with at most this many distinct values (and
/// repeated values) are grouping keys, not magnitudes.
pub const INTEGER_CATEGORY_LIMIT: usize = 32;

/// Share of sampled non-null values that must parse as timestamps.
const TIMESTAMP_SHARE: f64 = 0.99;

/// Classifies every column using the dataset's own time format.
pub fn infer_schema(dataset: &Dataset, sample_limit: usize) -> Vec<ColumnSchema> {
    infer_schema_with(dataset, sample_limit, dataset.time_format())
}

/// Classifies every column.
///
/// Precedence is timestamp > binary flag > identifier > continuous >
/// categorical. Only the timestamp test is sampled (first `sample_limit`
/// rows); the others look at the full distinct-value set, which the
/// dictionary encoding makes cheap.
pub fn infer_schema_with(
    dataset: &Dataset,
    sample_limit: usize,
    format: &TimeFormat,
) -> Vec<ColumnSchema> {
    dataset
        .columns()
        .map(|col| ColumnSchema {
            name: col.name().to_string(),
            kind: infer_kind(col, dataset.row_count(), sample_limit.max(1), format),
            null_count: col.schema().null_count,
            distinct_count: col.schema().distinct_count,
        })
        .collect()
}

fn infer_kind(col: &Column, rows: usize, sample_limit: usize, format: &TimeFormat) -> ColumnKind {
    if col.categories().is_empty() {
        return ColumnKind::Categorical;
    }

    let sampled: Vec<&str> = col.iter().take(sample_limit).flatten().collect();
    if !sampled.is_empty() {
        let parsed = sampled
            .iter()
            .filter(|s| parse_timestamp(s, format).is_ok())
            .count();
        if parsed as f64 >= TIMESTAMP_SHARE * sampled.len() as f64 {
            return ColumnKind::Timestamp;
        }
    }

    let numbers: Option<Vec<f64>> = col.categories().iter().map(|c| parse_number(c)).collect();
    let Some(numbers) = numbers else {
        return ColumnKind::Categorical;
    };

    if numbers.iter().all(|&v| v == 0.0 || v == 1.0) {
        return ColumnKind::BinaryFlag;
    }

    let integral = col
        .categories()
        .iter()
        .all(|c| c.parse::<i64>().is_ok());
    let distinct = col.categories().len();
    if integral && distinct == rows && col.schema().null_count == 0 {
        let min = numbers.iter().copied().fold(f64::INFINITY, f64::min);
        let max = numbers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max - min + 1.0 == rows as f64 {
            return ColumnKind::Identifier;
        }
    }

    let integer_valued = numbers.iter().all(|v| v.fract() == 0.0);
    if integer_valued && distinct <= INTEGER_CATEGORY_LIMIT && distinct * 2 <= rows {
        return ColumnKind::Categorical;
    }
    ColumnKind::Continuous
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds_of(cols: Vec<(&str, Vec<&str>)>) -> Vec<ColumnKind> {
        let ds = Dataset::new(
            cols.into_iter()
                .map(|(n, v)| Column::from_raw(n, ColumnKind::Categorical, &v))
                .collect(),
        )
        .unwrap();
        infer_schema(&ds, 1000).into_iter().map(|s| s.kind).collect()
    }

    #[test]
    fn timestamp_column() {
        let v = vec!["1991-04-01 00:00:00"; 4];
        assert_eq!(kinds_of(vec![("time", v)]), [ColumnKind::Timestamp]);
    }

    #[test]
    fn binary_flag_column() {
        assert_eq!(
            kinds_of(vec![("f", vec!["0", "1", "0", "1"])]),
            [ColumnKind::BinaryFlag]
        );
    }

    #[test]
    fn roadway_like_columns() {
        let kinds = kinds_of(vec![
            ("row_id", vec!["0", "1", "2", "3", "4"]),
            ("time", vec!["1991-04-01 00:00:00"; 5]),
            ("direction", vec!["EB", "NB", "SB", "EB", "NB"]),
            ("congestion", vec!["70", "49", "24", "18", "60"]),
        ]);
        assert_eq!(
            kinds,
            [
                ColumnKind::Identifier,
                ColumnKind::Timestamp,
                ColumnKind::Categorical,
                ColumnKind::Continuous
            ]
        );
    }

    #[test]
    fn small_integer_coordinates_are_categorical() {
        let x: Vec<&str> = ["0", "1", "2"].iter().cycle().take(30).copied().collect();
        assert_eq!(kinds_of(vec![("x", x)]), [ColumnKind::Categorical]);
    }

    #[test]
    fn fractional_values_are_continuous() {
        let v: Vec<&str> = ["0.5", "1.5", "2.5"].iter().cycle().take(30).copied().collect();
        assert_eq!(kinds_of(vec![("v", v)]), [ColumnKind::Continuous]);
    }

    #[test]
    fn all_null_column_is_categorical() {
        assert_eq!(
            kinds_of(vec![("n", vec!["", "NA", "null"])]),
            [ColumnKind::Categorical]
        );
    }
}
