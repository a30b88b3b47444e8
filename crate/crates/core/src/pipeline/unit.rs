//! Choosing the x-axis time unit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::variance_ratio;
use crate::dataset::{ColumnKind, Dataset, DatasetError};
use crate::temporal::{CalendarColumns, FlagColumns};

use super::serialize_score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Year,
    Month,
    Date,
    Day,
    Hour,
    Minute,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 6] = [
        TimeUnit::Year,
        TimeUnit::Month,
        TimeUnit::Date,
        TimeUnit::Day,
        TimeUnit::Hour,
        TimeUnit::Minute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Year => "year",
            TimeUnit::Month => "month",
            TimeUnit::Date => "date",
            TimeUnit::Day => "day",
            TimeUnit::Hour => "hour",
            TimeUnit::Minute => "minute",
        }
    }

    /// Tie-break rank, lower wins: hour, date, day, month, minute, year.
    pub fn preference(self) -> u8 {
        match self {
            TimeUnit::Hour => 0,
            TimeUnit::Date => 1,
            TimeUnit::Day => 2,
            TimeUnit::Month => 3,
            TimeUnit::Minute => 4,
            TimeUnit::Year => 5,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimeUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeUnit::ALL
            .into_iter()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| format!("unknown time unit `{s}`"))
    }
}

/// Column holding each unit after decomposition and flag derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitColumns {
    pub year: String,
    pub month: String,
    pub date: String,
    pub day: String,
    pub hour: String,
    pub minute: String,
}

impl UnitColumns {
    pub fn new(calendar: &CalendarColumns, flags: &FlagColumns) -> Self {
        UnitColumns {
            year: calendar.year.clone(),
            month: calendar.month.clone(),
            date: calendar.date.clone(),
            day: flags.day.clone(),
            hour: calendar.hour.clone(),
            minute: calendar.minute.clone(),
        }
    }

    pub fn get(&self, unit: TimeUnit) -> &str {
        match unit {
            TimeUnit::Year => &self.year,
            TimeUnit::Month => &self.month,
            TimeUnit::Date => &self.date,
            TimeUnit::Day => &self.day,
            TimeUnit::Hour => &self.hour,
            TimeUnit::Minute => &self.minute,
        }
    }
}

impl Default for UnitColumns {
    fn default() -> Self {
        UnitColumns {
            year: "year".into(),
            month: "month".into(),
            date: "date".into(),
            day: "day".into(),
            hour: "hour".into(),
            minute: "minute".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitScore {
    pub unit: TimeUnit,
    pub column: String,
    #[serde(serialize_with = "serialize_score")]
    pub score: f64,
    pub distinct_values: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRanking {
    /// Best first.
    pub ranked: Vec<UnitScore>,
    /// Units with fewer than two distinct values.
    pub excluded: Vec<TimeUnit>,
}

impl UnitRanking {
    pub fn best(&self) -> TimeUnit {
        self.ranked[0].unit
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum UnitError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("no time unit has at least two distinct values")]
    NoUsableUnit,
}

/// Ranks time units by how strongly they separate the target: the
/// between/within variance ratio with each unit value as a group of raw
/// target readings. Exact ties fall back to [`TimeUnit::preference`].
pub fn recommend_unit(
    dataset: &Dataset,
    target: &str,
    columns: &UnitColumns,
) -> Result<UnitRanking, UnitError> {
    let values = dataset
        .column_of_kind(target, &[ColumnKind::Continuous])?
        .numbers()?;
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for unit in TimeUnit::ALL {
        let col = dataset.column(columns.get(unit))?;
        let codes = col.dense_codes()?;
        let k = col.categories().len();
        if k < 2 {
            excluded.push(unit);
            continue;
        }
        let mut groups: Vec<Vec<(f64, u64)>> = vec![Vec::new(); k];
        for (&c, &v) in codes.iter().zip(&values) {
            groups[c as usize].push((v, 1));
        }
        ranked.push(UnitScore {
            unit,
            column: col.name().to_string(),
            score: variance_ratio(&groups),
            distinct_values: k,
        });
    }
    if ranked.is_empty() {
        return Err(UnitError::NoUsableUnit);
    }
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.unit.preference().cmp(&b.unit.preference()))
    });
    Ok(UnitRanking { ranked, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;
    use crate::pipeline::synth::{rows_for_days, synth_dataset, SynthSpec};
    use crate::temporal::{decompose, derive_calendar_flags};

    fn prepared(ds: &Dataset) -> Dataset {
        derive_calendar_flags(&decompose(ds, "time").unwrap(), "time").unwrap()
    }

    #[test]
    fn hourly_signal_picks_hour() {
        let spec = SynthSpec {
            month_trend: 0.0,
            weekday_bump: 0.0,
            noise_sigma: 3.0,
            ..SynthSpec::new(rows_for_days(9))
        };
        let ds = prepared(&synth_dataset(11, &spec));
        let r = recommend_unit(&ds, "congestion", &UnitColumns::default()).unwrap();
        assert_eq!(r.best(), TimeUnit::Hour);
        assert!(r.excluded.contains(&TimeUnit::Year));
    }

    #[test]
    fn identical_timestamps() {
        let n = 4;
        let ds = Dataset::new(vec![
            Column::from_raw("time", ColumnKind::Timestamp, &vec!["2020-01-01 10:00:00"; n]),
            Column::from_raw("v", ColumnKind::Continuous, &["1", "2", "3", "4"]),
        ])
        .unwrap();
        let ds = prepared(&ds);
        assert_eq!(
            recommend_unit(&ds, "v", &UnitColumns::default()),
            Err(UnitError::NoUsableUnit)
        );
    }

    #[test]
    fn exact_ties_use_preference_order() {
        // two dates, two hours, two minutes, two days; every split gives the same groups
        let times = [
            "2020-01-01 10:00:00",
            "2020-01-01 10:00:00",
            "2020-01-02 11:20:00",
            "2020-01-02 11:20:00",
        ];
        let ds = Dataset::new(vec![
            Column::from_raw("time", ColumnKind::Timestamp, &times),
            Column::from_raw("v", ColumnKind::Continuous, &["1", "3", "5", "7"]),
        ])
        .unwrap();
        let ds = prepared(&ds);
        let r = recommend_unit(&ds, "v", &UnitColumns::default()).unwrap();
        let order: Vec<_> = r.ranked.iter().map(|s| s.unit).collect();
        assert_eq!(order, [TimeUnit::Hour, TimeUnit::Date, TimeUnit::Day, TimeUnit::Minute]);
        assert!(r.ranked.windows(2).all(|w| w[0].score == w[1].score));
    }

    #[test]
    fn month_can_outrank_hour() {
        // flat within each month, noisy across hours; 2020-04-01 falls on
        // the same weekday as 2020-01-01 so dates and days carry no signal
        let times = [
            "2020-01-01 10:00:00",
            "2020-01-02 11:00:00",
            "2020-01-03 10:00:00",
            "2020-04-01 11:00:00",
            "2020-04-02 10:00:00",
            "2020-04-03 11:00:00",
        ];
        let ds = Dataset::new(vec![
            Column::from_raw("time", ColumnKind::Timestamp, &times),
            Column::from_raw("v", ColumnKind::Continuous, &["10", "10", "10", "20", "20", "20"]),
        ])
        .unwrap();
        let ds = prepared(&ds);
        let r = recommend_unit(&ds, "v", &UnitColumns::default()).unwrap();
        assert_eq!(r.best(), TimeUnit::Month);
    }

    #[test]
    fn parses_names() {
        assert_eq!("hour".parse::<TimeUnit>(), Ok(TimeUnit::Hour));
        assert!("week".parse::<TimeUnit>().is_err());
    }
}
