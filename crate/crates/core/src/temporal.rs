//! Calendar features derived from naive (zone-less) timestamps.
//!
//! Dates are proleptic Gregorian. The derived columns are grouping keys, so
//! they are typed categorical (or binary flag) rather than continuous.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Column, ColumnKind, Dataset, DatasetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemporalError {
    #[error("cannot parse `{text}` at byte {position}: {reason}")]
    Parse {
        text: String,
        position: usize,
        reason: String,
    },
    #[error("invalid date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },
    #[error("invalid time of day {hour:02}:{minute:02}:{second:02}")]
    InvalidTime { hour: u32, minute: u32, second: u32 },
    #[error("invalid time format `{0}`: needs YYYY, MM and DD")]
    InvalidFormat(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Year,
    Month,
    Day,
    Hour,
    Minute,
    Second,
    Literal(char),
}

impl Token {
    fn width(self) -> usize {
        match self {
            Token::Year => 4,
            Token::Literal(c) => c.len_utf8(),
            _ => 2,
        }
    }
}

/// A fixed-width timestamp pattern built from `YYYY`, `MM`, `DD`, `hh`, `mm`,
/// `ss` and literal characters. Time fields are optional and default to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeFormat {
    pattern: String,
    tokens: Vec<Token>,
}

pub const DEFAULT_TIME_FORMAT: &str = "YYYY-MM-DD hh:mm:ss";

impl Default for TimeFormat {
    fn default() -> Self {
        DEFAULT_TIME_FORMAT.parse().expect("default pattern is valid")
    }
}

impl fmt::Display for TimeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

impl FromStr for TimeFormat {
    type Err = TemporalError;

    fn from_str(pattern: &str) -> Result<Self, Self::Err> {
        const FIELDS: [(&str, Token); 6] = [
            ("YYYY", Token::Year),
            ("MM", Token::Month),
            ("DD", Token::Day),
            ("hh", Token::Hour),
            ("mm", Token::Minute),
            ("ss", Token::Second),
        ];
        let mut tokens = Vec::new();
        let mut rest = pattern;
        'outer: while !rest.is_empty() {
            for (spelling, token) in FIELDS {
                if let Some(tail) = rest.strip_prefix(spelling) {
                    if tokens.contains(&token) {
                        return Err(TemporalError::InvalidFormat(pattern.to_string()));
                    }
                    tokens.push(token);
                    rest = tail;
                    continue 'outer;
                }
            }
            let c = rest.chars().next().unwrap();
            tokens.push(Token::Literal(c));
            rest = &rest[c.len_utf8()..];
        }
        for required in [Token::Year, Token::Month, Token::Day] {
            if !tokens.contains(&required) {
                return Err(TemporalError::InvalidFormat(pattern.to_string()));
            }
        }
        Ok(TimeFormat {
            pattern: pattern.to_string(),
            tokens,
        })
    }
}

impl TimeFormat {
    /// ISO-8601 variant with a `T` separator.
    pub fn iso_t() -> Self {
        "YYYY-MM-DDThh:mm:ss".parse().expect("valid pattern")
    }

    pub fn as_str(&self) -> &str {
        &self.pattern
    }
}

/// A naive civil date and time of day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Timestamp {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
}

impl Timestamp {
    pub fn new(
        year: i32,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        second: u32,
    ) -> Result<Self, TemporalError> {
        if !is_valid_date(year, month, day) {
            return Err(TemporalError::InvalidDate { year, month, day });
        }
        if hour > 23 || minute > 59 || second > 59 {
            return Err(TemporalError::InvalidTime {
                hour,
                minute,
                second,
            });
        }
        Ok(Timestamp {
            year,
            month,
            day,
            hour,
            minute,
            second,
        })
    }

    /// Days since 1970-01-01.
    pub fn days_since_epoch(&self) -> i64 {
        days_from_civil(self.year, self.month, self.day)
    }

    /// Inverse of [`Timestamp::days_since_epoch`] plus a time of day.
    pub fn from_epoch_seconds(secs: i64) -> Self {
        let days = secs.div_euclid(86_400);
        let tod = secs.rem_euclid(86_400) as u32;
        let (year, month, day) = civil_from_days(days);
        Timestamp {
            year,
            month,
            day,
            hour: tod / 3600,
            minute: tod / 60 % 60,
            second: tod % 60,
        }
    }

    pub fn epoch_seconds(&self) -> i64 {
        self.days_since_epoch() * 86_400
            + i64::from(self.hour * 3600 + self.minute * 60 + self.second)
    }

    pub fn day_name(&self) -> DayName {
        DayName::from_days_since_epoch(self.days_since_epoch())
    }

    pub fn calendar_features(&self) -> CalendarFeatures {
        let day_name = self.day_name();
        CalendarFeatures {
            year: self.year,
            month: self.month,
            date: self.day,
            hour: self.hour,
            minute: self.minute,
            second: self.second,
            weekday_flag: u8::from(day_name.is_weekday()),
            day_name,
            pm_flag: u8::from(self.hour >= 12),
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04}-{:02}-{:02} {:02}:{:02}:{:02}",
            self.year, self.month, self.day, self.hour, self.minute, self.second
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DayName {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl DayName {
    pub const ALL: [DayName; 7] = [
        DayName::Monday,
        DayName::Tuesday,
        DayName::Wednesday,
        DayName::Thursday,
        DayName::Friday,
        DayName::Saturday,
        DayName::Sunday,
    ];

    /// 0 = Monday .. 6 = Sunday.
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayName::Monday => "Monday",
            DayName::Tuesday => "Tuesday",
            DayName::Wednesday => "Wednesday",
            DayName::Thursday => "Thursday",
            DayName::Friday => "Friday",
            DayName::Saturday => "Saturday",
            DayName::Sunday => "Sunday",
        }
    }

    /// Weekend is Saturday and Sunday.
    pub fn is_weekday(self) -> bool {
        !matches!(self, DayName::Saturday | DayName::Sunday)
    }

    fn from_days_since_epoch(days: i64) -> Self {
        // 1970-01-01 was a Thursday
        Self::ALL[(days + 3).rem_euclid(7) as usize]
    }
}

impl fmt::Display for DayName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DayName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|d| d.as_str() == s).ok_or(())
    }
}

/// Every calendar feature the pipeline derives from one timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarFeatures {
    pub year: i32,
    pub month: u32,
    pub date: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
    pub weekday_flag: u8,
    pub day_name: DayName,
    pub pm_flag: u8,
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

pub fn is_valid_date(year: i32, month: u32, day: u32) -> bool {
    (1..=12).contains(&month) && day >= 1 && day <= days_in_month(year, month)
}

// Howard Hinnant's days_from_civil / civil_from_days, shifted so the year
// starts in March and the leap day falls at the end.
fn days_from_civil(year: i32, month: u32, day: u32) -> i64 {
    let y = i64::from(year) - i64::from(month <= 2);
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = i64::from(month);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn civil_from_days(days: i64) -> (i32, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + i64::from(month <= 2);
    (year as i32, month, day)
}

/// Civil weekday of a proleptic-Gregorian date.
pub fn day_of_week(year: i32, month: u32, day: u32) -> Result<DayName, TemporalError> {
    if !is_valid_date(year, month, day) {
        return Err(TemporalError::InvalidDate { year, month, day });
    }
    Ok(DayName::from_days_since_epoch(days_from_civil(
        year, month, day,
    )))
}

pub fn parse_timestamp(text: &str, format: &TimeFormat) -> Result<Timestamp, TemporalError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut fields = [0u32; 6];
    let err = |position: usize, reason: &str| TemporalError::Parse {
        text: text.to_string(),
        position,
        reason: reason.to_string(),
    };
    for &token in &format.tokens {
        let width = token.width();
        if pos + width > bytes.len() {
            return Err(err(pos, "input ends early"));
        }
        match token {
            Token::Literal(c) => {
                if !text[pos..].starts_with(c) {
                    return Err(err(pos, &format!("expected `{c}`")));
                }
            }
            field => {
                let digits = &bytes[pos..pos + width];
                if let Some(off) = digits.iter().position(|b| !b.is_ascii_digit()) {
                    return Err(err(pos + off, "expected a digit"));
                }
                let value = digits
                    .iter()
                    .fold(0u32, |acc, b| acc * 10 + u32::from(b - b'0'));
                let slot = match field {
                    Token::Year => 0,
                    Token::Month => 1,
                    Token::Day => 2,
                    Token::Hour => 3,
                    Token::Minute => 4,
                    Token::Second => 5,
                    Token::Literal(_) => unreachable!(),
                };
                fields[slot] = value;
            }
        }
        pos += width;
    }
    if pos != bytes.len() {
        return Err(err(pos, "trailing characters"));
    }
    let [year, month, day, hour, minute, second] = fields;
    Timestamp::new(year as i32, month, day, hour, minute, second)
}

/// Names actually given to the derived calendar columns (after collision
/// suffixing).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarColumns {
    pub year: String,
    pub month: String,
    pub date: String,
    pub hour: String,
    pub minute: String,
    pub second: String,
}

/// Parses each distinct timestamp once.
fn parsed_categories(dataset: &Dataset, time_col: &str) -> Result<(Vec<Timestamp>, Vec<u32>), TemporalError> {
    let col = dataset.column_of_kind(time_col, &[ColumnKind::Timestamp])?;
    let stamps = col
        .categories()
        .iter()
        .map(|c| parse_timestamp(c, dataset.time_format()))
        .collect::<Result<Vec<_>, _>>()?;
    let codes = col.dense_codes()?;
    Ok((stamps, codes))
}

fn derived_column<T: ToString>(
    name: String,
    kind: ColumnKind,
    stamps: &[Timestamp],
    codes: &[u32],
    f: impl Fn(&Timestamp) -> T,
) -> Column {
    let labels: Vec<String> = stamps.iter().map(|t| f(t).to_string()).collect();
    Column::from_codes(name, kind, labels, codes.iter().map(|&c| Some(c)).collect())
}

/// Adds `year`, `month`, `date`, `hour`, `minute`, `second` columns.
pub fn decompose(dataset: &Dataset, time_col: &str) -> Result<Dataset, TemporalError> {
    decompose_with_names(dataset, time_col).map(|(d, _)| d)
}

/// [`decompose`] that also reports the names the new columns received.
/// A clash with an existing column appends `_ts` to the new name.
pub fn decompose_with_names(
    dataset: &Dataset,
    time_col: &str,
) -> Result<(Dataset, CalendarColumns), TemporalError> {
    let (stamps, codes) = parsed_categories(dataset, time_col)?;
    let names = CalendarColumns {
        year: dataset.unique_name("year", "_ts"),
        month: dataset.unique_name("month", "_ts"),
        date: dataset.unique_name("date", "_ts"),
        hour: dataset.unique_name("hour", "_ts"),
        minute: dataset.unique_name("minute", "_ts"),
        second: dataset.unique_name("second", "_ts"),
    };
    let cat = ColumnKind::Categorical;
    let cols = vec![
        derived_column(names.year.clone(), cat, &stamps, &codes, |t| t.year),
        derived_column(names.month.clone(), cat, &stamps, &codes, |t| t.month),
        derived_column(names.date.clone(), cat, &stamps, &codes, |t| t.day),
        derived_column(names.hour.clone(), cat, &stamps, &codes, |t| t.hour),
        derived_column(names.minute.clone(), cat, &stamps, &codes, |t| t.minute),
        derived_column(names.second.clone(), cat, &stamps, &codes, |t| t.second),
    ];
    Ok((dataset.with_columns(cols)?, names))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagColumns {
    pub weekday: String,
    pub day: String,
    pub pm: String,
}

/// Adds `weekday` (1 = Monday..Friday), `day` (English day name) and `PM`
/// (1 = hour >= 12). Works directly from the timestamp column, so it does not
/// depend on [`decompose`] having run.
pub fn derive_calendar_flags(dataset: &Dataset, time_col: &str) -> Result<Dataset, TemporalError> {
    derive_calendar_flags_with_names(dataset, time_col).map(|(d, _)| d)
}

pub fn derive_calendar_flags_with_names(
    dataset: &Dataset,
    time_col: &str,
) -> Result<(Dataset, FlagColumns), TemporalError> {
    let (stamps, codes) = parsed_categories(dataset, time_col)?;
    let names = FlagColumns {
        weekday: dataset.unique_name("weekday", "_ts"),
        day: dataset.unique_name("day", "_ts"),
        pm: dataset.unique_name("PM", "_ts"),
    };
    let cols = vec![
        derived_column(names.weekday.clone(), ColumnKind::BinaryFlag, &stamps, &codes, |t| {
            t.calendar_features().weekday_flag
        }),
        derived_column(names.day.clone(), ColumnKind::Categorical, &stamps, &codes, |t| {
            t.day_name()
        }),
        derived_column(names.pm.clone(), ColumnKind::BinaryFlag, &stamps, &codes, |t| {
            t.calendar_features().pm_flag
        }),
    ];
    Ok((dataset.with_columns(cols)?, names))
}
