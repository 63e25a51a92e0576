//! Day/month/year dates and data age.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parses `d/m/yyyy` (also `d-m-yyyy` and `d.m.yyyy`).
pub fn parse_dmy(text: &str) -> Result<NaiveDate> {
    let t = text.trim();
    let parts: Vec<&str> = t.split(['/', '-', '.']).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidDate(text.to_string()));
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| Error::InvalidDate(text.to_string()));
    let (d, m) = (num(parts[0])?, num(parts[1])?);
    let y: i32 = parts[2]
        .parse()
        .map_err(|_| Error::InvalidDate(text.to_string()))?;
    NaiveDate::from_ymd_opt(y, m, d).ok_or_else(|| Error::InvalidDate(text.to_string()))
}

pub fn format_dmy(date: NaiveDate) -> String {
    format!("{}/{}/{}", date.day(), date.month(), date.year())
}

/// How the age of data is counted between two dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgeMode {
    /// Calendar day difference.
    #[default]
    ExactDays,
    /// Whole months counted as 30 days each, plus the days left over after
    /// the last whole-month anniversary.
    Months30,
}

impl std::str::FromStr for AgeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact-days" | "exact_days" | "exact" | "days" => Ok(AgeMode::ExactDays),
            "months30" | "months-30" | "month30" => Ok(AgeMode::Months30),
            other => Err(Error::Config(format!("unknown age mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for AgeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AgeMode::ExactDays => "exact-days",
            AgeMode::Months30 => "months30",
        })
    }
}

/// Age in days of data inserted on `from` and delivered on `to`.
/// Negative spans count as zero.
pub fn age_days(from: NaiveDate, to: NaiveDate, mode: AgeMode) -> u32 {
    if to <= from {
        return 0;
    }
    match mode {
        AgeMode::ExactDays => (to - from).num_days() as u32,
        AgeMode::Months30 => {
            let mut months =
                (to.year() - from.year()) * 12 + to.month() as i32 - from.month() as i32;
            let mut anchor = add_months(from, months);
            while anchor > to {
                months -= 1;
                anchor = add_months(from, months);
            }
            months as u32 * 30 + (to - anchor).num_days() as u32
        }
    }
}

// Month arithmetic clamping the day to the target month's length.
fn add_months(date: NaiveDate, months: i32) -> NaiveDate {
    let total = date.year() * 12 + date.month0() as i32 + months;
    let (y, m0) = (total.div_euclid(12), total.rem_euclid(12) as u32);
    let mut day = date.day();
    loop {
        if let Some(d) = NaiveDate::from_ymd_opt(y, m0 + 1, day) {
            return d;
        }
        day -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        parse_dmy(s).unwrap()
    }

    #[test]
    fn day_first_parsing() {
        assert_eq!(d("2/12/2015"), NaiveDate::from_ymd_opt(2015, 12, 2).unwrap());
        assert_eq!(d("27/4/1994"), NaiveDate::from_ymd_opt(1994, 4, 27).unwrap());
        assert!(parse_dmy("31/2/2016").is_err());
        assert!(parse_dmy("2016-01").is_err());
        assert_eq!(format_dmy(d("02/02/2016")), "2/2/2016");
    }

    #[test]
    fn ages_for_worked_example() {
        let delivery = d("2/2/2016");
        assert_eq!(age_days(d("2/12/2015"), delivery, AgeMode::Months30), 60);
        assert_eq!(age_days(d("2/1/2016"), delivery, AgeMode::Months30), 30);
        assert_eq!(age_days(d("2/10/2015"), delivery, AgeMode::Months30), 120);
        // Calendar oracle: Dec has 31 days, Jan has 31.
        assert_eq!(age_days(d("2/12/2015"), delivery, AgeMode::ExactDays), 62);
        assert_eq!(age_days(d("2/1/2016"), delivery, AgeMode::ExactDays), 31);
        assert_eq!(age_days(d("2/10/2015"), delivery, AgeMode::ExactDays), 123);
    }

    #[test]
    fn months30_residual_days() {
        assert_eq!(age_days(d("2/1/2016"), d("12/2/2016"), AgeMode::Months30), 40);
        assert_eq!(age_days(d("20/1/2016"), d("5/2/2016"), AgeMode::Months30), 16);
        assert_eq!(age_days(d("31/1/2016"), d("29/2/2016"), AgeMode::Months30), 30);
        assert_eq!(age_days(d("5/2/2016"), d("1/2/2016"), AgeMode::Months30), 0);
    }
}
