//! Run configuration and its line-oriented file format.
//!
//! ```text
//! # comment
//! as_of = 2/2/2016
//! age_mode = months30
//! stored_digits = 2
//! term.high = 0.65
//! term.validity.high = 0.8
//! scoring = weighted
//! weight.fact_completeness = 2
//! ```

use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::catalog::NullTokens;
use crate::dates::{parse_dmy, AgeMode};
use crate::error::{Error, Result};
use crate::planner::DEFAULT_MAX_SOURCES;
use crate::quality::{Feature, Precision};
use crate::query::TermTable;
use crate::ranker::Scoring;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Records,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "records" => Ok(OutputFormat::Records),
            other => Err(Error::Config(format!("unknown output format `{other}` (table or records)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Delivery date; `None` means today.
    pub as_of: Option<NaiveDate>,
    pub age_mode: AgeMode,
    /// Precision of stored intermediate tables.
    pub precision: Precision,
    /// Decimals shown in reports.
    pub rounding_digits: usize,
    pub terms: TermTable,
    pub scoring: Scoring,
    pub null_tokens: Vec<String>,
    pub max_sources: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            as_of: None,
            age_mode: AgeMode::ExactDays,
            precision: Precision::Full,
            rounding_digits: 2,
            terms: TermTable::standard(),
            scoring: Scoring::Sum,
            null_tokens: Vec::new(),
            max_sources: DEFAULT_MAX_SOURCES,
            format: OutputFormat::Table,
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: `{value}` is not a valid number")))
}

fn unit(key: &str, value: &str) -> Result<f64> {
    let v: f64 = number(key, value)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("{key}: {v} is outside [0, 1]")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::default();
        c.apply_text(&text)?;
        Ok(c)
    }

    /// Applies `key = value` lines on top of the current settings.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip(e))))?;
        }
        Ok(())
    }

    /// Applies a `--define` override: `term=value`, `feature.term=value`
    /// or any configuration `key=value`.
    pub fn define(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("define `{assignment}`: expected name=value")))?;
        let k = k.trim();
        if KEYS.contains(&k) || k.starts_with("term.") || k.starts_with("weight.") {
            self.set(k, v.trim())
        } else {
            self.set(&format!("term.{k}"), v.trim())
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if let Some(rest) = key.strip_prefix("term.") {
            let (feature, term) = match rest.rsplit_once('.') {
                Some((f, t)) => (Some(f.parse::<Feature>()?), t),
                None => (None, rest),
            };
            if term.is_empty() {
                return Err(Error::Config(format!("{key}: missing term name")));
            }
            self.terms.define(term, feature, unit(key, value)?);
            return Ok(());
        }
        if let Some(f) = key.strip_prefix("weight.") {
            let feature: Feature = f.parse()?;
            let w: f64 = number(key, value)?;
            let mut weights = match &self.scoring {
                Scoring::Weighted(w) => w.clone(),
                _ => Default::default(),
            };
            weights.insert(feature, w);
            self.scoring = Scoring::Weighted(weights);
            return self.scoring.validate();
        }
        match key {
            "as_of" => self.as_of = Some(parse_dmy(value)?),
            "age_mode" => self.age_mode = value.parse()?,
            "stored_digits" => {
                self.precision = if value.eq_ignore_ascii_case("full") {
                    Precision::Full
                } else {
                    Precision::Decimals(number(key, value)?)
                }
            }
            "rounding_digits" => self.rounding_digits = number(key, value)?,
            "scoring" => {
                let s: Scoring = value.parse()?;
                // keep weights already given
                if !(matches!(s, Scoring::Weighted(_)) && matches!(self.scoring, Scoring::Weighted(_))) {
                    self.scoring = s;
                }
            }
            "null_tokens" => {
                self.null_tokens = value.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
            }
            "max_sources" => self.max_sources = number(key, value)?,
            "output" | "format" => self.format = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn nulls(&self) -> NullTokens {
        NullTokens::with_extra(self.null_tokens.iter().cloned())
    }
}

const KEYS: &[&str] = &[
    "as_of",
    "age_mode",
    "stored_digits",
    "rounding_digits",
    "scoring",
    "null_tokens",
    "max_sources",
    "output",
    "format",
];

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}
