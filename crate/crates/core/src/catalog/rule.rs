//! Domain rules attached to global columns.
//!
//! A rule is one or more clauses separated by `;`:
//!
//! ```text
//! rule    = clause { ";" clause } ;
//! clause  = "type:" ( "int" | "real" | "date" | "text" )
//!         | "range:[" bound "," bound "]"
//!         | "in:{" value { "," value } "}"
//!         | "pattern:" regex ;
//! ```
//!
//! A value is valid when it satisfies every clause. `range` bounds are
//! dates when the rule also says `type:date`, numbers otherwise.

use std::fmt;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dates::parse_dmy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Int,
    Real,
    Date,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
enum Range {
    Number(f64, f64),
    Date(NaiveDate, NaiveDate),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DomainRule {
    text: String,
    value_type: Option<ValueType>,
    range: Option<Range>,
    members: Option<Vec<String>>,
    pattern: Option<Regex>,
}

impl PartialEq for DomainRule {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl DomainRule {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |detail: &str| Error::InvalidDomainRule {
            rule: text.to_string(),
            detail: detail.to_string(),
        };
        let mut rule = DomainRule {
            text: text.trim().to_string(),
            value_type: None,
            range: None,
            members: None,
            pattern: None,
        };
        if rule.text.is_empty() {
            return Err(bad("empty rule"));
        }
        let mut raw_range = None;
        for clause in split_clauses(&rule.text) {
            let clause = clause.trim();
            let (kind, arg) = clause.split_once(':').ok_or_else(|| bad("clause lacks `:`"))?;
            let arg = arg.trim();
            match kind.trim().to_ascii_lowercase().as_str() {
                "type" => {
                    rule.value_type = Some(match arg.to_ascii_lowercase().as_str() {
                        "int" | "integer" => ValueType::Int,
                        "real" | "float" | "number" => ValueType::Real,
                        "date" => ValueType::Date,
                        "text" | "string" => ValueType::Text,
                        _ => return Err(bad("unknown type")),
                    })
                }
                "range" => {
                    let inner = arg
                        .strip_prefix('[')
                        .and_then(|a| a.strip_suffix(']'))
                        .ok_or_else(|| bad("range must be written [lo,hi]"))?;
                    let (lo, hi) = inner.split_once(',').ok_or_else(|| bad("range needs two bounds"))?;
                    raw_range = Some((lo.trim().to_string(), hi.trim().to_string()));
                }
                "in" => {
                    let inner = arg
                        .strip_prefix('{')
                        .and_then(|a| a.strip_suffix('}'))
                        .ok_or_else(|| bad("enumeration must be written {a,b,...}"))?;
                    rule.members = Some(inner.split(',').map(|v| v.trim().to_string()).collect());
                }
                "pattern" => {
                    let re = Regex::new(&format!("^(?:{arg})$")).map_err(|e| bad(&e.to_string()))?;
                    rule.pattern = Some(re);
                }
                _ => return Err(bad("unknown clause")),
            }
        }
        if let Some((lo, hi)) = raw_range {
            rule.range = Some(if rule.value_type == Some(ValueType::Date) {
                Range::Date(parse_dmy(&lo).map_err(|_| bad("bad date bound"))?, parse_dmy(&hi).map_err(|_| bad("bad date bound"))?)
            } else {
                let n = |s: &str| s.parse::<f64>().map_err(|_| bad("bad numeric bound"));
                Range::Number(n(&lo)?, n(&hi)?)
            });
        }
        Ok(rule)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn value_type(&self) -> Option<ValueType> {
        self.value_type
    }

    /// True when `value` satisfies every clause.
    pub fn is_valid(&self, value: &str) -> bool {
        match self.value_type {
            Some(ValueType::Int) if value.trim().parse::<i64>().is_err() => return false,
            Some(ValueType::Real) if value.trim().parse::<f64>().is_err() => return false,
            Some(ValueType::Date) if parse_dmy(value).is_err() => return false,
            _ => {}
        }
        match &self.range {
            Some(Range::Number(lo, hi)) => match value.trim().parse::<f64>() {
                Ok(x) if x >= *lo && x <= *hi => {}
                _ => return false,
            },
            Some(Range::Date(lo, hi)) => match parse_dmy(value) {
                Ok(d) if d >= *lo && d <= *hi => {}
                _ => return false,
            },
            None => {}
        }
        if let Some(members) = &self.members {
            if !members.iter().any(|m| m == value) {
                return false;
            }
        }
        if let Some(re) = &self.pattern {
            if !re.is_match(value) {
                return false;
            }
        }
        true
    }

    /// Canonical form used for key matching and 0/1 accuracy: numbers
    /// compare numerically, dates by calendar day, text verbatim.
    pub fn canonical(&self, value: &str) -> String {
        match self.value_type {
            Some(ValueType::Int) => value
                .trim()
                .parse::<i64>()
                .map(|v| v.to_string())
                .unwrap_or_else(|_| value.to_string()),
            Some(ValueType::Real) => value
                .trim()
                .parse::<f64>()
                .map(|v| v.to_string())
                .unwrap_or_else(|_| value.to_string()),
            Some(ValueType::Date) => parse_dmy(value)
                .map(|d| d.to_string())
                .unwrap_or_else(|_| value.to_string()),
            _ => value.to_string(),
        }
    }
}

// Splits on `;` outside of `[]`, `{}`.
fn split_clauses(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ';' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out.into_iter().filter(|c| !c.trim().is_empty()).collect()
}

impl TryFrom<String> for DomainRule {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        DomainRule::parse(&value)
    }
}

impl From<DomainRule> for String {
    fn from(rule: DomainRule) -> String {
        rule.text
    }
}

impl fmt::Display for DomainRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
