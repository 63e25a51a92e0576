//! Quality features, score vectors and rounding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four scoped data quality features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    FactCompleteness,
    Validity,
    Accuracy,
    Timeliness,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::FactCompleteness,
        Feature::Validity,
        Feature::Accuracy,
        Feature::Timeliness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::FactCompleteness => "fact_completeness",
            Feature::Validity => "validity",
            Feature::Accuracy => "accuracy",
            Feature::Timeliness => "timeliness",
        }
    }

    /// Short name used in pruning annotations.
    pub fn short(self) -> &'static str {
        match self {
            Feature::FactCompleteness => "fact",
            Feature::Validity => "validity",
            Feature::Accuracy => "accuracy",
            Feature::Timeliness => "timeliness",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = Error;

    /// Accepts `fact_completeness`, `FactCompleteness`,
    /// `AlternativeFactCompleteness`, `completeness` and so on,
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let mut norm: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        if let Some(rest) = norm.strip_prefix("alternative") {
            norm = rest.to_string();
        }
        match norm.as_str() {
            "factcompleteness" | "completeness" | "fact" => Ok(Feature::FactCompleteness),
            "validity" => Ok(Feature::Validity),
            "accuracy" => Ok(Feature::Accuracy),
            "timeliness" => Ok(Feature::Timeliness),
            _ => Err(Error::UnknownFeature(s.to_string())),
        }
    }
}

/// Fact-completeness, validity, accuracy and timeliness, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QualityVector {
    pub fact_completeness: f64,
    pub validity: f64,
    pub accuracy: f64,
    pub timeliness: f64,
}

impl QualityVector {
    pub const fn new(fact_completeness: f64, validity: f64, accuracy: f64, timeliness: f64) -> Self {
        Self {
            fact_completeness,
            validity,
            accuracy,
            timeliness,
        }
    }

    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::FactCompleteness => self.fact_completeness,
            Feature::Validity => self.validity,
            Feature::Accuracy => self.accuracy,
            Feature::Timeliness => self.timeliness,
        }
    }

    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(
            f(self.fact_completeness),
            f(self.validity),
            f(self.accuracy),
            f(self.timeliness),
        )
    }

    pub fn is_bounded(&self) -> bool {
        Feature::ALL
            .iter()
            .all(|f| (0.0..=1.0).contains(&self.get(*f)))
    }
}

/// Half-up rounding to `digits` decimals.
///
/// Binary floating point stores most decimal ties slightly below the tie
/// (0.575 is 0.57499999...), so the scaled value is nudged by a tolerance
/// far below any meaningful score difference before flooring.
pub fn round_half_up(value: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    let scaled = value * scale;
    let nudge = 1e-9 * scaled.abs().max(1.0);
    ((scaled + 0.5 + nudge).floor()) / scale
}

/// Precision at which intermediate metric tables are stored.
///
/// `Full` keeps every score unrounded between stages. `Decimals(n)` stores
/// each stage (column profiles, queried-source vectors, alternative
/// vectors) rounded half-up to `n` decimals, so the next stage computes
/// from the rounded table exactly as a printed metadata table would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Precision {
    #[default]
    Full,
    Decimals(u32),
}

impl Precision {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            Precision::Full => value,
            Precision::Decimals(d) => round_half_up(value, d),
        }
    }

    pub fn apply_vector(self, v: QualityVector) -> QualityVector {
        v.map(|x| self.apply(x))
    }
}
