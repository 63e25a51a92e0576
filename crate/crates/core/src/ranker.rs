//! Ranking of qualified alternatives.
//!
//! Single-feature and no-feature queries are ordered directly. Multi-feature
//! queries go through the Threshold Algorithm over one sorted list per goal
//! feature; [`brute_force_rank`] computes the same answer exhaustively.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::catalog::SourceId;
use crate::error::{Error, Result};
use crate::planner::Alternative;
use crate::quality::{Feature, QualityVector};

/// Monotone aggregation of per-feature scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Scoring {
    #[default]
    Sum,
    Min,
    /// Weighted sum; features without a weight count with weight 1.
    Weighted(BTreeMap<Feature, f64>),
}

impl Scoring {
    /// Rejects weightings that would make the function non-monotone.
    pub fn validate(&self) -> Result<()> {
        if let Scoring::Weighted(w) = self {
            for (f, v) in w {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::RejectedScoringFunction(format!(
                        "weight {v} for {f} must be a finite non-negative number"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, features: &[Feature], scores: &[f64]) -> f64 {
        match self {
            Scoring::Sum => scores.iter().sum(),
            Scoring::Min => scores.iter().copied().fold(f64::INFINITY, f64::min),
            Scoring::Weighted(w) => features
                .iter()
                .zip(scores)
                .map(|(f, s)| w.get(f).copied().unwrap_or(1.0) * s)
                .sum(),
        }
    }
}

impl fmt::Display for Scoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scoring::Sum => f.write_str("sum"),
            Scoring::Min => f.write_str("min"),
            Scoring::Weighted(_) => f.write_str("weighted"),
        }
    }
}

impl FromStr for Scoring {
    type Err = Error;

    /// `sum`, `min` or `weighted`; weights are supplied separately.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" => Ok(Scoring::Sum),
            "min" => Ok(Scoring::Min),
            "weighted" => Ok(Scoring::Weighted(BTreeMap::new())),
            other => Err(Error::RejectedScoringFunction(format!("unknown scoring function `{other}`"))),
        }
    }
}

/// One row of a ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedAnswer {
    pub label: String,
    pub members: Vec<SourceId>,
    pub scores: QualityVector,
    pub total_score: f64,
    /// 1-based position.
    pub rank: usize,
}

/// The global tie rule: higher score, then fewer members, then label.
fn tie_order(a_score: f64, a: &Alternative, b_score: f64, b: &Alternative) -> Ordering {
    b_score
        .total_cmp(&a_score)
        .then_with(|| a.members.len().cmp(&b.members.len()))
        .then_with(|| a.label.cmp(&b.label))
}

fn answers(alts: &[Alternative], scored: Vec<(usize, f64)>) -> Vec<RankedAnswer> {
    scored
        .into_iter()
        .enumerate()
        .map(|(r, (i, f))| RankedAnswer {
            label: alts[i].label.clone(),
            members: alts[i].members.clone(),
            scores: alts[i].vector,
            total_score: f,
            rank: r + 1,
        })
        .collect()
}

fn check_finite(alts: &[Alternative], features: &[Feature]) -> Result<()> {
    for a in alts {
        for f in features {
            if !a.vector.get(*f).is_finite() {
                return Err(Error::InvalidScore(a.label.clone()));
            }
        }
    }
    Ok(())
}

/// One feature's alternatives sorted descending under the tie rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureList {
    pub feature: Feature,
    /// Indices into the ranked alternatives with their scores.
    pub entries: Vec<(usize, f64)>,
}

impl FeatureList {
    pub fn new(alts: &[Alternative], feature: Feature) -> Self {
        let mut entries: Vec<(usize, f64)> = alts.iter().enumerate().map(|(i, a)| (i, a.vector.get(feature))).collect();
        entries.sort_by(|x, y| tie_order(x.1, &alts[x.0], y.1, &alts[y.0]));
        Self { feature, entries }
    }
}

/// Orders by one feature; `k = None` keeps every alternative.
pub fn rank_single_feature(alts: &[Alternative], feature: Feature, k: Option<usize>) -> Result<Vec<RankedAnswer>> {
    if alts.is_empty() {
        return Err(Error::EmptyRanking);
    }
    check_finite(alts, &[feature])?;
    let mut list = FeatureList::new(alts, feature).entries;
    list.truncate(k.unwrap_or(usize::MAX));
    Ok(answers(alts, list))
}

/// One ranking per feature, in [`Feature::ALL`] order.
pub fn rank_all_features(alts: &[Alternative], k: Option<usize>) -> Result<Vec<(Feature, Vec<RankedAnswer>)>> {
    Feature::ALL
        .iter()
        .map(|f| Ok((*f, rank_single_feature(alts, *f, k)?)))
        .collect()
}

/// Scores every alternative and keeps the best `k`.
pub fn brute_force_rank(alts: &[Alternative], features: &[Feature], scoring: &Scoring, k: usize) -> Result<Vec<RankedAnswer>> {
    scoring.validate()?;
    check_finite(alts, features)?;
    let mut scored: Vec<(usize, f64)> = alts
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let s: Vec<f64> = features.iter().map(|f| a.vector.get(*f)).collect();
            (i, scoring.apply(features, &s))
        })
        .collect();
    scored.sort_by(|x, y| tie_order(x.1, &alts[x.0], y.1, &alts[y.0]));
    scored.truncate(k);
    Ok(answers(alts, scored))
}

/// Access counters of a Threshold Algorithm run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TaStats {
    pub sorted_accesses: usize,
    pub random_accesses: usize,
    /// Number of list positions read in each list before halting.
    pub depth: usize,
}

/// State at one halting check: the buffer of the best `k` seen so far
/// and the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub depth: usize,
    pub threshold: f64,
    pub top_k: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaOutcome {
    pub ranking: Vec<RankedAnswer>,
    pub stats: TaStats,
    pub trace: Vec<TraceStep>,
    /// Threshold at the last check.
    pub threshold: f64,
}

/// Threshold Algorithm top-k over one list per feature.
///
/// Lists are read in parallel by depth. Each newly seen alternative is
/// completed by random access to the other lists. After every depth the
/// threshold `T` is the score of the last values read; the run halts once
/// `k` alternatives are buffered and the `k`-th scores strictly above `T`,
/// or when the lists are exhausted. Halting only on a strict inequality
/// keeps the output identical to [`brute_force_rank`] when an unseen
/// alternative could tie with the `k`-th one.
pub fn ta_rank(alts: &[Alternative], features: &[Feature], scoring: &Scoring, k: usize) -> Result<TaOutcome> {
    check_finite(alts, features)?;
    let lists: Vec<FeatureList> = features.iter().map(|f| FeatureList::new(alts, *f)).collect();
    ta_rank_sorted(alts, &lists, scoring, k, true)
}

/// [`ta_rank`] over lists that are already sorted, one per feature.
/// Halting checks are only recorded when `trace` is set.
pub fn ta_rank_sorted(alts: &[Alternative], lists: &[FeatureList], scoring: &Scoring, k: usize, trace_checks: bool) -> Result<TaOutcome> {
    scoring.validate()?;
    if alts.is_empty() {
        return Err(Error::EmptyRanking);
    }
    if lists.is_empty() {
        return Err(Error::RejectedScoringFunction("no features to rank by".into()));
    }
    let features: Vec<Feature> = lists.iter().map(|l| l.feature).collect();
    if let Some(l) = lists.iter().find(|l| l.entries.len() != alts.len()) {
        return Err(Error::RejectedScoringFunction(format!("{} list has {} entries for {} alternatives", l.feature, l.entries.len(), alts.len())));
    }
    let features = &features[..];
    let mut stats = TaStats::default();
    let mut trace = Vec::new();
    let mut seen = vec![false; alts.len()];
    let mut buffer: Vec<(usize, f64)> = Vec::new();
    let mut threshold = f64::INFINITY;
    if k == 0 {
        return Ok(TaOutcome {
            ranking: Vec::new(),
            stats,
            trace,
            threshold,
        });
    }

    let mut last = Vec::with_capacity(lists.len());
    let mut scores = Vec::with_capacity(lists.len());
    for depth in 0..alts.len() {
        last.clear();
        for (li, list) in lists.iter().enumerate() {
            let (obj, score) = list.entries[depth];
            stats.sorted_accesses += 1;
            last.push(score);
            if std::mem::replace(&mut seen[obj], true) {
                continue;
            }
            scores.clear();
            for (lj, f) in features.iter().enumerate() {
                if lj == li {
                    scores.push(score);
                } else {
                    stats.random_accesses += 1;
                    scores.push(alts[obj].vector.get(*f));
                }
            }
            let total = scoring.apply(features, &scores);
            let pos = buffer
                .binary_search_by(|(o, s)| tie_order(*s, &alts[*o], total, &alts[obj]))
                .unwrap_or_else(|p| p);
            if pos < k {
                buffer.insert(pos, (obj, total));
                buffer.truncate(k);
            }
        }
        stats.depth = depth + 1;
        threshold = scoring.apply(features, &last);
        if trace_checks {
            trace.push(TraceStep {
                depth: depth + 1,
                threshold,
                top_k: buffer.iter().map(|(o, s)| (alts[*o].label.clone(), *s)).collect(),
            });
        }
        if buffer.len() == k && buffer[k - 1].1 > threshold {
            break;
        }
    }
    Ok(TaOutcome {
        ranking: answers(alts, buffer),
        stats,
        trace,
        threshold,
    })
}
