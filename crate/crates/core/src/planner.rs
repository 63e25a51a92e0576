//! Queried sources, alternatives and two-stage pruning.

use std::fmt;

use rayon::prelude::*;

use crate::assessor::{max_aggregate, scaled_aggregate};
use crate::catalog::{Catalog, ColumnId, GlobalColumnId, MappingId, SourceId};
use crate::error::{Error, Result};
use crate::quality::{Feature, Precision, QualityVector};
use crate::query::{Bound, Comparator, Goal};

/// Default upper bound on queried sources for subset enumeration.
pub const DEFAULT_MAX_SOURCES: usize = 16;

/// A source column that supplies one projected global column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Participation {
    pub gs_column_id: GlobalColumnId,
    pub column_id: ColumnId,
    pub mapping_id: MappingId,
}

/// A source that can serve part of a query, with its query-scoped quality.
#[derive(Debug, Clone, PartialEq)]
pub struct QueriedSourceProfile {
    pub source_id: SourceId,
    pub name: String,
    pub participation: Vec<Participation>,
    pub vector: QualityVector,
}

/// Which pruning stage rejected an alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    First,
    Second,
}

/// A goal leaf an alternative failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailedLeaf {
    pub feature: Feature,
    pub score: f64,
    pub comparator: Comparator,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Qualified,
    Pruned { stage: Stage, failed: Vec<FailedLeaf> },
}

impl Verdict {
    /// Annotation such as `pruned (fact 0.44 < 0.65) at second pruning`,
    /// scores printed with `digits` decimals.
    pub fn describe(&self, digits: usize) -> String {
        match self {
            Verdict::Qualified => "qualified".to_string(),
            Verdict::Pruned { stage, failed } => {
                let stage = match stage {
                    Stage::First => "first",
                    Stage::Second => "second",
                };
                let reasons: Vec<String> = failed
                    .iter()
                    .map(|l| {
                        format!(
                            "{} {:.d$} {} {:.d$}",
                            l.feature.short(),
                            l.score,
                            l.comparator.negated_symbol(),
                            l.bound,
                            d = digits
                        )
                    })
                    .collect();
                format!("pruned ({}) at {stage} pruning", reasons.join(", "))
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe(2))
    }
}

/// A non-empty combination of queried sources.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative {
    pub label: String,
    /// Member source ids, ascending.
    pub members: Vec<SourceId>,
    pub vector: QualityVector,
    pub qualified: bool,
    pub verdict: Verdict,
}

/// Everything the planner produced for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Number of projected columns, the divisor of the scaled aggregates.
    pub projected: usize,
    pub sources: Vec<QueriedSourceProfile>,
    pub alternatives: Vec<Alternative>,
}

impl Plan {
    pub fn qualified(&self) -> impl Iterator<Item = &Alternative> {
        self.alternatives.iter().filter(|a| a.qualified)
    }

    pub fn source(&self, id: SourceId) -> Option<&QueriedSourceProfile> {
        self.sources.iter().find(|s| s.source_id == id)
    }

    pub fn alternative(&self, label: &str) -> Option<&Alternative> {
        self.alternatives.iter().find(|a| a.label == label)
    }
}

/// One profile per source that maps at least one projected column, in
/// source id order. Vectors are left at zero.
pub fn resolve_sources(catalog: &Catalog, columns: &[GlobalColumnId]) -> Result<Vec<QueriedSourceProfile>> {
    let mut out = Vec::new();
    for s in catalog.sources() {
        let participation: Vec<Participation> = columns
            .iter()
            .filter_map(|g| catalog.source_column_for(s.source_id, *g))
            .map(|m| Participation {
                gs_column_id: m.gs_column_id,
                column_id: m.column_id,
                mapping_id: m.mapping_id,
            })
            .collect();
        if !participation.is_empty() {
            out.push(QueriedSourceProfile {
                source_id: s.source_id,
                name: s.name.clone(),
                participation,
                vector: QualityVector::default(),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::NoCandidateSources);
    }
    out.sort_by_key(|p| p.source_id);
    Ok(out)
}

/// Query-scoped vector of one queried source over `projected` columns.
pub fn profile_queried_source(catalog: &Catalog, profile: &QueriedSourceProfile, projected: usize, precision: Precision) -> Result<QualityVector> {
    let mut columns = Vec::with_capacity(profile.participation.len());
    for p in &profile.participation {
        let m = catalog
            .mappings()
            .iter()
            .find(|m| m.mapping_id == p.mapping_id)
            .ok_or_else(|| Error::StaleAssessment(p.mapping_id.to_string()))?;
        match &m.profile {
            Some(c) if !m.stale => columns.push(precision.apply_vector(c.quality())),
            _ => {
                let col = catalog.column(m.column_id).map(|c| c.name.clone()).unwrap_or_default();
                return Err(Error::StaleAssessment(format!("{} ({col})", m.mapping_id)));
            }
        }
    }
    let feature = |f: Feature| columns.iter().map(|v| v.get(f)).collect::<Vec<_>>();
    let v = QualityVector::new(
        scaled_aggregate(&feature(Feature::FactCompleteness), projected)?,
        scaled_aggregate(&feature(Feature::Validity), projected)?,
        scaled_aggregate(&feature(Feature::Accuracy), projected)?,
        max_aggregate(&feature(Feature::Timeliness))?,
    );
    Ok(precision.apply_vector(v))
}

/// All non-empty subsets of `0..n` by size, then lexicographically.
pub fn form_alternatives(n: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::NoCandidateSources);
    }
    if n > cap {
        return Err(Error::TooManySources { count: n, cap });
    }
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for size in 1..=n {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            // advance to the next combination in lexicographic order
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Mean of fact-completeness, validity and accuracy; maximum timeliness.
pub fn aggregate_alternative(members: &[QualityVector]) -> Result<QualityVector> {
    if members.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = members.len() as f64;
    let mean = |f: Feature| members.iter().map(|v| v.get(f)).sum::<f64>() / n;
    Ok(QualityVector::new(
        mean(Feature::FactCompleteness),
        mean(Feature::Validity),
        mean(Feature::Accuracy),
        max_aggregate(&members.iter().map(|v| v.timeliness).collect::<Vec<_>>())?,
    ))
}

/// Builds labelled, aggregated alternatives from queried-source profiles.
/// Every alternative starts out qualified.
pub fn build_alternatives(profiles: &[QueriedSourceProfile], cap: usize, precision: Precision) -> Result<Vec<Alternative>> {
    let subsets = form_alternatives(profiles.len(), cap)?;
    subsets
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            let vectors: Vec<QualityVector> = set.iter().map(|&m| profiles[m].vector).collect();
            let mut members: Vec<SourceId> = set.iter().map(|&m| profiles[m].source_id).collect();
            members.sort();
            Ok(Alternative {
                label: format!("Alternative{}", i + 1),
                members,
                vector: precision.apply_vector(aggregate_alternative(&vectors)?),
                qualified: true,
                verdict: Verdict::Qualified,
            })
        })
        .collect()
}

fn failed_leaves(goal: &Goal, v: &QualityVector) -> Vec<FailedLeaf> {
    goal.leaves()
        .into_iter()
        .filter(|l| !l.holds(v))
        .map(|l| FailedLeaf {
            feature: l.feature,
            score: v.get(l.feature),
            comparator: l.comparator,
            bound: match l.bound {
                Bound::Value(b) => b,
                Bound::Term(_) => f64::NAN,
            },
        })
        .collect()
}

/// Applies the goal in two stages: singletons are checked on their source
/// vector, then multi-member alternatives on their aggregated vector. With
/// `first_stage` false every alternative is checked in the second stage.
///
/// Returns an error when nothing qualifies: `UnsatisfiableGoal` for a
/// conjunctive or single-leaf goal, `EmptyRanking` for a disjunctive one.
pub fn prune_with(alternatives: &mut [Alternative], goal: Option<&Goal>, first_stage: bool) -> Result<()> {
    let Some(goal) = goal else {
        for a in alternatives.iter_mut() {
            a.qualified = true;
            a.verdict = Verdict::Qualified;
        }
        return Ok(());
    };
    let check = |a: &mut Alternative, stage: Stage| {
        a.qualified = goal.holds(&a.vector);
        a.verdict = if a.qualified {
            Verdict::Qualified
        } else {
            Verdict::Pruned {
                stage,
                failed: failed_leaves(goal, &a.vector),
            }
        };
    };
    if first_stage {
        for a in alternatives.iter_mut().filter(|a| a.members.len() == 1) {
            check(a, Stage::First);
        }
    }
    for a in alternatives.iter_mut().filter(|a| !first_stage || a.members.len() > 1) {
        check(a, Stage::Second);
    }
    if alternatives.iter().any(|a| a.qualified) {
        Ok(())
    } else if matches!(goal, Goal::Or(_)) {
        Err(Error::EmptyRanking)
    } else {
        Err(Error::UnsatisfiableGoal)
    }
}

pub fn prune(alternatives: &mut [Alternative], goal: Option<&Goal>) -> Result<()> {
    prune_with(alternatives, goal, true)
}

/// Settings that shape a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanConfig {
    pub max_sources: usize,
    pub precision: Precision,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            max_sources: DEFAULT_MAX_SOURCES,
            precision: Precision::Full,
        }
    }
}

/// Resolves, profiles and forms alternatives without pruning.
pub fn plan(catalog: &Catalog, columns: &[GlobalColumnId], config: &PlanConfig) -> Result<Plan> {
    if columns.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let mut sources = resolve_sources(catalog, columns)?;
    if sources.len() > config.max_sources {
        return Err(Error::TooManySources {
            count: sources.len(),
            cap: config.max_sources,
        });
    }
    for s in sources.iter_mut() {
        s.vector = profile_queried_source(catalog, s, columns.len(), config.precision)?;
    }
    let alternatives = build_alternatives(&sources, config.max_sources, config.precision)?;
    Ok(Plan {
        projected: columns.len(),
        sources,
        alternatives,
    })
}
