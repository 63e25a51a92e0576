//! The end-to-end pipeline: assess, plan, prune, rank, fuse, re-rank.

use std::sync::Arc;

use chrono::NaiveDate;

use crate::assessor::{assess_mapping_table, AssessConfig, Assessment};
use crate::catalog::{Catalog, GlobalTableId};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fusion::{fuse_alternative, FusedAnswer};
use crate::planner::{self, Alternative, Plan, PlanConfig};
use crate::quality::Feature;
use crate::query::{self, BoundQuery, Goal, QueryKind};
use crate::ranker::{rank_all_features, rank_single_feature, ta_rank, RankedAnswer, TaOutcome};

/// Assesses every mapping as of `as_of` and stores the profiles.
pub fn assess_catalog(catalog: &mut Catalog, as_of: NaiveDate, config: &RunConfig) -> Result<Assessment> {
    if catalog.sources().is_empty() {
        return Err(Error::NoSources);
    }
    let assessment = assess_mapping_table(
        catalog,
        as_of,
        &AssessConfig {
            age_mode: config.age_mode,
        },
    )?;
    catalog.store_profiles(&assessment.profiles, as_of);
    Ok(assessment)
}

/// A ranking in the shape dictated by the query class.
#[derive(Debug, Clone, PartialEq)]
pub enum Ranking {
    /// No quality goal: one list per feature.
    PerFeature(Vec<(Feature, Vec<RankedAnswer>)>),
    /// One goal feature.
    Single { feature: Feature, answers: Vec<RankedAnswer> },
    /// Several goal features combined by the scoring function.
    Combined { features: Vec<Feature>, answers: Vec<RankedAnswer> },
}

impl Ranking {
    /// Labels in the ranking, first appearance order.
    pub fn labels(&self) -> Vec<&str> {
        let all: Vec<&RankedAnswer> = match self {
            Ranking::PerFeature(lists) => lists.iter().flat_map(|(_, a)| a).collect(),
            Ranking::Single { answers, .. } | Ranking::Combined { answers, .. } => answers.iter().collect(),
        };
        let mut out: Vec<&str> = Vec::new();
        for r in all {
            if !out.contains(&r.label.as_str()) {
                out.push(&r.label);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    pub fusion: bool,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self { fusion: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub query: BoundQuery,
    /// Goal after qualitative terms were replaced by thresholds.
    pub goal: Option<Goal>,
    pub plan: Plan,
    /// Ranking of the qualified alternatives before fusion.
    pub ranking: Ranking,
    pub ta: Option<TaOutcome>,
    /// Fused answers of the ranked alternatives, WHERE applied.
    pub answers: Vec<FusedAnswer>,
    /// Ranking after re-assessment of fused answers.
    pub final_ranking: Option<Ranking>,
}

pub struct Engine {
    catalog: Arc<Catalog>,
    config: RunConfig,
}

impl Engine {
    pub fn new(catalog: Arc<Catalog>, config: RunConfig) -> Self {
        Self { catalog, config }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Parses, binds and resolves a query without planning it.
    pub fn prepare(&self, text: &str) -> Result<(BoundQuery, Option<Goal>)> {
        let parsed = query::parse(text)?;
        let bound = query::bind(&self.catalog, parsed)?;
        let goal = match &bound.query.goal {
            Some(g) => Some(query::resolve_qualitative(g, &self.config.terms)?),
            None => None,
        };
        if let Some(p) = &bound.query.selection {
            for name in p.columns() {
                let id = self.catalog.resolve_global_column(name)?.gs_column_id;
                if !bound.columns.contains(&id) {
                    return Err(Error::UnknownColumn(format!("{name} (selection columns must also be projected)")));
                }
            }
        }
        self.config.scoring.validate()?;
        Ok((bound, goal))
    }

    pub fn run(&self, text: &str, options: QueryOptions) -> Result<QueryOutcome> {
        let (bound, goal) = self.prepare(text)?;
        let mut plan = planner::plan(
            &self.catalog,
            &bound.columns,
            &PlanConfig {
                max_sources: self.config.max_sources,
                precision: self.config.precision,
            },
        )?;
        planner::prune(&mut plan.alternatives, goal.as_ref())?;
        let qualified: Vec<Alternative> = plan.qualified().cloned().collect();
        let (ranking, ta) = self.rank(&bound, goal.as_ref(), &qualified)?;

        let mut answers = Vec::new();
        let mut final_ranking = None;
        if options.fusion {
            let top: Vec<&str> = ranking.labels();
            let mut reassessed: Vec<Alternative> = Vec::with_capacity(top.len());
            for label in top {
                let alt = plan.alternative(label).expect("ranked alternative is planned");
                let fused = fuse_alternative(&self.catalog, &plan, alt, &bound.columns, self.config.precision)?;
                let mut updated = alt.clone();
                if alt.members.len() > 1 {
                    updated.vector = fused.vector;
                }
                reassessed.push(updated);
                answers.push(fused);
            }
            if let Some(p) = &bound.query.selection {
                let table = bound.selection_table.expect("bound selection has a table");
                for a in answers.iter_mut() {
                    self.filter(a, table, p)?;
                }
            }
            final_ranking = Some(self.rank(&bound, goal.as_ref(), &reassessed)?.0);
        }
        Ok(QueryOutcome {
            query: bound,
            goal,
            plan,
            ranking,
            ta,
            answers,
            final_ranking,
        })
    }

    fn rank(&self, bound: &BoundQuery, goal: Option<&Goal>, alts: &[Alternative]) -> Result<(Ranking, Option<TaOutcome>)> {
        let k = bound.query.limit;
        match (bound.class.kind, goal) {
            (QueryKind::SingleFeature, Some(g)) => {
                let feature = g.features()[0];
                Ok((
                    Ranking::Single {
                        feature,
                        answers: rank_single_feature(alts, feature, k)?,
                    },
                    None,
                ))
            }
            (QueryKind::MultiFeature, Some(g)) => {
                let features = g.features();
                let out = ta_rank(alts, &features, &self.config.scoring, k.unwrap_or(alts.len()))?;
                Ok((
                    Ranking::Combined {
                        features,
                        answers: out.ranking.clone(),
                    },
                    Some(out),
                ))
            }
            _ => {
                let mut lists = rank_all_features(alts, k)?;
                // ORDER BY features are listed first
                let order: Vec<Feature> = bound.query.order_by.iter().map(|o| o.feature).collect();
                lists.sort_by_key(|(f, _)| order.iter().position(|o| o == f).unwrap_or(order.len()));
                Ok((Ranking::PerFeature(lists), None))
            }
        }
    }

    fn filter(&self, answer: &mut FusedAnswer, table: GlobalTableId, predicate: &query::Predicate) -> Result<()> {
        let Some(rel) = answer.relations.iter_mut().find(|r| r.gs_table_id == table) else {
            return Ok(());
        };
        let mut positions = Vec::new();
        for name in predicate.columns() {
            let id = self.catalog.resolve_global_column(name)?.gs_column_id;
            positions.push((name.to_string(), rel.columns.iter().position(|c| *c == id)));
        }
        rel.tuples.retain(|t| {
            let lookup = |n: &str| {
                positions
                    .iter()
                    .find(|(name, _)| name == n)
                    .and_then(|(_, p)| *p)
                    .and_then(|p| t.values[p].as_deref())
            };
            predicate.eval(&lookup)
        });
        Ok(())
    }
}
