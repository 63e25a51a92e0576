//! The quality-extended SQL dialect.
//!
//! ```text
//! SELECT SName, DOB FROM G
//! WITH AlternativeFactCompleteness >= 0.65 AND validity IS high
//! ORDER BY fact_completeness DESC
//! LIMIT 3
//! ```
//!
//! The full grammar is in `docs/query-grammar.md`.

mod ast;
mod lexer;
mod parser;

use std::collections::BTreeMap;

pub use ast::*;
pub use parser::parse;

use crate::catalog::{Catalog, GlobalColumnId, GlobalTableId};
use crate::error::{Error, Result};
use crate::quality::Feature;

/// Thresholds for qualitative terms, optionally per feature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermTable {
    entries: BTreeMap<(String, Option<Feature>), f64>,
}

impl TermTable {
    /// `high = 0.65`, `medium = 0.40`, `low = 0.0` for every feature.
    pub fn standard() -> Self {
        let mut t = Self::empty();
        t.define("high", None, 0.65);
        t.define("medium", None, 0.40);
        t.define("low", None, 0.0);
        t
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Defines `term`, for one feature or (with `None`) for all of them.
    pub fn define(&mut self, term: &str, feature: Option<Feature>, value: f64) {
        self.entries.insert((term.to_ascii_lowercase(), feature), value);
    }

    pub fn lookup(&self, term: &str, feature: Feature) -> Option<f64> {
        let term = term.to_ascii_lowercase();
        self.entries
            .get(&(term.clone(), Some(feature)))
            .or_else(|| self.entries.get(&(term, None)))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<Feature>, f64)> {
        self.entries.iter().map(|((t, f), v)| (t.as_str(), *f, *v))
    }
}

/// Replaces every qualitative leaf by `feature >= threshold`.
pub fn resolve_qualitative(goal: &Goal, terms: &TermTable) -> Result<Goal> {
    Ok(match goal {
        Goal::Leaf(c) => match &c.bound {
            Bound::Value(_) => goal.clone(),
            Bound::Term(t) => {
                let v = terms.lookup(t, c.feature).ok_or_else(|| Error::UnresolvedTerm {
                    feature: c.feature,
                    term: t.clone(),
                })?;
                Goal::Leaf(FeatureConstraint {
                    feature: c.feature,
                    comparator: c.comparator,
                    bound: Bound::Value(v),
                })
            }
        },
        Goal::And(gs) => Goal::And(gs.iter().map(|g| resolve_qualitative(g, terms)).collect::<Result<_>>()?),
        Goal::Or(gs) => Goal::Or(gs.iter().map(|g| resolve_qualitative(g, terms)).collect::<Result<_>>()?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    NoFeature,
    SingleFeature,
    MultiFeature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueStyle {
    Quantitative,
    Qualitative,
    Mixed,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryClass {
    pub kind: QueryKind,
    pub connective: Connective,
    pub value_style: ValueStyle,
}

fn connectives(goal: &Goal, and: &mut bool, or: &mut bool) {
    match goal {
        Goal::Leaf(_) => {}
        Goal::And(gs) => {
            *and = true;
            gs.iter().for_each(|g| connectives(g, and, or));
        }
        Goal::Or(gs) => {
            *or = true;
            gs.iter().for_each(|g| connectives(g, and, or));
        }
    }
}

/// Classifies a query by the shape of its quality goal. Goals that combine
/// AND and OR anywhere are rejected.
pub fn classify(query: &QualityQuery) -> Result<QueryClass> {
    let Some(goal) = &query.goal else {
        return Ok(QueryClass {
            kind: QueryKind::NoFeature,
            connective: Connective::None,
            value_style: ValueStyle::None,
        });
    };
    let (mut and, mut or) = (false, false);
    connectives(goal, &mut and, &mut or);
    let connective = match (and, or) {
        (true, true) => return Err(Error::UnsupportedGoalShape),
        (true, false) => Connective::And,
        (false, true) => Connective::Or,
        (false, false) => Connective::None,
    };
    let leaves = goal.leaves();
    let qualitative = leaves.iter().filter(|l| matches!(l.bound, Bound::Term(_))).count();
    let value_style = match qualitative {
        0 => ValueStyle::Quantitative,
        n if n == leaves.len() => ValueStyle::Qualitative,
        _ => ValueStyle::Mixed,
    };
    Ok(QueryClass {
        kind: if leaves.len() == 1 {
            QueryKind::SingleFeature
        } else {
            QueryKind::MultiFeature
        },
        connective,
        value_style,
    })
}

/// A query with its column names resolved against the global schema.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub query: QualityQuery,
    pub class: QueryClass,
    /// Projected global columns in `SELECT` order.
    pub columns: Vec<GlobalColumnId>,
    /// Global table the selection applies to, if any.
    pub selection_table: Option<GlobalTableId>,
}

/// Resolves projected and selected names and classifies the goal.
pub fn bind(catalog: &Catalog, query: QualityQuery) -> Result<BoundQuery> {
    if query.projection.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let mut columns = Vec::new();
    for name in &query.projection {
        let c = catalog.resolve_global_column(name)?.gs_column_id;
        if !columns.contains(&c) {
            columns.push(c);
        }
    }
    let mut selection_table = None;
    if let Some(p) = &query.selection {
        for name in p.columns() {
            let t = catalog.resolve_global_column(name)?.gs_table_id;
            match selection_table {
                None => selection_table = Some(t),
                Some(prev) if prev != t => return Err(Error::CrossTablePredicate),
                _ => {}
            }
        }
    }
    let class = classify(&query)?;
    Ok(BoundQuery {
        query,
        class,
        columns,
        selection_table,
    })
}
