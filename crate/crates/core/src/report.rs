//! Plain-text reports: aligned tables or one `key=value` record per line.

use std::fmt::Write;

use crate::catalog::{Catalog, SourceId};
use crate::config::OutputFormat;
use crate::engine::{QueryOutcome, Ranking};
use crate::planner::Plan;
use crate::quality::{Feature, QualityVector};
use crate::ranker::{FeatureList, RankedAnswer, TaOutcome};

/// A titled grid of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, headers: &[&str]) -> Self {
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        match format {
            OutputFormat::Table => {
                let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
                for r in &self.rows {
                    for (i, c) in r.iter().enumerate() {
                        width[i] = width[i].max(c.chars().count());
                    }
                }
                let line = |cells: &[String]| {
                    let s: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<w$}", w = width[i])).collect();
                    s.join("  ").trim_end().to_string()
                };
                let _ = writeln!(out, "{}", self.title);
                let _ = writeln!(out, "{}", line(&self.headers));
                let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
                let _ = writeln!(out, "{}", rule.join("  "));
                for r in &self.rows {
                    let _ = writeln!(out, "{}", line(r));
                }
            }
            OutputFormat::Records => {
                let _ = writeln!(out, "# {}", self.title);
                for r in &self.rows {
                    let fields: Vec<String> = self
                        .headers
                        .iter()
                        .zip(r)
                        .map(|(h, c)| {
                            if c.contains(char::is_whitespace) || c.is_empty() {
                                format!("{h}=\"{c}\"")
                            } else {
                                format!("{h}={c}")
                            }
                        })
                        .collect();
                    let _ = writeln!(out, "{}", fields.join(" "));
                }
            }
        }
        out
    }
}

pub fn score(v: f64, digits: usize) -> String {
    format!("{:.*}", digits, crate::quality::round_half_up(v, digits as u32))
}

fn vector_cells(v: &QualityVector, digits: usize) -> Vec<String> {
    Feature::ALL.iter().map(|f| score(v.get(*f), digits)).collect()
}

fn source_name(catalog: &Catalog, id: SourceId) -> String {
    catalog.source(id).map(|s| s.name.clone()).unwrap_or_else(|_| id.to_string())
}

fn members(catalog: &Catalog, ids: &[SourceId]) -> String {
    ids.iter().map(|i| source_name(catalog, *i)).collect::<Vec<_>>().join("+")
}

/// The column profile of every mapping.
pub fn assessment(catalog: &Catalog, digits: usize) -> Table {
    let mut t = Table::new(
        match catalog.assessed_as_of() {
            Some(d) => format!("column assessment as of {}", crate::dates::format_dmy(d)),
            None => "column assessment".to_string(),
        },
        &[
            "mapping",
            "source",
            "table",
            "column",
            "column_id",
            "global",
            "gs_column_id",
            "population",
            "incompleteness",
            "fact",
            "validity",
            "accuracy",
            "timeliness",
        ],
    );
    for m in catalog.mappings() {
        let column = catalog.column(m.column_id).ok();
        let table = column.and_then(|c| catalog.table(c.table_id).ok());
        let global = catalog.global_column(m.gs_column_id).ok();
        let gtable = global.and_then(|g| catalog.global_table(g.gs_table_id).ok());
        let mut row = vec![
            m.mapping_id.to_string(),
            table.map(|t| source_name(catalog, t.source_id)).unwrap_or_default(),
            table.map(|t| t.name.clone()).unwrap_or_default(),
            column.map(|c| c.name.clone()).unwrap_or_default(),
            m.column_id.to_string(),
            match (gtable, global) {
                (Some(t), Some(g)) => format!("{}.{}", t.name, g.name),
                _ => String::new(),
            },
            m.gs_column_id.to_string(),
        ];
        match (&m.profile, m.stale) {
            (Some(p), false) => {
                row.push(score(p.population_completeness, digits));
                row.push(score(p.incompleteness, digits));
                row.extend(vector_cells(&p.quality(), digits));
            }
            _ => row.extend(std::iter::repeat_n("-".to_string(), 6)),
        }
        t.push(row);
    }
    t
}

/// Queried sources with the columns they supply and their vectors.
pub fn queried_sources(catalog: &Catalog, plan: &Plan, digits: usize) -> Table {
    let mut t = Table::new(
        format!("queried sources (M = {})", plan.projected),
        &["source", "columns", "fact", "validity", "accuracy", "timeliness"],
    );
    for s in &plan.sources {
        let cols: Vec<String> = s
            .participation
            .iter()
            .map(|p| catalog.global_column(p.gs_column_id).map(|c| c.name.clone()).unwrap_or_default())
            .collect();
        let mut row = vec![s.name.clone(), cols.join(",")];
        row.extend(vector_cells(&s.vector, digits));
        t.push(row);
    }
    t
}

/// Every alternative with its aggregated vector and pruning verdict.
pub fn alternatives(catalog: &Catalog, plan: &Plan, digits: usize) -> Table {
    let mut t = Table::new(
        "alternatives",
        &["alternative", "members", "fact", "validity", "accuracy", "timeliness", "verdict"],
    );
    for a in &plan.alternatives {
        let mut row = vec![a.label.clone(), members(catalog, &a.members)];
        row.extend(vector_cells(&a.vector, digits));
        row.push(a.verdict.describe(digits));
        t.push(row);
    }
    t
}

/// Sorted per-feature lists of the qualified alternatives.
pub fn feature_lists(plan: &Plan, features: &[Feature], digits: usize) -> Vec<Table> {
    let qualified: Vec<_> = plan.qualified().cloned().collect();
    features
        .iter()
        .map(|f| {
            let mut t = Table::new(format!("list {f}"), &["position", "alternative", "score"]);
            for (i, (a, s)) in FeatureList::new(&qualified, *f).entries.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), qualified[*a].label.clone(), score(*s, digits)]);
            }
            t
        })
        .collect()
}

fn answers_table(catalog: &Catalog, title: String, answers: &[RankedAnswer], digits: usize) -> Table {
    let mut t = Table::new(
        title,
        &["rank", "alternative", "members", "fact", "validity", "accuracy", "timeliness", "score"],
    );
    for a in answers {
        let mut row = vec![a.rank.to_string(), a.label.clone(), members(catalog, &a.members)];
        row.extend(vector_cells(&a.scores, digits));
        row.push(score(a.total_score, digits));
        t.push(row);
    }
    t
}

pub fn ranking(catalog: &Catalog, ranking: &Ranking, heading: &str, digits: usize) -> Vec<Table> {
    match ranking {
        Ranking::PerFeature(lists) => lists
            .iter()
            .map(|(f, a)| answers_table(catalog, format!("{heading} by {f}"), a, digits))
            .collect(),
        Ranking::Single { feature, answers } => vec![answers_table(catalog, format!("{heading} by {feature}"), answers, digits)],
        Ranking::Combined { features, answers } => {
            let names: Vec<&str> = features.iter().map(|f| f.as_str()).collect();
            vec![answers_table(catalog, format!("{heading} by {}", names.join("+")), answers, digits)]
        }
    }
}

/// Threshold and buffer at every halting check, then the access counts.
pub fn ta_trace(ta: &TaOutcome, digits: usize) -> Table {
    let mut t = Table::new(
        format!(
            "threshold algorithm: depth {}, sorted accesses {}, random accesses {}",
            ta.stats.depth, ta.stats.sorted_accesses, ta.stats.random_accesses
        ),
        &["check", "threshold", "top_k"],
    );
    for step in &ta.trace {
        let buf: Vec<String> = step.top_k.iter().map(|(l, s)| format!("{l}:{}", score(*s, digits))).collect();
        t.push(vec![step.depth.to_string(), score(step.threshold, digits), buf.join(",")]);
    }
    t
}

/// Fused tuples of every answer with a provenance column per field.
pub fn answer_rows(catalog: &Catalog, outcome: &QueryOutcome) -> Vec<Table> {
    let mut out = Vec::new();
    for a in &outcome.answers {
        for rel in &a.relations {
            let table = catalog.global_table(rel.gs_table_id).map(|t| t.name.clone()).unwrap_or_default();
            let names: Vec<String> = rel
                .columns
                .iter()
                .map(|c| catalog.global_column(*c).map(|g| g.name.clone()).unwrap_or_default())
                .collect();
            let mut headers: Vec<String> = vec!["key".to_string()];
            headers.extend(names.iter().cloned());
            headers.extend(names.iter().map(|n| format!("{n}@")));
            let mut t = Table {
                title: format!("{} {table}", a.label),
                headers,
                rows: Vec::new(),
            };
            for tuple in &rel.tuples {
                let mut row = vec![tuple.key.as_ref().map(|k| k.join("|")).unwrap_or_else(|| "?".into())];
                row.extend(tuple.values.iter().map(|v| v.clone().unwrap_or_default()));
                row.extend(
                    tuple
                        .provenance
                        .iter()
                        .map(|p| p.map(|s| source_name(catalog, s)).unwrap_or_default()),
                );
                t.push(row);
            }
            out.push(t);
        }
    }
    out
}

pub fn render_all(tables: &[Table], format: OutputFormat) -> String {
    tables.iter().map(|t| t.render(format)).collect::<Vec<_>>().join("\n")
}
