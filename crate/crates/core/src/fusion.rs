//! Duplicate detection, field-level fusion and re-assessment of
//! multi-source answers.
//!
//! Records are matched by exact equality of their canonical key. Within a
//! cluster each field takes the non-null value of the source whose column
//! scores best on (fact-completeness, validity, accuracy, timeliness), the
//! lower source id winning a complete tie. The fused relation is then
//! scored with the same keyed-column assessment used for sources.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::assessor::{assess_keyed_column, canonical_key, max_aggregate, reference_key_layout, require_reference, scaled_aggregate, Key, ReferenceIndex};
use crate::catalog::{Catalog, Cell, GlobalColumnId, GlobalTableId, SourceId};
use crate::error::{Error, Result};
use crate::planner::{Alternative, Plan};
use crate::quality::{Feature, Precision, QualityVector};

/// One source row restricted to the fused columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberRecord {
    pub source_id: SourceId,
    /// Canonical key, `None` when a key cell is null.
    pub key: Option<Key>,
    /// One cell per fused column; `None` also where the source lacks it.
    pub values: Vec<Cell>,
}

/// Records sharing a key. Records with a null key form singleton
/// clusters with `key == None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub key: Option<Key>,
    pub records: Vec<MemberRecord>,
}

impl Cluster {
    pub fn is_unmatched(&self) -> bool {
        self.key.is_none()
    }
}

/// Clusters records by key, in order of first appearance.
pub fn match_duplicates(records: Vec<MemberRecord>) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut by_key: HashMap<Key, usize> = HashMap::new();
    for r in records {
        match &r.key {
            Some(k) => match by_key.get(k) {
                Some(&i) => clusters[i].records.push(r),
                None => {
                    by_key.insert(k.clone(), clusters.len());
                    clusters.push(Cluster {
                        key: Some(k.clone()),
                        records: vec![r],
                    });
                }
            },
            None => clusters.push(Cluster { key: None, records: vec![r] }),
        }
    }
    clusters
}

/// A fused tuple with the source of every chosen value.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedTuple {
    pub key: Option<Key>,
    pub values: Vec<Cell>,
    pub provenance: Vec<Option<SourceId>>,
}

fn better(a: (&QualityVector, SourceId), b: (&QualityVector, SourceId)) -> Ordering {
    for f in Feature::ALL {
        match b.0.get(f).total_cmp(&a.0.get(f)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.1.cmp(&b.1)
}

/// Fuses one cluster. `field_quality(source, field)` gives the quality of
/// the source column feeding `field`.
pub fn fuse_cluster(cluster: &Cluster, field_quality: &dyn Fn(SourceId, usize) -> Option<QualityVector>) -> FusedTuple {
    let width = cluster.records.first().map_or(0, |r| r.values.len());
    let mut values = Vec::with_capacity(width);
    let mut provenance = Vec::with_capacity(width);
    for field in 0..width {
        let best = cluster
            .records
            .iter()
            .filter(|r| r.values[field].is_some())
            .map(|r| (r, field_quality(r.source_id, field).unwrap_or_default()))
            .min_by(|(ra, qa), (rb, qb)| better((qa, ra.source_id), (qb, rb.source_id)));
        match best {
            Some((r, _)) => {
                values.push(r.values[field].clone());
                provenance.push(Some(r.source_id));
            }
            None => {
                values.push(None);
                provenance.push(None);
            }
        }
    }
    FusedTuple {
        key: cluster.key.clone(),
        values,
        provenance,
    }
}

/// Fused rows of one global table.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedRelation {
    pub gs_table_id: GlobalTableId,
    pub columns: Vec<GlobalColumnId>,
    pub tuples: Vec<FusedTuple>,
    /// Re-assessed quality of each column, aligned with `columns`.
    pub column_quality: Vec<QualityVector>,
}

/// The fused answer of one alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedAnswer {
    pub label: String,
    pub relations: Vec<FusedRelation>,
    /// Query-scoped vector recomputed from the fused relations.
    pub vector: QualityVector,
}

/// Fused column quality: fact, validity and accuracy measured on the fused
/// values, timeliness the best of the contributing source columns.
pub fn reassess_column(
    tuples: &[FusedTuple],
    field: usize,
    reference: &ReferenceIndex<'_>,
    reference_column: usize,
    rule: &crate::catalog::DomainRule,
    timeliness: f64,
) -> Result<QualityVector> {
    let rows: Vec<(Option<Key>, Cell)> = tuples.iter().map(|t| (t.key.clone(), t.values[field].clone())).collect();
    let s = assess_keyed_column(&rows, reference, reference_column, rule)?;
    Ok(QualityVector::new(s.fact_completeness, s.validity, s.accuracy, timeliness))
}

/// Retrieves, clusters, fuses and re-assesses the rows of every member of
/// `alternative` for the projected `columns`.
pub fn fuse_alternative(catalog: &Catalog, plan: &Plan, alternative: &Alternative, columns: &[GlobalColumnId], precision: Precision) -> Result<FusedAnswer> {
    // Projected columns grouped by global table, first appearance order.
    let mut tables: Vec<(GlobalTableId, Vec<GlobalColumnId>)> = Vec::new();
    for c in columns {
        let t = catalog.global_column(*c)?.gs_table_id;
        match tables.iter_mut().find(|(id, _)| *id == t) {
            Some((_, cols)) => cols.push(*c),
            None => tables.push((t, vec![*c])),
        }
    }

    let mut relations = Vec::new();
    let mut per_column = Vec::new();
    for (gtable, cols) in tables {
        let reference = require_reference(catalog, gtable)?;
        let (ref_key_pos, key_rules, key_ids) = reference_key_layout(catalog, gtable);
        let index = ReferenceIndex::new(reference, &ref_key_pos, &key_rules);

        let mut records = Vec::new();
        let mut quality: HashMap<(SourceId, usize), QualityVector> = HashMap::new();
        for &member in &alternative.members {
            let Some(source) = plan.source(member) else { continue };
            let supplied: Vec<(usize, crate::catalog::ColumnId)> = cols
                .iter()
                .enumerate()
                .filter_map(|(i, g)| source.participation.iter().find(|p| p.gs_column_id == *g).map(|p| (i, p.column_id)))
                .collect();
            let Some(&(_, first)) = supplied.first() else { continue };
            let table_id = catalog.column(first)?.table_id;
            let relation = catalog.relation(table_id)?;

            let mut key_pos = Vec::new();
            for kid in &key_ids {
                let col = catalog
                    .source_column_for(member, *kid)
                    .and_then(|m| catalog.column(m.column_id).ok())
                    .filter(|c| c.table_id == table_id)
                    .ok_or_else(|| Error::MissingKey {
                        source_name: source.name.clone(),
                        key: catalog.global_column(*kid).map(|c| c.name.clone()).unwrap_or_default(),
                    })?;
                key_pos.push(relation.column_index(&col.name).expect("relation holds its columns"));
            }
            let mut value_pos = vec![None; cols.len()];
            for &(i, cid) in &supplied {
                let c = catalog.column(cid)?;
                if c.table_id != table_id {
                    continue;
                }
                value_pos[i] = relation.column_index(&c.name);
                if let Some(p) = catalog.mapping_for_column(cid).and_then(|m| m.profile.as_ref()) {
                    quality.insert((member, i), precision.apply_vector(p.quality()));
                }
            }
            for row in &relation.rows {
                records.push(MemberRecord {
                    source_id: member,
                    key: canonical_key(row, &key_pos, &key_rules),
                    values: value_pos.iter().map(|p| p.and_then(|p| row[p].clone())).collect(),
                });
            }
        }

        if records.is_empty() && quality.is_empty() {
            continue;
        }
        let clusters = match_duplicates(records);
        let lookup = |s: SourceId, f: usize| quality.get(&(s, f)).copied();
        let tuples: Vec<FusedTuple> = clusters.iter().map(|c| fuse_cluster(c, &lookup)).collect();

        let mut column_quality = Vec::with_capacity(cols.len());
        for (i, g) in cols.iter().enumerate() {
            let gcol = catalog.global_column(*g)?;
            let ref_col = catalog
                .global_columns_of(gtable)
                .position(|c| c.gs_column_id == *g)
                .expect("column of its table");
            let contributing: Vec<f64> = quality
                .iter()
                .filter(|((_, f), _)| *f == i)
                .map(|(_, q)| q.timeliness)
                .collect();
            if contributing.is_empty() {
                column_quality.push(QualityVector::default());
                continue;
            }
            let v = reassess_column(&tuples, i, &index, ref_col, &gcol.domain_rule, max_aggregate(&contributing)?)?;
            let v = precision.apply_vector(v);
            per_column.push(v);
            column_quality.push(v);
        }
        relations.push(FusedRelation {
            gs_table_id: gtable,
            columns: cols,
            tuples,
            column_quality,
        });
    }

    let feature = |f: Feature| per_column.iter().map(|v| v.get(f)).collect::<Vec<_>>();
    let vector = QualityVector::new(
        scaled_aggregate(&feature(Feature::FactCompleteness), columns.len())?,
        scaled_aggregate(&feature(Feature::Validity), columns.len())?,
        scaled_aggregate(&feature(Feature::Accuracy), columns.len())?,
        max_aggregate(&feature(Feature::Timeliness))?,
    );
    Ok(FusedAnswer {
        label: alternative.label.clone(),
        relations,
        vector: precision.apply_vector(vector),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(source: u32, key: Option<&str>, values: &[Option<&str>]) -> MemberRecord {
        MemberRecord {
            source_id: SourceId(source),
            key: key.map(|k| vec![k.to_string()]),
            values: values.iter().map(|v| v.map(str::to_string)).collect(),
        }
    }

    #[test]
    fn clusters_by_key() {
        let c = match_duplicates(vec![
            rec(2, Some("1"), &[Some("a")]),
            rec(2, Some("2"), &[Some("b")]),
            rec(3, Some("1"), &[Some("c")]),
            rec(3, None, &[Some("d")]),
        ]);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].records.len(), 2);
        assert!(c[2].is_unmatched());

        let disjoint = match_duplicates(vec![rec(1, Some("1"), &[None]), rec(2, Some("2"), &[None])]);
        assert!(disjoint.iter().all(|c| c.records.len() == 1));
    }

    #[test]
    fn higher_scored_column_wins() {
        let q = |s: SourceId, _f: usize| {
            Some(if s == SourceId(2) {
                QualityVector::new(0.75, 0.75, 0.75, 0.92)
            } else {
                QualityVector::new(1.0, 1.0, 1.0, 0.67)
            })
        };
        let cluster = &match_duplicates(vec![rec(2, Some("1"), &[Some("Ahmed")]), rec(3, Some("1"), &[Some("Ahmad")])])[0];
        let t = fuse_cluster(cluster, &q);
        assert_eq!(t.values, vec![Some("Ahmad".to_string())]);
        assert_eq!(t.provenance, vec![Some(SourceId(3))]);
    }

    #[test]
    fn null_in_better_source_falls_back() {
        let q = |s: SourceId, _f: usize| Some(QualityVector::new(if s == SourceId(1) { 0.9 } else { 0.5 }, 0.5, 0.5, 0.5));
        let cluster = &match_duplicates(vec![
            rec(1, Some("7"), &[None, Some("x")]),
            rec(2, Some("7"), &[Some("y"), Some("z")]),
        ])[0];
        let t = fuse_cluster(cluster, &q);
        assert_eq!(t.values, vec![Some("y".to_string()), Some("x".to_string())]);
        assert_eq!(t.provenance, vec![Some(SourceId(2)), Some(SourceId(1))]);
    }

    #[test]
    fn full_tie_prefers_lower_source() {
        let q = |_: SourceId, _: usize| Some(QualityVector::new(0.5, 0.5, 0.5, 0.5));
        let cluster = &match_duplicates(vec![rec(4, Some("1"), &[Some("b")]), rec(2, Some("1"), &[Some("a")])])[0];
        assert_eq!(fuse_cluster(cluster, &q).provenance, vec![Some(SourceId(2))]);
    }

    #[test]
    fn single_record_is_identity() {
        let r = rec(1, Some("1"), &[Some("a"), None]);
        let t = fuse_cluster(&match_duplicates(vec![r.clone()])[0], &|_, _| None);
        assert_eq!(t.values, r.values);
    }
}
