//! Quality metrics at attribute, relation and query scope.
//!
//! Column metrics are measured against the reference relation of the
//! column's global table, and every ratio uses the reference cardinality as
//! its denominator. Because a value can only be accurate if it is valid and
//! only valid if it is present, this gives
//! `fact_completeness >= validity >= accuracy` for every column.

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Cell, ColumnId, DomainRule, GlobalColumnId, GlobalTableId, MappingId, ReferenceRelation};
use crate::dates::{age_days, AgeMode};
use crate::error::{Error, Result};
use crate::quality::QualityVector;

/// Canonicalised key tuple.
pub type Key = Vec<String>;

/// Assessed scores of one source column against its global column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub mapping_id: MappingId,
    pub column_id: ColumnId,
    pub gs_column_id: GlobalColumnId,
    pub population_completeness: f64,
    pub incompleteness: f64,
    pub fact_completeness: f64,
    pub validity: f64,
    pub accuracy: f64,
    pub timeliness: f64,
}

impl ColumnProfile {
    pub fn quality(&self) -> QualityVector {
        QualityVector::new(self.fact_completeness, self.validity, self.accuracy, self.timeliness)
    }

    /// Null completeness of the represented rows, `1 - incompleteness`
    /// when the population is complete.
    pub fn null_completeness(&self) -> f64 {
        1.0 - self.incompleteness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelinessInput {
    pub input_time: NaiveDate,
    pub delivery_time: NaiveDate,
    pub volatility_days: u32,
    pub age_mode: AgeMode,
}

// ---- attribute-level metrics ----

/// Share of non-null values. An empty list is vacuously complete.
pub fn null_completeness(values: &[Cell]) -> f64 {
    if values.is_empty() {
        return 1.0;
    }
    values.iter().filter(|v| v.is_some()).count() as f64 / values.len() as f64
}

/// Share of null values; `null_completeness + null_ratio == 1`.
pub fn null_ratio(values: &[Cell]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|v| v.is_none()).count() as f64 / values.len() as f64
}

fn reference_denominator(reference_cardinality: usize) -> Result<f64> {
    if reference_cardinality == 0 {
        return Err(Error::EmptyReference("reference cardinality is zero".into()));
    }
    Ok(reference_cardinality as f64)
}

/// Distinct reference keys present in the relation over the reference
/// cardinality.
pub fn population_completeness<'a>(relation_keys: impl IntoIterator<Item = &'a Key>, reference_keys: &HashSet<Key>) -> Result<f64> {
    let denom = reference_denominator(reference_keys.len())?;
    let matched: HashSet<&Key> = relation_keys.into_iter().filter(|k| reference_keys.contains(*k)).collect();
    Ok(matched.len() as f64 / denom)
}

/// Null values of the column over the reference cardinality.
pub fn incompleteness(values: &[Cell], reference_cardinality: usize) -> Result<f64> {
    let denom = reference_denominator(reference_cardinality)?;
    Ok(values.iter().filter(|v| v.is_none()).count() as f64 / denom)
}

/// Population completeness minus incompleteness.
pub fn fact_completeness(population: f64, incompleteness: f64) -> Result<f64> {
    if incompleteness > population + 1e-12 {
        return Err(Error::InvariantViolation {
            pop: population,
            inc: incompleteness,
        });
    }
    Ok((population - incompleteness).max(0.0))
}

/// Non-null values satisfying the rule over the reference cardinality.
pub fn validity(values: &[Cell], rule: &DomainRule, reference_cardinality: usize) -> Result<f64> {
    let denom = reference_denominator(reference_cardinality)?;
    let valid = values.iter().flatten().filter(|v| rule.is_valid(v)).count();
    Ok(valid as f64 / denom)
}

/// A column value paired with the value its key links to in the reference
/// (`None` when no reference tuple matches or the reference value is null).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkedValue {
    pub value: Cell,
    pub reference: Option<String>,
}

/// 0/1 accuracy: values equal to their key-linked reference value over the
/// reference cardinality. Valid-but-different values count as inaccurate,
/// and so do invalid ones even if they happen to equal the reference.
pub fn accuracy(values: &[LinkedValue], rule: &DomainRule, reference_cardinality: usize) -> Result<f64> {
    let denom = reference_denominator(reference_cardinality)?;
    let accurate = values
        .iter()
        .filter(|lv| match (&lv.value, &lv.reference) {
            (Some(v), Some(r)) => rule.is_valid(v) && rule.canonical(v) == rule.canonical(r),
            _ => false,
        })
        .count();
    Ok(accurate as f64 / denom)
}

/// `max{0, 1 - currency / volatility}` with currency equal to the data age.
pub fn timeliness(t: &TimelinessInput) -> f64 {
    if t.volatility_days == 0 {
        return 0.0;
    }
    let currency = age_days(t.input_time, t.delivery_time, t.age_mode) as f64;
    (1.0 - currency / t.volatility_days as f64).max(0.0)
}

// ---- query-level aggregation ----

/// Sum of per-attribute scores over the number of queried attributes.
/// Attributes a source cannot supply are simply absent and count as 0.
pub fn scaled_aggregate(scores: &[f64], queried_attributes: usize) -> Result<f64> {
    if queried_attributes == 0 {
        return Err(Error::EmptyProjection);
    }
    debug_assert!(scores.len() <= queried_attributes);
    Ok(scores.iter().sum::<f64>() / queried_attributes as f64)
}

pub fn max_aggregate(scores: &[f64]) -> Result<f64> {
    scores.iter().copied().reduce(f64::max).ok_or(Error::EmptyInput)
}

// ---- keyed column assessment ----

/// Reference rows indexed by canonical key.
pub struct ReferenceIndex<'a> {
    reference: &'a ReferenceRelation,
    rows: HashMap<Key, usize>,
    keys: HashSet<Key>,
}

impl<'a> ReferenceIndex<'a> {
    /// `key_positions` are column positions in the reference, `key_rules`
    /// the matching domain rules.
    pub fn new(reference: &'a ReferenceRelation, key_positions: &[usize], key_rules: &[&DomainRule]) -> Self {
        let rows = reference
            .data
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| (canonical_key(row, key_positions, key_rules).expect("reference keys are non-null"), i))
            .collect::<HashMap<_, _>>();
        let keys = rows.keys().cloned().collect();
        Self { reference, rows, keys }
    }

    pub fn cardinality(&self) -> usize {
        self.reference.cardinality()
    }

    pub fn keys(&self) -> &HashSet<Key> {
        &self.keys
    }

    pub fn contains(&self, key: &Key) -> bool {
        self.rows.contains_key(key)
    }

    pub fn value(&self, key: &Key, column: usize) -> Option<&str> {
        self.rows
            .get(key)
            .and_then(|&i| self.reference.data.rows[i][column].as_deref())
    }
}

/// Canonical key of a row, `None` when any key cell is null.
pub fn canonical_key(row: &[Cell], positions: &[usize], rules: &[&DomainRule]) -> Option<Key> {
    positions
        .iter()
        .zip(rules)
        .map(|(&p, rule)| row[p].as_deref().map(|v| rule.canonical(v)))
        .collect()
}

/// Scores of one keyed column plus what could not be linked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScores {
    pub population_completeness: f64,
    pub incompleteness: f64,
    pub fact_completeness: f64,
    pub validity: f64,
    pub accuracy: f64,
    /// Rows whose key is null or absent from the reference.
    pub unmatched_rows: usize,
    /// Further rows repeating an already represented key.
    pub duplicate_rows: usize,
}

/// Assesses `(key, value)` rows of one column against the reference
/// column at `reference_column`. Only the first row of each reference key
/// represents it; unmatched and duplicate rows cannot raise any score.
pub fn assess_keyed_column(
    rows: &[(Option<Key>, Cell)],
    reference: &ReferenceIndex<'_>,
    reference_column: usize,
    rule: &DomainRule,
) -> Result<ColumnScores> {
    let card = reference.cardinality();
    let mut represented: HashMap<&Key, &Cell> = HashMap::new();
    let mut order: Vec<&Key> = Vec::new();
    let (mut unmatched, mut duplicates) = (0, 0);
    for (key, value) in rows {
        match key {
            Some(k) if reference.contains(k) => {
                if represented.contains_key(k) {
                    duplicates += 1;
                } else {
                    represented.insert(k, value);
                    order.push(k);
                }
            }
            _ => unmatched += 1,
        }
    }
    let values: Vec<Cell> = order.iter().map(|k| represented[k].clone()).collect();
    let linked: Vec<LinkedValue> = order
        .iter()
        .map(|k| LinkedValue {
            value: represented[k].clone(),
            reference: reference.value(k, reference_column).map(str::to_string),
        })
        .collect();

    let pop = population_completeness(order.iter().copied(), reference.keys())?;
    let inc = incompleteness(&values, card)?;
    Ok(ColumnScores {
        population_completeness: pop,
        incompleteness: inc,
        fact_completeness: fact_completeness(pop, inc)?,
        validity: validity(&values, rule, card)?,
        accuracy: accuracy(&linked, rule, card)?,
        unmatched_rows: unmatched,
        duplicate_rows: duplicates,
    })
}

// ---- mapping table ----

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssessConfig {
    pub age_mode: AgeMode,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            age_mode: AgeMode::ExactDays,
        }
    }
}

/// Rows that could not contribute to a mapping's scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub mapping_id: MappingId,
    pub unmatched_rows: usize,
    pub duplicate_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub profiles: Vec<ColumnProfile>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Positions and rules of a global table's key columns inside its
/// reference relation.
pub(crate) fn reference_key_layout(catalog: &Catalog, table: GlobalTableId) -> (Vec<usize>, Vec<&DomainRule>, Vec<GlobalColumnId>) {
    let mut pos = Vec::new();
    let mut rules = Vec::new();
    let mut ids = Vec::new();
    for (i, c) in catalog.global_columns_of(table).enumerate() {
        if c.is_key {
            pos.push(i);
            rules.push(&c.domain_rule);
            ids.push(c.gs_column_id);
        }
    }
    (pos, rules, ids)
}

pub(crate) fn require_reference(catalog: &Catalog, table: GlobalTableId) -> Result<&ReferenceRelation> {
    let name = catalog.global_table(table)?.name.clone();
    match catalog.reference(table) {
        Some(r) if r.cardinality() > 0 => Ok(r),
        _ => Err(Error::EmptyReference(name)),
    }
}

/// Assesses every mapping of the catalog as of `delivery_date`.
/// Mappings are independent and are assessed in parallel; the output keeps
/// the catalog's mapping order.
pub fn assess_mapping_table(catalog: &Catalog, delivery_date: NaiveDate, config: &AssessConfig) -> Result<Assessment> {
    let results: Vec<Result<(ColumnProfile, Diagnostic)>> = catalog
        .mappings()
        .par_iter()
        .map(|m| assess_mapping(catalog, m.mapping_id, delivery_date, config))
        .collect();
    let mut profiles = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::new();
    for r in results {
        let (p, d) = r?;
        profiles.push(p);
        if d.unmatched_rows > 0 || d.duplicate_rows > 0 {
            diagnostics.push(d);
        }
    }
    Ok(Assessment { profiles, diagnostics })
}

fn assess_mapping(catalog: &Catalog, mapping: MappingId, delivery: NaiveDate, config: &AssessConfig) -> Result<(ColumnProfile, Diagnostic)> {
    let m = catalog
        .mappings()
        .iter()
        .find(|x| x.mapping_id == mapping)
        .expect("mapping listed by catalog");
    let column = catalog.column(m.column_id)?;
    let table = catalog.table(column.table_id)?;
    let gcol = catalog.global_column(m.gs_column_id)?;
    let gtable = gcol.gs_table_id;
    let reference = require_reference(catalog, gtable)?;
    let (ref_key_pos, key_rules, key_ids) = reference_key_layout(catalog, gtable);

    // Source columns carrying the key, from the same source table.
    let mut src_key_pos = Vec::new();
    let relation = catalog.relation(table.table_id)?;
    for kid in &key_ids {
        let km = catalog
            .columns_of(table.table_id)
            .find(|c| catalog.mapping_for_column(c.column_id).map(|x| x.gs_column_id) == Some(*kid))
            .ok_or_else(|| Error::MissingKeyMapping {
                table: table.name.clone(),
                key: catalog.global_column(*kid).map(|c| c.name.clone()).unwrap_or_default(),
            })?;
        src_key_pos.push(relation.column_index(&km.name).expect("relation holds its columns"));
    }
    let value_pos = relation.column_index(&column.name).expect("relation holds its columns");
    let ref_col = catalog
        .global_columns_of(gtable)
        .position(|c| c.gs_column_id == gcol.gs_column_id)
        .expect("column of its table");

    let index = ReferenceIndex::new(reference, &ref_key_pos, &key_rules);
    let rows: Vec<(Option<Key>, Cell)> = relation
        .rows
        .iter()
        .map(|r| (canonical_key(r, &src_key_pos, &key_rules), r[value_pos].clone()))
        .collect();
    let s = assess_keyed_column(&rows, &index, ref_col, &gcol.domain_rule)?;
    let t = timeliness(&TimelinessInput {
        input_time: table.insertion_date,
        delivery_time: delivery,
        volatility_days: table.volatility_days,
        age_mode: config.age_mode,
    });
    Ok((
        ColumnProfile {
            mapping_id: m.mapping_id,
            column_id: m.column_id,
            gs_column_id: m.gs_column_id,
            population_completeness: s.population_completeness,
            incompleteness: s.incompleteness,
            fact_completeness: s.fact_completeness,
            validity: s.validity,
            accuracy: s.accuracy,
            timeliness: t,
        },
        Diagnostic {
            mapping_id: m.mapping_id,
            unmatched_rows: s.unmatched_rows,
            duplicate_rows: s.duplicate_rows,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{read_delimited_from, NullTokens};
    use crate::dates::parse_dmy;
    use crate::quality::round_half_up;

    fn cells(v: &[Option<&str>]) -> Vec<Cell> {
        v.iter().map(|c| c.map(str::to_string)).collect()
    }

    fn keys(v: &[&str]) -> HashSet<Key> {
        v.iter().map(|k| vec![k.to_string()]).collect()
    }

    #[test]
    fn null_completeness_cases() {
        assert_eq!(null_completeness(&cells(&[None, Some("a"), Some("b"), Some("c")])), 0.75);
        assert_eq!(null_completeness(&cells(&[Some("a"), Some("b")])), 1.0);
        assert_eq!(null_completeness(&cells(&[None, None, None])), 0.0);
        assert_eq!(null_completeness(&[]), 1.0);
    }

    #[test]
    fn population_cases() {
        let reference = keys(&["1", "2", "3"]);
        let rel: Vec<Key> = vec![vec!["1".into()], vec!["2".into()], vec!["3".into()]];
        assert_eq!(population_completeness(&rel, &reference).unwrap(), 1.0);
        assert_eq!(population_completeness(&Vec::<Key>::new(), &reference).unwrap(), 0.0);
        // 2 of 4 toy reference keys, with a repeat and a stray key.
        let toy = keys(&["a", "b", "c", "d"]);
        let rel: Vec<Key> = vec![vec!["a".into()], vec!["c".into()], vec!["a".into()], vec!["z".into()]];
        assert_eq!(population_completeness(&rel, &toy).unwrap(), 0.5);
        assert!(matches!(population_completeness(&rel, &HashSet::new()), Err(Error::EmptyReference(_))));
    }

    #[test]
    fn incompleteness_cases() {
        let v = incompleteness(&cells(&[Some("IS"), None, Some("Comp")]), 3).unwrap();
        assert_eq!(round_half_up(v, 2), 0.33);
        assert_eq!(incompleteness(&cells(&[Some("a")]), 3).unwrap(), 0.0);
        assert_eq!(incompleteness(&cells(&[None, None, Some("a"), Some("b")]), 4).unwrap(), 0.5);
        assert!(incompleteness(&[], 0).is_err());
    }

    #[test]
    fn fact_completeness_cases() {
        assert_eq!(fact_completeness(1.0, 0.25).unwrap(), 0.75);
        assert_eq!(fact_completeness(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(round_half_up(fact_completeness(1.0, 1.0 / 3.0).unwrap(), 2), 0.67);
        assert!(matches!(fact_completeness(0.5, 0.75), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn validity_cases() {
        let dname = DomainRule::parse("in:{IS,IT,CS}").unwrap();
        let ds1 = validity(&cells(&[Some("IS"), Some("IT"), Some("Computer Science")]), &dname, 3).unwrap();
        assert_eq!(round_half_up(ds1, 2), 0.67);
        let ds3 = validity(&cells(&[Some("IS"), None, Some("Comp")]), &dname, 3).unwrap();
        assert_eq!(round_half_up(ds3, 2), 0.33);
        assert_eq!(validity(&cells(&[Some("IS"), Some("IT"), Some("CS")]), &dname, 3).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_cases() {
        let gpa = DomainRule::parse("type:real;range:[0,4]").unwrap();
        let link = |v: &str, r: &str| LinkedValue {
            value: Some(v.into()),
            reference: Some(r.into()),
        };
        let ds2 = [link("3.0", "3.0"), link("3.5", "2.5"), link("2.0", "2"), link("3", "3.0")];
        assert_eq!(accuracy(&ds2, &gpa, 4).unwrap(), 0.75);
        assert_eq!(accuracy(&[link("3.0", "3.0"), link("2.5", "2.5")], &gpa, 2).unwrap(), 1.0);

        // One transposed day/month among four dates.
        let dob = DomainRule::parse("type:date").unwrap();
        let dates = [
            link("11/8/1995", "11/8/1995"),
            link("12/10/1995", "10/12/1995"),
            link("27/4/1994", "27/4/1994"),
            link("19/8/1995", "19/8/1995"),
        ];
        assert_eq!(accuracy(&dates, &dob, 4).unwrap(), 0.75);

        let unlinked = [LinkedValue {
            value: Some("3.0".into()),
            reference: None,
        }];
        assert_eq!(accuracy(&unlinked, &gpa, 1).unwrap(), 0.0);
    }

    fn tl(from: &str, to: &str, vol: u32, mode: AgeMode) -> f64 {
        timeliness(&TimelinessInput {
            input_time: parse_dmy(from).unwrap(),
            delivery_time: parse_dmy(to).unwrap(),
            volatility_days: vol,
            age_mode: mode,
        })
    }

    #[test]
    fn timeliness_cases() {
        assert_eq!(round_half_up(tl("2/12/2015", "2/2/2016", 365, AgeMode::Months30), 2), 0.84);
        assert_eq!(round_half_up(tl("2/1/2016", "2/2/2016", 365, AgeMode::Months30), 2), 0.92);
        assert_eq!(round_half_up(tl("2/10/2015", "2/2/2016", 365, AgeMode::Months30), 2), 0.67);
        assert_eq!(tl("2/2/2016", "2/2/2016", 365, AgeMode::ExactDays), 1.0);
        assert_eq!(tl("2/2/2015", "2/2/2016", 365, AgeMode::ExactDays), 0.0);
        assert_eq!(tl("2/2/2010", "2/2/2016", 365, AgeMode::ExactDays), 0.0);
        // 62 calendar days: 1 - 62/365.
        let exact = tl("2/12/2015", "2/2/2016", 365, AgeMode::ExactDays);
        assert!((exact - (1.0 - 62.0 / 365.0)).abs() < 1e-12);
        assert!((exact - 0.830137).abs() < 1e-6);
    }

    #[test]
    fn aggregates() {
        assert_eq!(round_half_up(scaled_aggregate(&[1.0], 5).unwrap(), 2), 0.20);
        assert_eq!(scaled_aggregate(&[1.0; 5], 5).unwrap(), 1.0);
        let v = scaled_aggregate(&[1.0, 0.75, 1.0, 0.33], 5).unwrap();
        assert!((v - 0.616).abs() < 1e-12);
        assert_eq!(scaled_aggregate(&[], 5).unwrap(), 0.0);
        assert!(matches!(scaled_aggregate(&[], 0), Err(Error::EmptyProjection)));

        assert_eq!(max_aggregate(&[0.92, 0.92, 0.84]).unwrap(), 0.92);
        assert_eq!(max_aggregate(&[0.4]).unwrap(), 0.4);
        assert_eq!(max_aggregate(&[0.67; 4]).unwrap(), 0.67);
        assert!(matches!(max_aggregate(&[]), Err(Error::EmptyInput)));
    }

    fn reference(text: &str) -> ReferenceRelation {
        ReferenceRelation {
            gs_table_id: GlobalTableId(1),
            data: read_delimited_from(text.as_bytes(), "ref", &NullTokens::default()).unwrap(),
        }
    }

    #[test]
    fn keyed_column_with_partial_population() {
        let r = reference("K,V\n1,a\n2,b\n3,c\n4,d\n");
        let int = DomainRule::parse("type:int").unwrap();
        let text = DomainRule::parse("in:{a,b,c,d}").unwrap();
        let idx = ReferenceIndex::new(&r, &[0], &[&int]);
        let k = |s: &str| Some(vec![s.to_string()]);
        let rows = vec![
            (k("1"), Some("a".to_string())),
            (k("2"), None),
            (k("3"), Some("x".to_string())),
            (k("1"), Some("z".to_string())),
            (k("9"), Some("a".to_string())),
            (None, Some("b".to_string())),
        ];
        let s = assess_keyed_column(&rows, &idx, 1, &text).unwrap();
        assert_eq!(s.population_completeness, 0.75);
        assert_eq!(s.incompleteness, 0.25);
        assert_eq!(s.fact_completeness, 0.5);
        assert_eq!(s.validity, 0.25);
        assert_eq!(s.accuracy, 0.25);
        assert_eq!(s.unmatched_rows, 2);
        assert_eq!(s.duplicate_rows, 1);
    }

    #[test]
    fn zero_mappings_assess_to_nothing() {
        let a = assess_mapping_table(&Catalog::new(), parse_dmy("2/2/2016").unwrap(), &AssessConfig::default()).unwrap();
        assert!(a.profiles.is_empty());
    }
}
