//! Metadata store.
//!
//! Holds the data sources with their domains, tables and columns, the
//! global schema, the reference relations and the mapping from source
//! columns to global columns together with each mapping's assessed quality
//! profile. Query-scoped tables (queried sources, their metrics and the
//! alternatives formed for a query) can be recorded alongside.

mod ingest;
pub mod manifest;
mod persist;
pub mod rule;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::assessor::ColumnProfile;
use crate::error::{Error, Result};
use crate::quality::QualityVector;

pub use ingest::{read_delimited, read_delimited_from, Cell, NullTokens, Relation};
pub use persist::{CATALOG_FORMAT, CATALOG_VERSION};
pub use rule::{DomainRule, ValueType};

macro_rules! id_type {
    ($($name:ident),*) => {$(
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    )*};
}

id_type!(DomainId, SourceId, TableId, ColumnId, GlobalTableId, GlobalColumnId, MappingId, QueryId);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub domain_id: DomainId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub source_id: SourceId,
    pub name: String,
    pub domain_id: DomainId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationDescriptor {
    pub table_id: TableId,
    pub name: String,
    pub insertion_date: NaiveDate,
    pub volatility_days: u32,
    pub source_id: SourceId,
    pub cardinality: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDescriptor {
    pub column_id: ColumnId,
    pub name: String,
    pub table_id: TableId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalTable {
    pub gs_table_id: GlobalTableId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalColumn {
    pub gs_column_id: GlobalColumnId,
    pub name: String,
    pub gs_table_id: GlobalTableId,
    pub is_key: bool,
    pub domain_rule: DomainRule,
    /// Stored verbatim; never interpreted.
    pub detector: i64,
    /// Stored verbatim; never interpreted.
    pub correlated_with: Option<String>,
}

/// Gold relation for one global table. Columns follow the global table's
/// column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRelation {
    pub gs_table_id: GlobalTableId,
    pub data: Relation,
}

impl ReferenceRelation {
    pub fn cardinality(&self) -> usize {
        self.data.cardinality()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub mapping_id: MappingId,
    pub column_id: ColumnId,
    pub gs_column_id: GlobalColumnId,
    pub profile: Option<ColumnProfile>,
    pub stale: bool,
}

/// One row of the queried-data-source table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueriedSourceRow {
    pub query_id: QueryId,
    pub row_id: u32,
    pub source_id: SourceId,
    pub column_id: ColumnId,
    pub gs_column_id: GlobalColumnId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMetricRow {
    pub query_id: QueryId,
    pub metric_id: u32,
    pub source_id: SourceId,
    pub vector: QualityVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeMetricRow {
    pub query_id: QueryId,
    pub alternative_id: u32,
    pub label: String,
    pub vector: QualityVector,
    pub qualified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeMemberRow {
    pub query_id: QueryId,
    pub metric_id: u32,
    pub alternative_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub query_id: QueryId,
    pub text: String,
}

/// New source registration. An explicit id pins the identifier.
#[derive(Debug, Clone)]
pub struct NewSource {
    pub source_id: Option<SourceId>,
    pub name: String,
    pub domain: String,
}

/// New (or reloaded) source relation.
#[derive(Debug, Clone)]
pub struct NewRelation {
    pub source: SourceId,
    pub name: String,
    pub insertion_date: NaiveDate,
    pub volatility_days: i64,
    /// Columns the file must provide. `None` takes the header as is.
    pub columns: Option<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct NewGlobalColumn {
    pub name: String,
    pub is_key: bool,
    pub domain_rule: DomainRule,
    pub detector: i64,
    pub correlated_with: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Catalog {
    pub(crate) domains: Vec<Domain>,
    pub(crate) sources: Vec<SourceDescriptor>,
    pub(crate) tables: Vec<RelationDescriptor>,
    pub(crate) columns: Vec<ColumnDescriptor>,
    pub(crate) global_tables: Vec<GlobalTable>,
    pub(crate) global_columns: Vec<GlobalColumn>,
    pub(crate) mappings: Vec<Mapping>,
    pub(crate) relations: BTreeMap<TableId, Relation>,
    pub(crate) references: BTreeMap<GlobalTableId, ReferenceRelation>,
    pub(crate) assessed_as_of: Option<NaiveDate>,
    pub(crate) queries: Vec<QueryRow>,
    pub(crate) queried_sources: Vec<QueriedSourceRow>,
    pub(crate) source_metrics: Vec<SourceMetricRow>,
    pub(crate) alternative_metrics: Vec<AlternativeMetricRow>,
    pub(crate) alternative_members: Vec<AlternativeMemberRow>,
}

fn next_id(ids: impl Iterator<Item = u32>) -> u32 {
    ids.max().unwrap_or(0) + 1
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    if name.trim().is_empty() {
        return Err(Error::InvalidName(format!("{kind} name must not be empty")));
    }
    Ok(())
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    // ---- registration ----

    pub fn register_domain(&mut self, name: &str) -> Result<DomainId> {
        check_name("domain", name)?;
        if let Some(d) = self.domains.iter().find(|d| d.name == name) {
            return Ok(d.domain_id);
        }
        let id = DomainId(next_id(self.domains.iter().map(|d| d.domain_id.0)));
        self.domains.push(Domain {
            domain_id: id,
            name: name.to_string(),
        });
        Ok(id)
    }

    /// Registers a source. Re-registering an identical descriptor returns
    /// the existing id.
    pub fn register_source(&mut self, new: NewSource) -> Result<SourceId> {
        check_name("source", &new.name)?;
        let domain = self
            .domains
            .iter()
            .find(|d| d.name == new.domain)
            .ok_or_else(|| Error::UnknownDomain(new.domain.clone()))?
            .domain_id;
        if let Some(existing) = self.sources.iter().find(|s| s.name == new.name) {
            let same_id = new.source_id.is_none_or(|id| id == existing.source_id);
            if existing.domain_id == domain && same_id {
                return Ok(existing.source_id);
            }
            return Err(Error::DuplicateSource(new.name));
        }
        let id = match new.source_id {
            Some(id) if self.sources.iter().any(|s| s.source_id == id) => {
                return Err(Error::DuplicateSource(format!("id {id} already used")))
            }
            Some(id) => id,
            None => SourceId(next_id(self.sources.iter().map(|s| s.source_id.0))),
        };
        self.sources.push(SourceDescriptor {
            source_id: id,
            name: new.name,
            domain_id: domain,
        });
        Ok(id)
    }

    /// Reads a delimited file and registers (or reloads) it as a source
    /// relation.
    pub fn load_relation(&mut self, path: &Path, new: NewRelation, nulls: &NullTokens) -> Result<TableId> {
        let data = read_delimited(path, nulls)?;
        self.insert_relation(new, data, &path.display().to_string())
    }

    /// Registers already-parsed rows as a source relation. Reloading a
    /// `(source, name)` pair replaces its rows and marks its mappings stale.
    pub fn insert_relation(&mut self, new: NewRelation, data: Relation, label: &str) -> Result<TableId> {
        check_name("table", &new.name)?;
        if new.volatility_days <= 0 {
            return Err(Error::InvalidVolatility(new.volatility_days));
        }
        self.source(new.source)?;
        let existing = self
            .tables
            .iter()
            .find(|t| t.source_id == new.source && t.name == new.name)
            .map(|t| t.table_id);

        let wanted: Vec<String> = match (existing, &new.columns) {
            (Some(tid), _) => self.columns_of(tid).map(|c| c.name.clone()).collect(),
            (None, Some(cols)) => cols.clone(),
            (None, None) => data.columns.clone(),
        };
        let mut seen = HashSet::new();
        for c in &wanted {
            check_name("column", c)?;
            if !seen.insert(c) {
                return Err(Error::SchemaMismatch {
                    file: label.to_string(),
                    detail: format!("column {c} declared twice"),
                });
            }
        }
        let data = data.project(&wanted).map_err(|missing| Error::SchemaMismatch {
            file: label.to_string(),
            detail: format!("header lacks declared column {missing}"),
        })?;

        let table_id = match existing {
            Some(tid) => {
                let t = self.tables.iter_mut().find(|t| t.table_id == tid).expect("table exists");
                t.insertion_date = new.insertion_date;
                t.volatility_days = new.volatility_days as u32;
                t.cardinality = data.cardinality();
                let cols: HashSet<ColumnId> = self.columns_of(tid).map(|c| c.column_id).collect();
                for m in self.mappings.iter_mut().filter(|m| cols.contains(&m.column_id)) {
                    m.stale = true;
                }
                tid
            }
            None => {
                let tid = TableId(next_id(self.tables.iter().map(|t| t.table_id.0)));
                self.tables.push(RelationDescriptor {
                    table_id: tid,
                    name: new.name.clone(),
                    insertion_date: new.insertion_date,
                    volatility_days: new.volatility_days as u32,
                    source_id: new.source,
                    cardinality: data.cardinality(),
                });
                for name in &wanted {
                    let cid = ColumnId(next_id(self.columns.iter().map(|c| c.column_id.0)));
                    self.columns.push(ColumnDescriptor {
                        column_id: cid,
                        name: name.clone(),
                        table_id: tid,
                    });
                }
                tid
            }
        };
        self.relations.insert(table_id, data);
        Ok(table_id)
    }

    /// Declares a global table with its columns.
    pub fn declare_global_table(&mut self, name: &str, columns: Vec<NewGlobalColumn>) -> Result<GlobalTableId> {
        check_name("global table", name)?;
        if self.global_tables.iter().any(|t| t.name == name) {
            return Err(Error::DuplicateGlobalTable(name.to_string()));
        }
        if !columns.iter().any(|c| c.is_key) {
            return Err(Error::MissingKeyColumn(name.to_string()));
        }
        let mut seen = HashSet::new();
        for c in &columns {
            check_name("global column", &c.name)?;
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateGlobalTable(format!("{name}.{} declared twice", c.name)));
            }
        }
        let tid = GlobalTableId(next_id(self.global_tables.iter().map(|t| t.gs_table_id.0)));
        self.global_tables.push(GlobalTable {
            gs_table_id: tid,
            name: name.to_string(),
        });
        for c in columns {
            let cid = GlobalColumnId(next_id(self.global_columns.iter().map(|c| c.gs_column_id.0)));
            self.global_columns.push(GlobalColumn {
                gs_column_id: cid,
                name: c.name,
                gs_table_id: tid,
                is_key: c.is_key,
                domain_rule: c.domain_rule,
                detector: c.detector,
                correlated_with: c.correlated_with,
            });
        }
        Ok(tid)
    }

    pub fn load_reference_relation(&mut self, path: &Path, table: GlobalTableId, nulls: &NullTokens) -> Result<&ReferenceRelation> {
        let data = read_delimited(path, nulls)?;
        self.insert_reference(table, data, &path.display().to_string())
    }

    /// Stores the reference relation of a global table. Extra columns in
    /// `data` are ignored; key values must be present and unique.
    pub fn insert_reference(&mut self, table: GlobalTableId, data: Relation, label: &str) -> Result<&ReferenceRelation> {
        let gt = self.global_table(table)?.name.clone();
        let cols: Vec<&GlobalColumn> = self.global_columns_of(table).collect();
        let names: Vec<String> = cols.iter().map(|c| c.name.clone()).collect();
        let data = data.project(&names).map_err(|missing| Error::SchemaMismatch {
            file: label.to_string(),
            detail: format!("reference lacks global column {missing}"),
        })?;
        let key_idx: Vec<usize> = cols.iter().enumerate().filter(|(_, c)| c.is_key).map(|(i, _)| i).collect();
        let mut keys = HashSet::new();
        for (r, row) in data.rows.iter().enumerate() {
            let mut key = Vec::with_capacity(key_idx.len());
            for &i in &key_idx {
                match &row[i] {
                    Some(v) => key.push(cols[i].domain_rule.canonical(v)),
                    None => {
                        return Err(Error::NullReferenceKey {
                            table: gt,
                            row: r + 2,
                        })
                    }
                }
            }
            if !keys.insert(key.clone()) {
                return Err(Error::DuplicateReferenceKey {
                    table: gt,
                    key: key.join("|"),
                });
            }
        }
        let ids: Vec<GlobalColumnId> = cols.iter().map(|c| c.gs_column_id).collect();
        for m in &mut self.mappings {
            if ids.contains(&m.gs_column_id) {
                m.stale = true;
            }
        }
        self.references.insert(table, ReferenceRelation { gs_table_id: table, data });
        Ok(&self.references[&table])
    }

    /// Maps a source column onto a global column. A column maps to at most
    /// one global column; remapping requires `replace`.
    pub fn upsert_mapping(&mut self, column: ColumnId, gs_column: GlobalColumnId, replace: bool) -> Result<MappingId> {
        let col_name = self.column(column)?.name.clone();
        self.global_column(gs_column)?;
        if let Some(pos) = self.mappings.iter().position(|m| m.column_id == column) {
            let m = &mut self.mappings[pos];
            if m.gs_column_id == gs_column {
                return Ok(m.mapping_id);
            }
            if !replace {
                let existing = m.gs_column_id;
                return Err(Error::MappingConflict {
                    column: col_name,
                    existing: self.global_column(existing)?.name.clone(),
                });
            }
            m.gs_column_id = gs_column;
            m.profile = None;
            m.stale = true;
            return Ok(m.mapping_id);
        }
        let id = MappingId(next_id(self.mappings.iter().map(|m| m.mapping_id.0)));
        self.mappings.push(Mapping {
            mapping_id: id,
            column_id: column,
            gs_column_id: gs_column,
            profile: None,
            stale: true,
        });
        Ok(id)
    }

    /// Stores assessed profiles into their mappings and clears staleness.
    pub fn store_profiles(&mut self, profiles: &[ColumnProfile], as_of: NaiveDate) {
        for p in profiles {
            if let Some(m) = self
                .mappings
                .iter_mut()
                .find(|m| m.column_id == p.column_id && m.gs_column_id == p.gs_column_id)
            {
                m.profile = Some(p.clone());
                m.stale = false;
            }
        }
        self.assessed_as_of = Some(as_of);
    }

    // ---- lookups ----

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn sources(&self) -> &[SourceDescriptor] {
        &self.sources
    }

    pub fn tables(&self) -> &[RelationDescriptor] {
        &self.tables
    }

    pub fn columns(&self) -> &[ColumnDescriptor] {
        &self.columns
    }

    pub fn global_tables(&self) -> &[GlobalTable] {
        &self.global_tables
    }

    pub fn global_columns(&self) -> &[GlobalColumn] {
        &self.global_columns
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    pub fn assessed_as_of(&self) -> Option<NaiveDate> {
        self.assessed_as_of
    }

    pub fn source(&self, id: SourceId) -> Result<&SourceDescriptor> {
        self.sources
            .iter()
            .find(|s| s.source_id == id)
            .ok_or_else(|| Error::UnknownSource(id.to_string()))
    }

    pub fn source_by_name(&self, name: &str) -> Result<&SourceDescriptor> {
        self.sources
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSource(name.to_string()))
    }

    pub fn table(&self, id: TableId) -> Result<&RelationDescriptor> {
        self.tables
            .iter()
            .find(|t| t.table_id == id)
            .ok_or_else(|| Error::UnknownTable(id.to_string()))
    }

    pub fn table_by_name(&self, source: SourceId, name: &str) -> Result<&RelationDescriptor> {
        self.tables
            .iter()
            .find(|t| t.source_id == source && t.name == name)
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    pub fn columns_of(&self, table: TableId) -> impl Iterator<Item = &ColumnDescriptor> {
        self.columns.iter().filter(move |c| c.table_id == table)
    }

    pub fn column(&self, id: ColumnId) -> Result<&ColumnDescriptor> {
        self.columns
            .iter()
            .find(|c| c.column_id == id)
            .ok_or_else(|| Error::UnknownSourceColumn(id.to_string()))
    }

    pub fn column_by_name(&self, table: TableId, name: &str) -> Result<&ColumnDescriptor> {
        self.columns_of(table)
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownSourceColumn(name.to_string()))
    }

    pub fn global_table(&self, id: GlobalTableId) -> Result<&GlobalTable> {
        self.global_tables
            .iter()
            .find(|t| t.gs_table_id == id)
            .ok_or_else(|| Error::UnknownGlobalTable(id.to_string()))
    }

    pub fn global_table_by_name(&self, name: &str) -> Result<&GlobalTable> {
        self.global_tables
            .iter()
            .find(|t| t.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownGlobalTable(name.to_string()))
    }

    pub fn global_columns_of(&self, table: GlobalTableId) -> impl Iterator<Item = &GlobalColumn> {
        self.global_columns.iter().filter(move |c| c.gs_table_id == table)
    }

    pub fn global_column(&self, id: GlobalColumnId) -> Result<&GlobalColumn> {
        self.global_columns
            .iter()
            .find(|c| c.gs_column_id == id)
            .ok_or_else(|| Error::UnknownGlobalColumn(id.to_string()))
    }

    /// Resolves `Column` or `Table.Column` (case-insensitive).
    pub fn resolve_global_column(&self, name: &str) -> Result<&GlobalColumn> {
        let (table, col) = match name.split_once('.') {
            Some((t, c)) => (Some(self.global_table_by_name(t).map_err(|_| Error::UnknownColumn(name.to_string()))?.gs_table_id), c),
            None => (None, name),
        };
        let mut hits = self
            .global_columns
            .iter()
            .filter(|c| c.name.eq_ignore_ascii_case(col) && table.is_none_or(|t| t == c.gs_table_id));
        let first = hits.next().ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        if hits.next().is_some() {
            return Err(Error::AmbiguousColumn(name.to_string()));
        }
        Ok(first)
    }

    pub fn key_columns(&self, table: GlobalTableId) -> impl Iterator<Item = &GlobalColumn> {
        self.global_columns_of(table).filter(|c| c.is_key)
    }

    pub fn relation(&self, table: TableId) -> Result<&Relation> {
        self.relations
            .get(&table)
            .ok_or_else(|| Error::UnknownTable(format!("no rows loaded for table {table}")))
    }

    pub fn reference(&self, table: GlobalTableId) -> Option<&ReferenceRelation> {
        self.references.get(&table)
    }

    pub fn mapping_for_column(&self, column: ColumnId) -> Option<&Mapping> {
        self.mappings.iter().find(|m| m.column_id == column)
    }

    /// Source column of `source` mapped to `gs_column`, lowest column id first.
    pub fn source_column_for(&self, source: SourceId, gs_column: GlobalColumnId) -> Option<&Mapping> {
        self.mappings
            .iter()
            .filter(|m| m.gs_column_id == gs_column)
            .filter(|m| {
                self.column(m.column_id)
                    .and_then(|c| self.table(c.table_id))
                    .map(|t| t.source_id == source)
                    .unwrap_or(false)
            })
            .min_by_key(|m| m.column_id)
    }

    /// Checks that every reference between entities resolves.
    pub fn check_integrity(&self) -> Result<()> {
        let bad = |m: String| Error::CatalogParseError(m);
        for s in &self.sources {
            if !self.domains.iter().any(|d| d.domain_id == s.domain_id) {
                return Err(bad(format!("source {} has unknown domain {}", s.name, s.domain_id)));
            }
        }
        for t in &self.tables {
            self.source(t.source_id).map_err(|_| bad(format!("table {} has unknown source", t.name)))?;
        }
        for c in &self.columns {
            self.table(c.table_id).map_err(|_| bad(format!("column {} has unknown table", c.name)))?;
        }
        for c in &self.global_columns {
            self.global_table(c.gs_table_id)
                .map_err(|_| bad(format!("global column {} has unknown table", c.name)))?;
        }
        for m in &self.mappings {
            self.column(m.column_id).map_err(|_| bad(format!("mapping {} has unknown column", m.mapping_id)))?;
            self.global_column(m.gs_column_id)
                .map_err(|_| bad(format!("mapping {} has unknown global column", m.mapping_id)))?;
        }
        for t in self.relations.keys() {
            self.table(*t).map_err(|_| bad(format!("rows stored for unknown table {t}")))?;
        }
        for t in self.references.keys() {
            self.global_table(*t).map_err(|_| bad(format!("reference stored for unknown table {t}")))?;
        }
        Ok(())
    }

    // ---- query-scoped tables ----

    pub fn queries(&self) -> &[QueryRow] {
        &self.queries
    }

    pub fn queried_source_rows(&self, q: QueryId) -> impl Iterator<Item = &QueriedSourceRow> {
        self.queried_sources.iter().filter(move |r| r.query_id == q)
    }

    pub fn source_metric_rows(&self, q: QueryId) -> impl Iterator<Item = &SourceMetricRow> {
        self.source_metrics.iter().filter(move |r| r.query_id == q)
    }

    pub fn alternative_metric_rows(&self, q: QueryId) -> impl Iterator<Item = &AlternativeMetricRow> {
        self.alternative_metrics.iter().filter(move |r| r.query_id == q)
    }

    pub fn alternative_member_rows(&self, q: QueryId) -> impl Iterator<Item = &AlternativeMemberRow> {
        self.alternative_members.iter().filter(move |r| r.query_id == q)
    }

    /// Records a planned query's queried-source, metric and alternative
    /// tables. Returns the new query id.
    pub fn record_plan(&mut self, text: &str, plan: &crate::planner::Plan) -> QueryId {
        let qid = QueryId(next_id(self.queries.iter().map(|q| q.query_id.0)));
        self.queries.push(QueryRow {
            query_id: qid,
            text: text.to_string(),
        });
        let mut row_id = 0;
        for (i, p) in plan.sources.iter().enumerate() {
            for part in &p.participation {
                row_id += 1;
                self.queried_sources.push(QueriedSourceRow {
                    query_id: qid,
                    row_id,
                    source_id: p.source_id,
                    column_id: part.column_id,
                    gs_column_id: part.gs_column_id,
                });
            }
            self.source_metrics.push(SourceMetricRow {
                query_id: qid,
                metric_id: i as u32 + 1,
                source_id: p.source_id,
                vector: p.vector,
            });
        }
        for (a, alt) in plan.alternatives.iter().enumerate() {
            let alt_id = a as u32 + 1;
            self.alternative_metrics.push(AlternativeMetricRow {
                query_id: qid,
                alternative_id: alt_id,
                label: alt.label.clone(),
                vector: alt.vector,
                qualified: alt.qualified,
            });
            for m in &alt.members {
                if let Some(pos) = plan.sources.iter().position(|s| s.source_id == *m) {
                    self.alternative_members.push(AlternativeMemberRow {
                        query_id: qid,
                        metric_id: pos as u32 + 1,
                        alternative_id: alt_id,
                    });
                }
            }
        }
        qid
    }

    // ---- persistence ----

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = persist::to_string(self)?;
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Catalog> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        persist::from_str(&text)
    }
}

/// Shared catalog with single-writer, multi-reader access. Readers take
/// immutable snapshots; writers clone, mutate and publish.
#[derive(Debug, Default)]
pub struct CatalogStore {
    current: RwLock<Arc<Catalog>>,
    writer: Mutex<()>,
}

impl CatalogStore {
    pub fn new(catalog: Catalog) -> Self {
        Self {
            current: RwLock::new(Arc::new(catalog)),
            writer: Mutex::new(()),
        }
    }

    pub fn snapshot(&self) -> Arc<Catalog> {
        self.current.read().expect("catalog lock poisoned").clone()
    }

    pub fn update<T>(&self, f: impl FnOnce(&mut Catalog) -> Result<T>) -> Result<T> {
        let _guard = self.writer.lock().expect("catalog writer lock poisoned");
        let mut next = (*self.snapshot()).clone();
        let out = f(&mut next)?;
        *self.current.write().expect("catalog lock poisoned") = Arc::new(next);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dates::parse_dmy;

    fn rel(text: &str) -> Relation {
        read_delimited_from(text.as_bytes(), "mem", &NullTokens::default()).unwrap()
    }

    fn base() -> (Catalog, SourceId) {
        let mut c = Catalog::new();
        c.register_domain("Cairo University").unwrap();
        let s = c
            .register_source(NewSource {
                source_id: None,
                name: "DS1".into(),
                domain: "Cairo University".into(),
            })
            .unwrap();
        (c, s)
    }

    fn new_rel(source: SourceId, name: &str, columns: Option<Vec<&str>>) -> NewRelation {
        NewRelation {
            source,
            name: name.into(),
            insertion_date: parse_dmy("2/12/2015").unwrap(),
            volatility_days: 365,
            columns: columns.map(|c| c.into_iter().map(String::from).collect()),
        }
    }

    fn student_schema(c: &mut Catalog) -> GlobalTableId {
        let col = |n: &str, key: bool, rule: &str| NewGlobalColumn {
            name: n.into(),
            is_key: key,
            domain_rule: DomainRule::parse(rule).unwrap(),
            detector: 0,
            correlated_with: None,
        };
        c.declare_global_table("Student", vec![col("SId", true, "type:int"), col("SName", false, "type:text")])
            .unwrap()
    }

    #[test]
    fn source_registration() {
        let (mut c, s) = base();
        assert_eq!(s, SourceId(1));
        let again = c
            .register_source(NewSource {
                source_id: None,
                name: "DS1".into(),
                domain: "Cairo University".into(),
            })
            .unwrap();
        assert_eq!(again, s);
        let empty = c.register_source(NewSource {
            source_id: None,
            name: "".into(),
            domain: "Cairo University".into(),
        });
        assert!(matches!(empty, Err(Error::InvalidName(_))));
        let unknown = c.register_source(NewSource {
            source_id: None,
            name: "DS9".into(),
            domain: "Nowhere".into(),
        });
        assert!(matches!(unknown, Err(Error::UnknownDomain(_))));
        let clash = c.register_source(NewSource {
            source_id: Some(SourceId(7)),
            name: "DS1".into(),
            domain: "Cairo University".into(),
        });
        assert!(matches!(clash, Err(Error::DuplicateSource(_))));
    }

    #[test]
    fn relation_loading() {
        let (mut c, s) = base();
        let t = c
            .insert_relation(new_rel(s, "Student", None), rel("Id,Name\n1,a\n2,\n3,c\n4,d\n"), "mem")
            .unwrap();
        assert_eq!(c.table(t).unwrap().cardinality, 4);
        assert_eq!(c.relation(t).unwrap().rows[1][1], None);

        let empty = c.insert_relation(new_rel(s, "Empty", None), rel("a,b\n"), "mem").unwrap();
        assert_eq!(c.table(empty).unwrap().cardinality, 0);

        let missing = c.insert_relation(new_rel(s, "Dept", Some(vec!["DId", "DName"])), rel("DId\n1\n"), "mem");
        assert!(matches!(missing, Err(Error::SchemaMismatch { .. })));

        let bad_vol = c.insert_relation(
            NewRelation {
                volatility_days: 0,
                ..new_rel(s, "X", None)
            },
            rel("a\n"),
            "mem",
        );
        assert!(matches!(bad_vol, Err(Error::InvalidVolatility(0))));
    }

    #[test]
    fn reference_keys() {
        let (mut c, _) = base();
        let g = student_schema(&mut c);
        let r = c.insert_reference(g, rel("SId,SName,Extra\n1,a,x\n2,b,y\n3,c,z\n4,d,w\n"), "mem").unwrap();
        assert_eq!(r.cardinality(), 4);
        assert_eq!(r.data.columns, vec!["SId", "SName"]);

        let dup = c.insert_reference(g, rel("SId,SName\n1,a\n01,b\n"), "mem");
        assert!(matches!(dup, Err(Error::DuplicateReferenceKey { .. })));
        let null = c.insert_reference(g, rel("SId,SName\n1,a\n,b\n"), "mem");
        assert!(matches!(null, Err(Error::NullReferenceKey { row: 3, .. })));
    }

    #[test]
    fn global_table_needs_a_key() {
        let (mut c, _) = base();
        let err = c.declare_global_table(
            "T",
            vec![NewGlobalColumn {
                name: "a".into(),
                is_key: false,
                domain_rule: DomainRule::parse("type:text").unwrap(),
                detector: 0,
                correlated_with: None,
            }],
        );
        assert!(matches!(err, Err(Error::MissingKeyColumn(_))));
    }

    #[test]
    fn mapping_upsert() {
        let (mut c, s) = base();
        let g = student_schema(&mut c);
        let t = c.insert_relation(new_rel(s, "Student", None), rel("StudId,StudName\n1,a\n"), "mem").unwrap();
        let col = c.column_by_name(t, "StudId").unwrap().column_id;
        let sid = c.global_columns_of(g).next().unwrap().gs_column_id;
        let sname = c.global_columns_of(g).nth(1).unwrap().gs_column_id;
        let m = c.upsert_mapping(col, sid, false).unwrap();
        assert_eq!(c.upsert_mapping(col, sid, false).unwrap(), m);
        assert!(matches!(c.upsert_mapping(col, sname, false), Err(Error::MappingConflict { .. })));
        assert_eq!(c.upsert_mapping(col, sname, true).unwrap(), m);
        assert!(c.mappings()[0].stale);
        assert!(matches!(c.upsert_mapping(ColumnId(99), sid, false), Err(Error::UnknownSourceColumn(_))));
    }

    #[test]
    fn reload_marks_mappings_stale() {
        let (mut c, s) = base();
        let g = student_schema(&mut c);
        let t = c.insert_relation(new_rel(s, "Student", None), rel("StudId,StudName\n1,a\n"), "mem").unwrap();
        let col = c.column_by_name(t, "StudId").unwrap().column_id;
        let gs = c.global_columns_of(g).next().unwrap().gs_column_id;
        c.upsert_mapping(col, gs, false).unwrap();
        c.mappings[0].stale = false;
        let t2 = c
            .insert_relation(new_rel(s, "Student", None), rel("StudName,StudId\nb,2\nc,3\n"), "mem")
            .unwrap();
        assert_eq!(t, t2);
        assert!(c.mappings()[0].stale);
        assert_eq!(c.relation(t).unwrap().columns, vec!["StudId", "StudName"]);
        assert_eq!(c.table(t).unwrap().cardinality, 2);
    }

    #[test]
    fn store_snapshots_are_isolated() {
        let (c, _) = base();
        let store = CatalogStore::new(c);
        let before = store.snapshot();
        store.update(|c| c.register_domain("Other").map(|_| ())).unwrap();
        assert_eq!(before.domains().len(), 1);
        assert_eq!(store.snapshot().domains().len(), 2);
    }
}
