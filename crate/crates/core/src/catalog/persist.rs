//! Catalog file format.
//!
//! A single JSON document:
//!
//! ```text
//! {
//!   "format": "qualint-catalog",
//!   "version": 1,
//!   "assessed_as_of": "2016-02-02" | null,
//!   "domain": [...],                         "data_source": [...],
//!   "table": [...],                          "column": [...],
//!   "global_schema_table": [...],            "global_schema_column": [...],
//!   "global_schema_mapping": [...],          "queried_data_source": [...],
//!   "queried_data_source_assessment_metric": [...],
//!   "alternative_aggregated_metric": [...],
//!   "queried_data_source_assessment_metric_alternative_aggregated_metric": [...],
//!   "query": [...], "table_rows": [...], "reference_rows": [...]
//! }
//! ```
//!
//! Readers reject documents whose version is newer than [`CATALOG_VERSION`].

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::*;

pub const CATALOG_FORMAT: &str = "qualint-catalog";
pub const CATALOG_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TableRows {
    table_id: TableId,
    #[serde(flatten)]
    data: Relation,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    assessed_as_of: Option<NaiveDate>,
    domain: Vec<Domain>,
    data_source: Vec<SourceDescriptor>,
    table: Vec<RelationDescriptor>,
    column: Vec<ColumnDescriptor>,
    global_schema_table: Vec<GlobalTable>,
    global_schema_column: Vec<GlobalColumn>,
    global_schema_mapping: Vec<Mapping>,
    queried_data_source: Vec<QueriedSourceRow>,
    queried_data_source_assessment_metric: Vec<SourceMetricRow>,
    alternative_aggregated_metric: Vec<AlternativeMetricRow>,
    queried_data_source_assessment_metric_alternative_aggregated_metric: Vec<AlternativeMemberRow>,
    query: Vec<QueryRow>,
    table_rows: Vec<TableRows>,
    reference_rows: Vec<ReferenceRelation>,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    version: u32,
}

pub(super) fn to_string(c: &Catalog) -> Result<String> {
    let doc = Document {
        format: CATALOG_FORMAT.to_string(),
        version: CATALOG_VERSION,
        assessed_as_of: c.assessed_as_of,
        domain: c.domains.clone(),
        data_source: c.sources.clone(),
        table: c.tables.clone(),
        column: c.columns.clone(),
        global_schema_table: c.global_tables.clone(),
        global_schema_column: c.global_columns.clone(),
        global_schema_mapping: c.mappings.clone(),
        queried_data_source: c.queried_sources.clone(),
        queried_data_source_assessment_metric: c.source_metrics.clone(),
        alternative_aggregated_metric: c.alternative_metrics.clone(),
        queried_data_source_assessment_metric_alternative_aggregated_metric: c.alternative_members.clone(),
        query: c.queries.clone(),
        table_rows: c
            .relations
            .iter()
            .map(|(id, data)| TableRows {
                table_id: *id,
                data: data.clone(),
            })
            .collect(),
        reference_rows: c.references.values().cloned().collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::CatalogParseError(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub(super) fn from_str(text: &str) -> Result<Catalog> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| Error::CatalogParseError(e.to_string()))?;
    if env.format != CATALOG_FORMAT {
        return Err(Error::CatalogParseError(format!("not a catalog file (format `{}`)", env.format)));
    }
    if env.version > CATALOG_VERSION {
        return Err(Error::UnsupportedCatalogVersion {
            found: env.version,
            supported: CATALOG_VERSION,
        });
    }
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::CatalogParseError(e.to_string()))?;
    let catalog = Catalog {
        domains: doc.domain,
        sources: doc.data_source,
        tables: doc.table,
        columns: doc.column,
        global_tables: doc.global_schema_table,
        global_columns: doc.global_schema_column,
        mappings: doc.global_schema_mapping,
        relations: doc.table_rows.into_iter().map(|t| (t.table_id, t.data)).collect::<BTreeMap<_, _>>(),
        references: doc.reference_rows.into_iter().map(|r| (r.gs_table_id, r)).collect(),
        assessed_as_of: doc.assessed_as_of,
        queries: doc.query,
        queried_sources: doc.queried_data_source,
        source_metrics: doc.queried_data_source_assessment_metric,
        alternative_metrics: doc.alternative_aggregated_metric,
        alternative_members: doc.queried_data_source_assessment_metric_alternative_aggregated_metric,
    };
    catalog.check_integrity()?;
    Ok(catalog)
}
