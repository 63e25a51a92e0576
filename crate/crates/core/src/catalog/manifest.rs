//! Batch registration from delimited manifest files.
//!
//! | file            | header                                                   |
//! |-----------------|----------------------------------------------------------|
//! | schema          | `table,column,key,rule[,detector,correlated_with]`       |
//! | sources         | `source,domain,table,file,inserted,volatility`           |
//! | references      | `table,file`                                             |
//! | mappings        | `source,table,column,global_table,global_column`         |
//!
//! Relative `file` paths resolve against the manifest's directory. Rows are
//! processed in file order, so ids follow the manifest order.

use std::path::Path;

use super::*;
use crate::dates::parse_dmy;

fn read_manifest(path: &Path, required: &[&str]) -> Result<Vec<BTreeMap<String, String>>> {
    let rel = read_delimited(path, &NullTokens::default())?;
    for r in required {
        if rel.column_index(r).is_none() {
            return Err(Error::SchemaMismatch {
                file: path.display().to_string(),
                detail: format!("manifest lacks column {r}"),
            });
        }
    }
    Ok(rel
        .rows
        .iter()
        .map(|row| {
            rel.columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.trim().to_ascii_lowercase(), v.clone().unwrap_or_default()))
                .collect()
        })
        .collect())
}

fn field<'a>(row: &'a BTreeMap<String, String>, name: &str) -> &'a str {
    row.get(name).map(|s| s.trim()).unwrap_or("")
}

fn parse_bool(s: &str) -> bool {
    matches!(s.to_ascii_lowercase().as_str(), "true" | "yes" | "1" | "y" | "key")
}

/// Declares every global table listed in a schema file. Columns of one
/// table must be contiguous.
pub fn register_schema(catalog: &mut Catalog, path: &Path) -> Result<Vec<GlobalTableId>> {
    let rows = read_manifest(path, &["table", "column", "key", "rule"])?;
    let mut groups: Vec<(String, Vec<NewGlobalColumn>)> = Vec::new();
    for row in &rows {
        let table = field(row, "table").to_string();
        let detector = match field(row, "detector") {
            "" => 0,
            d => d.parse().map_err(|_| Error::SchemaMismatch {
                file: path.display().to_string(),
                detail: format!("detector `{d}` is not an integer"),
            })?,
        };
        let correlated = match field(row, "correlated_with") {
            "" => None,
            c if c.eq_ignore_ascii_case("null") => None,
            c => Some(c.to_string()),
        };
        let col = NewGlobalColumn {
            name: field(row, "column").to_string(),
            is_key: parse_bool(field(row, "key")),
            domain_rule: DomainRule::parse(field(row, "rule"))?,
            detector,
            correlated_with: correlated,
        };
        match groups.last_mut() {
            Some((t, cols)) if *t == table => cols.push(col),
            _ => groups.push((table, vec![col])),
        }
    }
    groups
        .into_iter()
        .map(|(t, cols)| catalog.declare_global_table(&t, cols))
        .collect()
}

/// Registers domains, sources and relations from a sources manifest.
pub fn register_sources(catalog: &mut Catalog, path: &Path, nulls: &NullTokens) -> Result<Vec<TableId>> {
    let rows = read_manifest(path, &["source", "domain", "table", "file", "inserted", "volatility"])?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for row in &rows {
        catalog.register_domain(field(row, "domain"))?;
        let source = catalog.register_source(NewSource {
            source_id: None,
            name: field(row, "source").to_string(),
            domain: field(row, "domain").to_string(),
        })?;
        let volatility: i64 = field(row, "volatility")
            .parse()
            .map_err(|_| Error::InvalidVolatility(0))?;
        let new = NewRelation {
            source,
            name: field(row, "table").to_string(),
            insertion_date: parse_dmy(field(row, "inserted"))?,
            volatility_days: volatility,
            columns: None,
        };
        out.push(catalog.load_relation(&base.join(field(row, "file")), new, nulls)?);
    }
    Ok(out)
}

pub fn register_references(catalog: &mut Catalog, path: &Path, nulls: &NullTokens) -> Result<()> {
    let rows = read_manifest(path, &["table", "file"])?;
    let base = path.parent().unwrap_or(Path::new("."));
    for row in &rows {
        let gt = catalog.global_table_by_name(field(row, "table"))?.gs_table_id;
        catalog.load_reference_relation(&base.join(field(row, "file")), gt, nulls)?;
    }
    Ok(())
}

/// Resolves a `(source, table, column)` triple to a column id.
pub fn resolve_source_column(catalog: &Catalog, source: &str, table: &str, column: &str) -> Result<ColumnId> {
    let s = catalog.source_by_name(source)?.source_id;
    let t = catalog.table_by_name(s, table)?.table_id;
    Ok(catalog.column_by_name(t, column)?.column_id)
}

pub fn register_mappings(catalog: &mut Catalog, path: &Path, replace: bool) -> Result<Vec<MappingId>> {
    let rows = read_manifest(path, &["source", "table", "column", "global_table", "global_column"])?;
    let mut out = Vec::new();
    for row in &rows {
        let col = resolve_source_column(catalog, field(row, "source"), field(row, "table"), field(row, "column"))?;
        let gs = catalog
            .resolve_global_column(&format!("{}.{}", field(row, "global_table"), field(row, "global_column")))
            .map_err(|_| Error::UnknownGlobalColumn(format!("{}.{}", field(row, "global_table"), field(row, "global_column"))))?
            .gs_column_id;
        out.push(catalog.upsert_mapping(col, gs, replace)?);
    }
    Ok(out)
}

/// Loads a whole directory holding `schema.csv`, `sources.csv`,
/// `references.csv` and `mappings.csv`.
pub fn load_directory(dir: &Path, nulls: &NullTokens) -> Result<Catalog> {
    let mut c = Catalog::new();
    register_directory(&mut c, dir, nulls)?;
    Ok(c)
}

/// Like [`load_directory`], adding to an existing catalog.
pub fn register_directory(catalog: &mut Catalog, dir: &Path, nulls: &NullTokens) -> Result<()> {
    register_schema(catalog, &dir.join("schema.csv"))?;
    register_sources(catalog, &dir.join("sources.csv"), nulls)?;
    register_references(catalog, &dir.join("references.csv"), nulls)?;
    register_mappings(catalog, &dir.join("mappings.csv"), false)?;
    Ok(())
}
