//! `qualint`: quality-driven query answering over registered sources.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use qualint_core::catalog::{manifest, NewGlobalColumn, NewRelation, NewSource, NullTokens};
use qualint_core::config::OutputFormat;
use qualint_core::dates::parse_dmy;
use qualint_core::engine::{assess_catalog, QueryOptions, Ranking};
use qualint_core::report::{self, Table};
use qualint_core::{Catalog, Engine, Error, RunConfig};

#[derive(Parser)]
#[command(name = "qualint", version, about = "Rank and fuse data sources by data quality")]
struct Cli {
    /// Catalog file.
    #[arg(long, global = true, env = "QUALINT_CATALOG", default_value = "catalog.json")]
    catalog: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty catalog.
    Init {
        /// Overwrite an existing catalog.
        #[arg(long)]
        force: bool,
    },
    /// Add metadata or data to the catalog.
    #[command(subcommand)]
    Register(Register),
    /// Assess every mapped source column.
    Assess {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Answer a quality-constrained query.
    Query {
        #[command(flatten)]
        text: QueryText,
        #[command(flatten)]
        run: RunArgs,
        /// Print threshold algorithm checks and access counts.
        #[arg(long)]
        stats: bool,
        /// Print the fused answer tuples with provenance.
        #[arg(long)]
        answers: bool,
        /// Skip fusion and the final re-ranking.
        #[arg(long)]
        no_fusion: bool,
        /// Store the query's metric tables in the catalog.
        #[arg(long)]
        record: bool,
    },
    /// Show how a query is planned, pruned and ranked.
    Explain {
        #[command(flatten)]
        text: QueryText,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum Register {
    /// A source domain.
    Domain { name: String },
    /// A data source.
    Source {
        name: String,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        id: Option<u32>,
    },
    /// A source table loaded from a delimited file.
    Relation {
        #[arg(long)]
        source: String,
        #[arg(long)]
        name: String,
        #[arg(long)]
        file: PathBuf,
        /// Insertion date, day/month/year.
        #[arg(long, value_parser = date)]
        inserted: NaiveDate,
        /// Volatility in days.
        #[arg(long)]
        volatility: i64,
        /// Columns to keep, comma separated.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        #[arg(long = "null", value_name = "TOKEN")]
        nulls: Vec<String>,
    },
    /// A global table: `--column name:rule[:key]`, repeated.
    Table {
        name: String,
        #[arg(long = "column", required = true)]
        columns: Vec<String>,
    },
    /// Global tables from a schema file.
    Schema { file: PathBuf },
    /// The reference relation of a global table.
    Reference {
        #[arg(long)]
        table: String,
        #[arg(long)]
        file: PathBuf,
        #[arg(long = "null", value_name = "TOKEN")]
        nulls: Vec<String>,
    },
    /// Map a source column to a global column.
    Mapping {
        #[arg(long)]
        source: String,
        #[arg(long)]
        table: String,
        #[arg(long)]
        column: String,
        /// Global column, `Table.Column`.
        #[arg(long)]
        global: String,
        #[arg(long)]
        replace: bool,
    },
    /// Sources and their tables from a manifest.
    Sources {
        file: PathBuf,
        #[arg(long = "null", value_name = "TOKEN")]
        nulls: Vec<String>,
    },
    /// Reference relations from a manifest.
    References {
        file: PathBuf,
        #[arg(long = "null", value_name = "TOKEN")]
        nulls: Vec<String>,
    },
    /// Mappings from a manifest.
    Mappings {
        file: PathBuf,
        #[arg(long)]
        replace: bool,
    },
    /// A directory holding schema, sources, references and mappings files.
    Directory {
        dir: PathBuf,
        #[arg(long = "null", value_name = "TOKEN")]
        nulls: Vec<String>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QueryText {
    /// Query text.
    #[arg(long)]
    sql: Option<String>,
    /// File holding the query text.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a setting or qualitative term, e.g. `high=0.7`.
    #[arg(long = "define", value_name = "NAME=VALUE")]
    defines: Vec<String>,
    /// Delivery date, day/month/year.
    #[arg(long, value_parser = date)]
    as_of: Option<NaiveDate>,
    /// `exact-days` or `months30`.
    #[arg(long)]
    age_mode: Option<String>,
    /// `table` or `records`.
    #[arg(long)]
    format: Option<String>,
}

fn date(s: &str) -> Result<NaiveDate, String> {
    parse_dmy(s).map_err(|e| e.to_string())
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for d in &self.defines {
            c.define(d)?;
        }
        if let Some(d) = self.as_of {
            c.as_of = Some(d);
        }
        if let Some(m) = &self.age_mode {
            c.set("age_mode", m)?;
        }
        if let Some(f) = &self.format {
            c.set("format", f)?;
        }
        Ok(c)
    }
}

impl QueryText {
    fn read(&self) -> Result<String, Error> {
        match (&self.sql, &self.file) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            }),
            (None, None) => unreachable!("clap requires one of --sql or --file"),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnsatisfiableGoal | Error::EmptyRanking => 3,
        Error::ParseError { .. }
        | Error::UnknownColumn(_)
        | Error::AmbiguousColumn(_)
        | Error::UnknownFeature(_)
        | Error::UnresolvedTerm { .. }
        | Error::UnsupportedGoalShape
        | Error::CrossTablePredicate
        | Error::RejectedScoringFunction(_)
        | Error::Config(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn nulls(extra: &[String]) -> NullTokens {
    NullTokens::with_extra(extra.iter().cloned())
}

fn mutate(path: &Path, f: impl FnOnce(&mut Catalog) -> Result<String, Error>) -> Result<String, Error> {
    let mut catalog = Catalog::load(path)?;
    let out = f(&mut catalog)?;
    catalog.save(path)?;
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Error> {
    let path = cli.catalog.as_path();
    match cli.command {
        Command::Init { force } => {
            if path.exists() && !force {
                return Err(Error::Config(format!("{} exists; pass --force to overwrite", path.display())));
            }
            Catalog::new().save(path)?;
            Ok(format!("initialised {}\n", path.display()))
        }
        Command::Register(r) => mutate(path, |c| register(c, r)),
        Command::Assess { run } => {
            let config = run.config()?;
            let as_of = config.as_of.unwrap_or_else(|| chrono::Local::now().date_naive());
            mutate(path, |c| {
                let a = assess_catalog(c, as_of, &config)?;
                for d in &a.diagnostics {
                    eprintln!(
                        "note: mapping {}: {} unmatched and {} duplicate rows ignored",
                        d.mapping_id, d.unmatched_rows, d.duplicate_rows
                    );
                }
                Ok(report::assessment(c, config.rounding_digits).render(config.format))
            })
        }
        Command::Query {
            text,
            run,
            stats,
            answers,
            no_fusion,
            record,
        } => {
            let config = run.config()?;
            let sql = text.read()?;
            let catalog = Arc::new(Catalog::load(path)?);
            let digits = config.rounding_digits;
            let format = config.format;
            let engine = Engine::new(catalog.clone(), config);
            let outcome = engine.run(&sql, QueryOptions { fusion: !no_fusion })?;
            let mut tables: Vec<Table> = report::ranking(&catalog, &outcome.ranking, "ranking", digits);
            if stats {
                if let Some(ta) = &outcome.ta {
                    tables.push(report::ta_trace(ta, digits));
                }
            }
            if let Some(f) = &outcome.final_ranking {
                tables.extend(report::ranking(&catalog, f, "final ranking", digits));
            }
            if answers {
                tables.extend(report::answer_rows(&catalog, &outcome));
            }
            if record {
                mutate(path, |c| {
                    let id = c.record_plan(&sql, &outcome.plan);
                    eprintln!("recorded as query {id}");
                    Ok(String::new())
                })?;
            }
            Ok(report::render_all(&tables, format))
        }
        Command::Explain { text, run } => {
            let config = run.config()?;
            let sql = text.read()?;
            let catalog = Arc::new(Catalog::load(path)?);
            let digits = config.rounding_digits;
            let format = config.format;
            let engine = Engine::new(catalog.clone(), config);
            explain(&engine, &catalog, &sql, digits, format)
        }
    }
}

fn explain(engine: &Engine, catalog: &Catalog, sql: &str, digits: usize, format: OutputFormat) -> Result<String, Error> {
    let (bound, goal) = engine.prepare(sql)?;
    let mut head = format!("query: {}\n", bound.query);
    if let Some(g) = &goal {
        head.push_str(&format!("goal: {g}\n"));
    }
    head.push_str(&format!(
        "class: {:?}, connective {:?}, values {:?}\n\n",
        bound.class.kind, bound.class.connective, bound.class.value_style
    ));
    // Plan first so pruning verdicts are shown even when nothing qualifies.
    let config = engine.config();
    let mut plan = qualint_core::planner::plan(
        catalog,
        &bound.columns,
        &qualint_core::planner::PlanConfig {
            max_sources: config.max_sources,
            precision: config.precision,
        },
    )?;
    let pruned = qualint_core::planner::prune(&mut plan.alternatives, goal.as_ref());
    let mut tables = vec![report::queried_sources(catalog, &plan, digits), report::alternatives(catalog, &plan, digits)];
    if let Err(e) = pruned {
        let mut out = head;
        out.push_str(&report::render_all(&tables, format));
        print!("{out}");
        return Err(e);
    }
    let outcome = engine.run(sql, QueryOptions::default())?;
    match &outcome.ranking {
        Ranking::Combined { features, .. } => {
            tables.extend(report::feature_lists(&plan, features, digits));
            if let Some(ta) = &outcome.ta {
                tables.push(report::ta_trace(ta, digits));
            }
        }
        Ranking::Single { feature, .. } => tables.extend(report::feature_lists(&plan, &[*feature], digits)),
        Ranking::PerFeature(_) => {}
    }
    tables.extend(report::ranking(catalog, &outcome.ranking, "ranking", digits));
    if let Some(f) = &outcome.final_ranking {
        tables.extend(report::ranking(catalog, f, "final ranking", digits));
    }
    Ok(head + &report::render_all(&tables, format))
}

fn register(c: &mut Catalog, r: Register) -> Result<String, Error> {
    Ok(match r {
        Register::Domain { name } => format!("domain {}\n", c.register_domain(&name)?),
        Register::Source { name, domain, id } => {
            c.register_domain(&domain)?;
            let id = c.register_source(NewSource {
                source_id: id.map(qualint_core::catalog::SourceId),
                name,
                domain,
            })?;
            format!("source {id}\n")
        }
        Register::Relation {
            source,
            name,
            file,
            inserted,
            volatility,
            columns,
            nulls: n,
        } => {
            let source = c.source_by_name(&source)?.source_id;
            let id = c.load_relation(
                &file,
                NewRelation {
                    source,
                    name,
                    insertion_date: inserted,
                    volatility_days: volatility,
                    columns,
                },
                &nulls(&n),
            )?;
            format!("table {id}\n")
        }
        Register::Table { name, columns } => {
            let cols = columns.iter().map(|s| parse_column_spec(s)).collect::<Result<Vec<_>, _>>()?;
            format!("global table {}\n", c.declare_global_table(&name, cols)?)
        }
        Register::Schema { file } => {
            let ids = manifest::register_schema(c, &file)?;
            format!("{} global tables\n", ids.len())
        }
        Register::Reference { table, file, nulls: n } => {
            let t = c.global_table_by_name(&table)?.gs_table_id;
            let card = c.load_reference_relation(&file, t, &nulls(&n))?.cardinality();
            format!("reference {table}: {card} rows\n")
        }
        Register::Mapping {
            source,
            table,
            column,
            global,
            replace,
        } => {
            let col = manifest::resolve_source_column(c, &source, &table, &column)?;
            let gs = c.resolve_global_column(&global)?.gs_column_id;
            format!("mapping {}\n", c.upsert_mapping(col, gs, replace)?)
        }
        Register::Sources { file, nulls: n } => {
            format!("{} tables\n", manifest::register_sources(c, &file, &nulls(&n))?.len())
        }
        Register::References { file, nulls: n } => {
            manifest::register_references(c, &file, &nulls(&n))?;
            "references loaded\n".to_string()
        }
        Register::Mappings { file, replace } => {
            format!("{} mappings\n", manifest::register_mappings(c, &file, replace)?.len())
        }
        Register::Directory { dir, nulls: n } => {
            manifest::register_directory(c, &dir, &nulls(&n))?;
            format!(
                "{} sources, {} global tables, {} mappings\n",
                c.sources().len(),
                c.global_tables().len(),
                c.mappings().len()
            )
        }
    })
}

/// `name:rule[:key]`; the rule may itself contain colons.
fn parse_column_spec(spec: &str) -> Result<NewGlobalColumn, Error> {
    let (name, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("column `{spec}`: expected name:rule[:key]")))?;
    let (rule, is_key) = match rest.strip_suffix(":key") {
        Some(r) => (r, true),
        None => (rest, false),
    };
    Ok(NewGlobalColumn {
        name: name.to_string(),
        is_key,
        domain_rule: qualint_core::catalog::DomainRule::parse(rule)?,
        detector: 0,
        correlated_with: None,
    })
}
