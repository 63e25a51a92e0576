//! Quality-driven virtual data integration.
//!
//! Registered tabular sources are assessed column by column against
//! reference relations and domain rules. A quality-constrained query is
//! answered by forming every combination of the sources that can serve it
//! ("alternatives"), pruning the ones that miss the quality goal, ranking
//! the survivors with the Threshold Algorithm and finally fusing duplicate
//! records of multi-source alternatives before a last re-ranking.
//!
//! The crate is organised along the pipeline:
//!
//! - [`catalog`]: metadata store, ingestion and persistence
//! - [`assessor`]: attribute, relation and query scoped quality metrics
//! - [`query`]: the quality-extended SQL dialect
//! - [`planner`]: queried sources, alternatives and pruning
//! - [`ranker`]: per-feature rankings and the Threshold Algorithm
//! - [`fusion`]: duplicate detection, field-level fusion, re-ranking
//! - [`engine`]: the end-to-end pipeline used by the CLI

pub mod assessor;
pub mod catalog;
pub mod config;
pub mod dates;
pub mod engine;
mod error;
pub mod fusion;
pub mod planner;
pub mod quality;
pub mod query;
pub mod ranker;
pub mod report;

pub use assessor::{ColumnProfile, TimelinessInput};
pub use catalog::{Catalog, CatalogStore};
pub use config::RunConfig;
pub use dates::AgeMode;
pub use engine::{Engine, QueryOutcome};
pub use error::{Error, Result};
pub use planner::{Alternative, Plan, QueriedSourceProfile};
pub use quality::{Feature, Precision, QualityVector};
pub use query::{QualityQuery, QueryClass};
pub use ranker::{RankedAnswer, Scoring};
