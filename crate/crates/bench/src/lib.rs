//! Synthetic inputs for the benchmarks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qualint_core::assessor::Key;
use qualint_core::catalog::{Cell, GlobalTableId, ReferenceRelation, Relation, SourceId};
use qualint_core::planner::{Alternative, Verdict};
use qualint_core::QualityVector;

pub fn alternatives(n: usize, seed: u64) -> Vec<Alternative> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| Alternative {
            label: format!("Alternative{}", i + 1),
            members: (1..=rng.gen_range(1..4)).map(SourceId).collect(),
            vector: QualityVector::new(rng.gen(), rng.gen(), rng.gen(), rng.gen()),
            qualified: true,
            verdict: Verdict::Qualified,
        })
        .collect()
}

/// A reference relation `(K, V)` with keys `1..=n` and small integer values.
pub fn reference(n: usize, seed: u64) -> ReferenceRelation {
    let mut rng = StdRng::seed_from_u64(seed);
    ReferenceRelation {
        gs_table_id: GlobalTableId(1),
        data: Relation {
            columns: vec!["K".into(), "V".into()],
            rows: (1..=n)
                .map(|k| vec![Some(k.to_string()), Some(rng.gen_range(0..100).to_string())])
                .collect(),
        },
    }
}

/// A noisy copy of `reference`: some rows missing, nulled, invalid or wrong.
pub fn keyed_column(reference: &ReferenceRelation, seed: u64) -> Vec<(Option<Key>, Cell)> {
    let mut rng = StdRng::seed_from_u64(seed);
    reference
        .data
        .rows
        .iter()
        .filter_map(|row| {
            if !rng.gen_bool(0.9) {
                return None;
            }
            let value = match rng.gen_range(0..10) {
                0 => None,
                1 => Some("n/a".to_string()),
                2 => Some(rng.gen_range(0..100).to_string()),
                _ => row[1].clone(),
            };
            Some((row[0].clone().map(|k| vec![k]), value))
        })
        .collect()
}
