use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::Real;
use crate::tabular::{Dataset, Imputer, Schema};

/// Rows used as the reference population for Break Down intercepts.
pub const DEFAULT_BACKGROUND_SIZE: usize = 500;

/// Complete (imputed) encoded rows plus their original row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Background<T> {
    schema: Arc<Schema>,
    rows: Vec<Vec<T>>,
    row_ids: Vec<usize>,
}

impl<T: Real> Background<T> {
    pub fn new(schema: Arc<Schema>, rows: Vec<Vec<T>>) -> Self {
        let row_ids = (0..rows.len()).collect();
        Self {
            schema,
            rows,
            row_ids,
        }
    }

    /// Every row of `ds`, imputed.
    pub fn full(ds: &Dataset<T>, imp: &Imputer<T>) -> Self {
        let rows = ds.rows().iter().map(|r| imp.impute_row(r).0).collect();
        Self::new(ds.schema_arc(), rows)
    }

    /// All rows when `ds` has at most `limit`, otherwise a seeded uniform
    /// sample of `limit` rows without replacement, kept in dataset order.
    pub fn sample(ds: &Dataset<T>, imp: &Imputer<T>, limit: usize, seed: u64) -> Self {
        if ds.len() <= limit {
            return Self::full(ds, imp);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = rand::seq::index::sample(&mut rng, ds.len(), limit).into_vec();
        ids.sort_unstable();
        let rows = ids.iter().map(|&i| imp.impute_row(ds.row(i)).0).collect();
        Self {
            schema: ds.schema_arc(),
            rows,
            row_ids: ids,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
