use super::schema::{Observation, Schema};
use super::{Dataset, TabularError};
use crate::num::{median, Real};

/// Per-variable fill values fitted on a training split: the median for
/// numeric variables, the most frequent level for categorical ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputer<T> {
    /// Encoded fill value per schema variable, in schema order.
    fills: Vec<T>,
}

impl<T: Real> Imputer<T> {
    pub fn from_fills(fills: Vec<T>) -> Self {
        Self { fills }
    }

    pub fn fills(&self) -> &[T] {
        &self.fills
    }

    pub fn fill(&self, var: usize) -> T {
        self.fills[var]
    }

    /// Completes an encoded row; returns the indices that were filled.
    pub fn impute_row(&self, row: &[Option<T>]) -> (Vec<T>, Vec<usize>) {
        let mut imputed = Vec::new();
        let complete = row
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                cell.unwrap_or_else(|| {
                    imputed.push(i);
                    self.fills[i]
                })
            })
            .collect();
        (complete, imputed)
    }

    /// Completes an observation. Known cells are kept, unknown keys are left
    /// untouched; returns the names of the variables that were filled.
    pub fn impute(&self, schema: &Schema, obs: &Observation<T>) -> (Observation<T>, Vec<String>) {
        let mut out = obs.clone();
        let mut imputed = Vec::new();
        let filled = schema.decode_complete(&self.fills);
        for def in schema.variables() {
            let has_value = match obs.get(&def.name) {
                None => false,
                Some(cell) => !matches!(cell, super::Cell::Missing),
            };
            if !has_value {
                out.set(&def.name, filled.get(&def.name).cloned().expect("decoded"));
                imputed.push(def.name.clone());
            }
        }
        (out, imputed)
    }
}

pub fn fit_imputer<T: Real>(train: &Dataset<T>) -> Result<Imputer<T>, TabularError> {
    let schema = train.schema();
    let mut fills = Vec::with_capacity(schema.len());
    for (i, def) in schema.variables().iter().enumerate() {
        let values = train.column(i);
        if values.is_empty() {
            return Err(TabularError::AllMissing(def.name.clone()));
        }
        let fill = if def.is_categorical() {
            let mut counts = vec![0usize; def.levels().len()];
            for v in &values {
                counts[v.to_usize().expect("level code")] += 1;
            }
            // first maximum wins, so ties go to the earlier schema level
            let best = counts
                .iter()
                .enumerate()
                .fold(0, |best, (j, &c)| if c > counts[best] { j } else { best });
            T::from_usize_lossy(best)
        } else {
            median(&values).expect("non-empty")
        };
        fills.push(fill);
    }
    Ok(Imputer { fills })
}
