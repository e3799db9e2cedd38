use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schema::{clamp_to, level_code, Clamp, Observation, Schema, VariableKind};
use super::TabularError;
use crate::num::Real;

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: String,
    pub rows: usize,
}

/// Rows are stored encoded (see [`Schema::encode`]); `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    schema: Arc<Schema>,
    rows: Vec<Vec<Option<T>>>,
    target: Vec<bool>,
    provenance: Provenance,
    clamps: Vec<Clamp>,
}

impl<T: Real> Dataset<T> {
    pub fn from_rows(
        schema: Arc<Schema>,
        rows: Vec<Vec<Option<T>>>,
        target: Vec<bool>,
        source: &str,
    ) -> Result<Self, TabularError> {
        if rows.is_empty() {
            return Err(TabularError::EmptyFile);
        }
        assert_eq!(rows.len(), target.len(), "one target per row");
        assert!(
            rows.iter().all(|r| r.len() == schema.len()),
            "rows must match schema width"
        );
        Ok(Self {
            provenance: Provenance {
                source: source.to_string(),
                rows: rows.len(),
            },
            schema,
            rows,
            target,
            clamps: Vec::new(),
        })
    }

    /// Parses CSV text: header row naming the schema columns in any order,
    /// empty or unparseable cells become missing, the target must be 0 or 1.
    pub fn from_csv<R: Read>(
        reader: R,
        schema: Arc<Schema>,
        source: &str,
    ) -> Result<Self, TabularError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut records = csv.records();
        let header = match records.next() {
            None => return Err(TabularError::EmptyFile),
            Some(h) => h?,
        };
        let column = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| TabularError::MissingColumn(name.to_string()))
        };
        let columns = schema
            .names()
            .map(column)
            .collect::<Result<Vec<_>, _>>()?;
        let target_col = column(schema.target())?;

        let mut rows = Vec::new();
        let mut target = Vec::new();
        let mut clamps = Vec::new();
        for record in records {
            let record = record?;
            if record.iter().all(|c| c.is_empty()) {
                continue;
            }
            let row_idx = rows.len();
            match record.get(target_col) {
                Some("1") => target.push(true),
                Some("0") => target.push(false),
                _ => return Err(TabularError::BadTargetValue { row: row_idx + 1 }),
            }
            let mut row = Vec::with_capacity(columns.len());
            for (def, &col) in schema.variables().iter().zip(&columns) {
                let raw = record.get(col).unwrap_or("");
                let cell = match &def.kind {
                    VariableKind::Numeric { min, max } => raw
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .and_then(T::from_f64)
                        .map(|x| {
                            let (value, clamp) = clamp_to(x, *min, *max);
                            if let Some(original) = clamp {
                                clamps.push(Clamp {
                                    row: Some(row_idx),
                                    variable: def.name.clone(),
                                    original,
                                    clamped: value.to_f64_lossy(),
                                });
                            }
                            value
                        }),
                    VariableKind::Categorical { .. } => level_code(def, raw),
                };
                row.push(cell);
            }
            rows.push(row);
        }
        let mut ds = Self::from_rows(schema, rows, target, source)?;
        ds.clamps = clamps;
        Ok(ds)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<Schema> {
        Arc::clone(&self.schema)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<Option<T>>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[Option<T>] {
        &self.rows[i]
    }

    pub fn targets(&self) -> &[bool] {
        &self.target
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn clamps(&self) -> &[Clamp] {
        &self.clamps
    }

    pub fn observation(&self, i: usize) -> Observation<T> {
        self.schema.decode(&self.rows[i])
    }

    pub fn missing_count(&self, var: usize) -> usize {
        self.rows.iter().filter(|r| r[var].is_none()).count()
    }

    pub fn total_missing(&self) -> usize {
        self.rows.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Observed values of one column, in row order.
    pub fn column(&self, var: usize) -> Vec<T> {
        self.rows.iter().filter_map(|r| r[var]).collect()
    }

    /// Rows at `indices` (kept in the given order).
    pub fn subset(&self, indices: &[usize], label: &str) -> Self {
        Self {
            schema: Arc::clone(&self.schema),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            provenance: Provenance {
                source: format!("{}#{label}", self.provenance.source),
                rows: indices.len(),
            },
            clamps: Vec::new(),
        }
    }
}

pub fn load_dataset<T: Real>(path: &Path, schema: Arc<Schema>) -> Result<Dataset<T>, TabularError> {
    let file = std::fs::File::open(path)?;
    Dataset::from_csv(file, schema, &path.display().to_string())
}

/// Index sets from a stratified split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified, seeded train/test partition. Each target class contributes
/// `round(n_class * test_fraction)` rows to the test side.
pub fn split_indices(
    target: &[bool],
    test_fraction: f64,
    seed: u64,
) -> Result<SplitIndices, TabularError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(TabularError::InvalidFraction(test_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    for class in [false, true] {
        let mut members: Vec<usize> = (0..target.len()).filter(|&i| target[i] == class).collect();
        members.shuffle(&mut rng);
        let k = (members.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&members[..k]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; target.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..target.len()).filter(|&i| !in_test[i]).collect();
    if train.is_empty() || test.is_empty() {
        return Err(TabularError::DegenerateSplit {
            train: train.len(),
            test: test.len(),
        });
    }
    Ok(SplitIndices { train, test })
}

pub fn split<T: Real>(
    ds: &Dataset<T>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>), TabularError> {
    let idx = split_indices(ds.targets(), test_fraction, seed)?;
    Ok((ds.subset(&idx.train, "train"), ds.subset(&idx.test, "test")))
}
