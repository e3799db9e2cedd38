use super::ExplainError;
use crate::num::Real;
use crate::tabular::{Dataset, Schema, TabularError, VariableKind};

/// Points in a numeric profile grid.
pub const GRID_POINTS: usize = 101;

/// Candidate values for one variable, ascending, without duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub var: usize,
    pub values: Vec<T>,
}

impl<T: Real> Grid<T> {
    /// Adds `x` unless already present, keeping the grid sorted.
    pub fn with_value(mut self, x: T) -> Self {
        if !self.values.contains(&x) {
            let at = self.values.partition_point(|&v| v < x);
            self.values.insert(at, x);
        }
        self
    }
}

/// Grid over the observed range of `variable` in `ds`: 101 evenly spaced
/// points from min to max for numeric variables (one point when the range
/// collapses), every level code for categorical ones.
pub fn grid_for<T: Real>(ds: &Dataset<T>, variable: &str) -> Result<Grid<T>, TabularError> {
    let (var, def) = ds.schema().variable(variable)?;
    let values = match &def.kind {
        VariableKind::Categorical { levels } => (0..levels.len()).map(T::from_usize_lossy).collect(),
        VariableKind::Numeric { .. } => {
            let col = ds.column(var);
            let mut it = col.iter().copied();
            let first = it.next().ok_or_else(|| TabularError::AllMissing(variable.to_string()))?;
            let (lo, hi) = it.fold((first, first), |(lo, hi), x| {
                (if x < lo { x } else { lo }, if x > hi { x } else { hi })
            });
            numeric_grid(lo, hi)
        }
    };
    Ok(Grid { var, values })
}

pub(crate) fn numeric_grid<T: Real>(lo: T, hi: T) -> Vec<T> {
    if lo == hi {
        return vec![lo];
    }
    let steps = T::from_usize_lossy(GRID_POINTS - 1);
    let mut out: Vec<T> = (0..GRID_POINTS - 1)
        .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / steps)
        .collect();
    out.push(hi);
    out
}

/// Prediction as one variable sweeps its grid, all others held at `obs`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpProfile<T> {
    pub var: usize,
    pub variable: String,
    pub grid: Vec<T>,
    pub predictions: Vec<T>,
    pub observed_value: T,
    pub observed_prediction: T,
}

/// The observed value is inserted into the grid, so its point on the curve
/// equals `predict(obs)` exactly.
pub fn ceteris_paribus<T, P>(
    predict: P,
    schema: &Schema,
    obs: &[T],
    grid: Grid<T>,
) -> Result<CpProfile<T>, ExplainError>
where
    T: Real,
    P: Fn(&[T]) -> T,
{
    if obs.len() != schema.len() {
        return Err(ExplainError::WidthMismatch {
            expected: schema.len(),
            found: obs.len(),
        });
    }
    if grid.values.is_empty() {
        return Err(ExplainError::EmptyGrid);
    }
    let var = grid.var;
    let grid = grid.with_value(obs[var]);
    let mut row = obs.to_vec();
    let predictions = grid
        .values
        .iter()
        .map(|&g| {
            row[var] = g;
            predict(&row)
        })
        .collect();
    Ok(CpProfile {
        var,
        variable: schema.variables()[var].name.clone(),
        grid: grid.values,
        predictions,
        observed_value: obs[var],
        observed_prediction: predict(obs),
    })
}

impl<T: Real> CpProfile<T> {
    pub fn observed_index(&self) -> usize {
        self.grid
            .iter()
            .position(|&g| g == self.observed_value)
            .expect("observed value is on the grid")
    }
}
