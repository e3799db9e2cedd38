use super::{grid_for, Background};
use crate::num::Real;
use crate::tabular::Dataset;

/// A single-variable change that raises the prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion<T> {
    pub var: usize,
    pub variable: String,
    pub from: T,
    pub to: T,
    pub prediction: T,
    pub delta: T,
}

/// For each variable, the grid value (over the observed range in `ds`) that
/// maximises the prediction with everything else held at `obs`. Ties prefer
/// the value nearest the observed one, then the earlier grid point. Only
/// strict improvements are returned, largest gain first, schema order among
/// equal gains.
pub fn best_single_change<T, P>(predict: P, ds: &Dataset<T>, obs: &[T]) -> Vec<Suggestion<T>>
where
    T: Real,
    P: Fn(&[T]) -> T,
{
    let base = predict(obs);
    let mut out = Vec::new();
    for (var, def) in ds.schema().variables().iter().enumerate() {
        let Ok(grid) = grid_for(ds, &def.name) else {
            continue;
        };
        let mut row = obs.to_vec();
        let mut best: Option<(T, T)> = None;
        for &g in &grid.values {
            row[var] = g;
            let p = predict(&row);
            let better = match best {
                None => true,
                Some((bv, bp)) => p > bp || (p == bp && (g - obs[var]).abs() < (bv - obs[var]).abs()),
            };
            if better {
                best = Some((g, p));
            }
        }
        if let Some((to, prediction)) = best {
            if prediction > base {
                out.push(Suggestion {
                    var,
                    variable: def.name.clone(),
                    from: obs[var],
                    to,
                    prediction,
                    delta: prediction - base,
                });
            }
        }
    }
    out.sort_by(|a, b| b.delta.partial_cmp(&a.delta).unwrap_or(std::cmp::Ordering::Equal));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Highest,
    Lowest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeCase<T> {
    pub row_id: usize,
    pub row: Vec<T>,
    pub prediction: T,
}

/// The `k` background rows with the highest or lowest prediction; ties keep
/// the lower row id.
pub fn extreme_cases<T, P>(predict: P, background: &Background<T>, k: usize, direction: Direction) -> Vec<ExtremeCase<T>>
where
    T: Real,
    P: Fn(&[T]) -> T,
{
    let mut cases: Vec<ExtremeCase<T>> = background
        .rows()
        .iter()
        .zip(background.row_ids())
        .map(|(r, &id)| ExtremeCase {
            row_id: id,
            row: r.clone(),
            prediction: predict(r),
        })
        .collect();
    cases.sort_by(|a, b| {
        let ord = a.prediction.partial_cmp(&b.prediction).unwrap_or(std::cmp::Ordering::Equal);
        match direction {
            Direction::Highest => ord.reverse(),
            Direction::Lowest => ord,
        }
        .then(a.row_id.cmp(&b.row_id))
    });
    cases.truncate(k);
    cases
}
