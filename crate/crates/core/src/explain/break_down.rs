use std::cmp::Ordering;

use super::{Background, ExplainError};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct BreakDownStep<T> {
    pub var: usize,
    pub variable: String,
    /// Encoded observed value.
    pub value: T,
    pub contribution: T,
}

/// `intercept + Σ contributions = prediction` up to floating round-off.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakDownResult<T> {
    pub intercept: T,
    pub steps: Vec<BreakDownStep<T>>,
    pub prediction: T,
}

impl<T: Real> BreakDownResult<T> {
    pub fn reconstructed(&self) -> T {
        self.steps
            .iter()
            .fold(self.intercept, |acc, s| acc + s.contribution)
    }
}

/// Greedy sequential conditioning.
///
/// Starting from the mean prediction over the background, repeatedly fix the
/// variable whose value (taken from `obs`, overwritten into every background
/// row) moves the mean prediction the most in absolute terms. Ties go to the
/// lower schema index. The step's contribution is that move. Once every
/// variable is fixed all rows equal `obs`, so the last mean is `predict(obs)`.
pub fn break_down<T, P>(
    predict: P,
    background: &Background<T>,
    obs: &[T],
) -> Result<BreakDownResult<T>, ExplainError>
where
    T: Real,
    P: Fn(&[T]) -> T,
{
    let p = background.schema().len();
    if background.is_empty() {
        return Err(ExplainError::EmptyBackground);
    }
    if obs.len() != p {
        return Err(ExplainError::WidthMismatch {
            expected: p,
            found: obs.len(),
        });
    }
    let mut fixed = vec![false; p];
    let intercept = conditional_mean(&predict, background.rows(), obs, &fixed);
    let mut current = intercept;
    let mut steps = Vec::with_capacity(p);

    for step in 0..p {
        let last = step + 1 == p;
        let mut best: Option<(usize, T, T)> = None; // (var, mean, |delta|)
        for j in 0..p {
            if fixed[j] {
                continue;
            }
            fixed[j] = true;
            let m = if last {
                predict(obs)
            } else {
                conditional_mean(&predict, background.rows(), obs, &fixed)
            };
            fixed[j] = false;
            let gain = (m - current).abs();
            if best.as_ref().is_none_or(|(_, _, g)| gain > *g) {
                best = Some((j, m, gain));
            }
        }
        let (j, m, _) = best.expect("an unfixed variable remains");
        fixed[j] = true;
        steps.push(BreakDownStep {
            var: j,
            variable: background.schema().variables()[j].name.clone(),
            value: obs[j],
            contribution: m - current,
        });
        current = m;
    }
    Ok(BreakDownResult {
        intercept,
        steps,
        prediction: current,
    })
}

/// Mean prediction over background rows with the `fixed` variables set to
/// `obs`. Identical modified rows are predicted once; the sum still runs in
/// row order, so the result equals the naive loop bit for bit.
pub(crate) fn conditional_mean<T, P>(predict: &P, rows: &[Vec<T>], obs: &[T], fixed: &[bool]) -> T
where
    T: Real,
    P: Fn(&[T]) -> T,
{
    let modified: Vec<Vec<T>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(obs)
                .zip(fixed)
                .map(|((&x, &o), &f)| if f { o } else { x })
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..modified.len()).collect();
    let cmp = |a: &Vec<T>, b: &Vec<T>| -> Ordering {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    };
    order.sort_by(|&a, &b| cmp(&modified[a], &modified[b]));

    let mut preds = vec![T::zero(); modified.len()];
    let mut i = 0;
    while i < order.len() {
        let value = predict(&modified[order[i]]);
        let mut j = i;
        while j < order.len() && cmp(&modified[order[j]], &modified[order[i]]).is_eq() {
            preds[order[j]] = value;
            j += 1;
        }
        i = j;
    }
    let total = preds.iter().fold(T::zero(), |acc, &v| acc + v);
    total / T::from_usize_lossy(preds.len())
}
