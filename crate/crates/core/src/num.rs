//! Numeric traits the crate is generic over.
//!
//! [`Real`] is the minimal ordered field the explainers, metrics and tabular
//! statistics need; it is implemented by `f32`, `f64` and exact rationals such
//! as `num_rational::Ratio<i64>`. [`Scalar`] adds IEEE float semantics and a
//! lossless text round trip, which the forest and its model file rely on.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Real:
    Num + Signed + PartialOrd + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    /// Lossy conversion used only at the presentation boundary.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Num
        + Signed
        + PartialOrd
        + Copy
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Floating-point scalar with an exact `Display`/`FromStr` round trip.
pub trait Scalar: Real + Float + FromStr + Sum {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Mean of a non-empty slice, summing left to right.
pub fn mean<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let total = values.iter().fold(T::zero(), |acc, v| acc + *v);
    Some(total / T::from_usize_lossy(values.len()))
}

/// Median of unsorted values; mean of the two middle values for even counts.
pub fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        Some(sorted[mid])
    } else {
        Some((sorted[mid - 1] + sorted[mid]) * T::half())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[10.0, 40.0, 20.0]), Some(20.0));
        assert_eq!(median(&[10.0, 20.0, 30.0, 40.0]), Some(25.0));
        assert_eq!(median::<f64>(&[]), None);
    }

    #[test]
    fn mean_is_exact_over_rationals() {
        let xs = [Ratio::from_integer(10i64), Ratio::from_integer(20), Ratio::from_integer(40)];
        assert_eq!(mean(&xs), Some(Ratio::new(70, 3)));
    }
}
