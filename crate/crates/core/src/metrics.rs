//! Binary classifier evaluation: rank-statistic AUC and threshold metrics.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::Serialize;

use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics<T> {
    /// `None` when the evaluation set contains a single class.
    pub auc: Option<T>,
    pub f1: T,
    pub accuracy: T,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("AUC needs both classes present (positives={positives}, negatives={negatives})")]
    OneClassOnly { positives: usize, negatives: usize },
    #[error("{scores} scores for {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
}

/// Score at or above which an observation is called positive.
pub const THRESHOLD: f64 = 0.5;

/// Probability that a random positive outscores a random negative, with ties
/// counted as half. Exact: returned as a reduced fraction.
///
/// Scores only need a partial order; incomparable pairs count as ties.
pub fn auc<S: PartialOrd + Copy>(scores: &[S], labels: &[bool]) -> Result<Ratio<u64>, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&y| y).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::OneClassOnly { positives, negatives });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // Walk groups of tied scores in ascending order. Each positive beats every
    // negative already passed and ties with the negatives in its own group.
    let mut doubled_wins: u64 = 0;
    let mut negatives_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len()
            && scores[order[j]].partial_cmp(&scores[order[i]]).unwrap_or(Ordering::Equal)
                == Ordering::Equal
        {
            j += 1;
        }
        let group_pos = order[i..j].iter().filter(|&&k| labels[k]).count() as u64;
        let group_neg = (j - i) as u64 - group_pos;
        doubled_wins += group_pos * (2 * negatives_below + group_neg);
        negatives_below += group_neg;
        i = j;
    }
    Ok(Ratio::new(doubled_wins, 2 * positives as u64 * negatives as u64))
}

pub fn confusion<T: Real>(scores: &[T], labels: &[bool]) -> Confusion {
    let threshold = T::from_f64(THRESHOLD).expect("threshold representable");
    let mut c = Confusion::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// F1 = 2TP / (2TP + FP + FN); zero when there are no positives at all.
pub fn f1<T: Real>(c: &Confusion) -> T {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        return T::zero();
    }
    T::from_usize_lossy(2 * c.tp) / T::from_usize_lossy(denom)
}

pub fn evaluate_scores<T: Real>(scores: &[T], labels: &[bool]) -> Result<Metrics<T>, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    let auc = match auc(scores, labels) {
        Ok(r) => Some(
            T::from_u64(*r.numer()).expect("representable")
                / T::from_u64(*r.denom()).expect("representable"),
        ),
        Err(MetricsError::OneClassOnly { .. }) => None,
        Err(e) => return Err(e),
    };
    let confusion = confusion(scores, labels);
    let accuracy = if confusion.total() == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(confusion.tp + confusion.tn) / T::from_usize_lossy(confusion.total())
    };
    Ok(Metrics {
        auc,
        f1: f1(&confusion),
        accuracy,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over every positive/negative pair.
    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Ratio<u64> {
        let mut doubled = 0u64;
        let mut pairs = 0u64;
        for (i, &yi) in labels.iter().enumerate() {
            for (j, &yj) in labels.iter().enumerate() {
                if yi && !yj {
                    pairs += 1;
                    doubled += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        Ordering::Greater => 2,
                        Ordering::Equal => 1,
                        Ordering::Less => 0,
                    };
                }
            }
        }
        Ratio::new(doubled, 2 * pairs)
    }

    #[test]
    fn perfect_separation() {
        let m = evaluate_scores(&[0.9, 0.1], &[true, false]).unwrap();
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.confusion, Confusion { tp: 1, fp: 0, tn: 1, fn_: 0 });
    }

    #[test]
    fn four_pairs() {
        let scores = [0.8, 0.4, 0.6, 0.2];
        let labels = [true, true, false, false];
        assert_eq!(pairwise_auc(&scores, &labels), Ratio::new(3, 4));
        assert_eq!(auc(&scores, &labels).unwrap(), Ratio::new(3, 4));
    }

    #[test]
    fn ties_get_half_credit() {
        assert_eq!(auc(&[0.5, 0.5], &[true, false]).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn one_class_reports_f1() {
        assert!(matches!(
            auc(&[0.2, 0.7], &[true, true]),
            Err(MetricsError::OneClassOnly { positives: 2, negatives: 0 })
        ));
        let m = evaluate_scores(&[0.2f64, 0.7], &[true, true]).unwrap();
        assert_eq!(m.auc, None);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_inclusive() {
        let c = confusion(&[0.5, 0.49], &[false, true]);
        assert_eq!(c, Confusion { tp: 0, fp: 1, tn: 0, fn_: 1 });
    }

    fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        prop::collection::vec((0u8..20, any::<bool>()), 2..40).prop_map(|v| {
            let s = v.iter().map(|(x, _)| f64::from(*x) / 20.0).collect();
            let y = v.iter().map(|(_, y)| *y).collect();
            (s, y)
        })
    }

    proptest! {
        #[test]
        fn matches_pairwise_oracle((scores, labels) in scored()) {
            prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
            prop_assert_eq!(auc(&scores, &labels).unwrap(), pairwise_auc(&scores, &labels));
        }

        #[test]
        fn invariant_under_increasing_transform((scores, labels) in scored()) {
            prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
            let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + s * s * s).collect();
            prop_assert_eq!(auc(&scores, &labels).unwrap(), auc(&warped, &labels).unwrap());
        }

        #[test]
        fn confusion_sums_to_size((scores, labels) in scored()) {
            let m = evaluate_scores(&scores, &labels).unwrap();
            prop_assert_eq!(m.confusion.total(), labels.len());
            prop_assert!(m.f1 >= 0.0 && m.f1 <= 1.0);
        }
    }
}
