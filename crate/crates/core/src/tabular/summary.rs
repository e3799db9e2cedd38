use serde::Serialize;

use super::{Dataset, TabularError};
use crate::num::{mean, median, Real};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin<T> {
    pub lo: T,
    pub hi: T,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericStats<T> {
    pub min: T,
    pub max: T,
    pub mean: T,
    pub median: T,
    pub histogram: Vec<HistogramBin<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableSummary<T> {
    Numeric {
        variable: String,
        count: usize,
        missing: usize,
        /// `None` when every value is missing.
        stats: Option<NumericStats<T>>,
    },
    Categorical {
        variable: String,
        count: usize,
        missing: usize,
        levels: Vec<(String, usize)>,
    },
}

pub const HISTOGRAM_BINS: usize = 10;

pub fn summarize_variable<T: Real>(
    ds: &Dataset<T>,
    name: &str,
) -> Result<VariableSummary<T>, TabularError> {
    let (idx, def) = ds.schema().variable(name)?;
    let values = ds.column(idx);
    let missing = ds.len() - values.len();
    if def.is_categorical() {
        let mut counts = vec![0usize; def.levels().len()];
        for v in &values {
            counts[v.to_usize().expect("level code")] += 1;
        }
        return Ok(VariableSummary::Categorical {
            variable: name.to_string(),
            count: values.len(),
            missing,
            levels: def.levels().iter().cloned().zip(counts).collect(),
        });
    }
    let stats = if values.is_empty() {
        None
    } else {
        let min = values.iter().copied().fold(values[0], |a, b| if b < a { b } else { a });
        let max = values.iter().copied().fold(values[0], |a, b| if b > a { b } else { a });
        Some(NumericStats {
            min,
            max,
            mean: mean(&values).expect("non-empty"),
            median: median(&values).expect("non-empty"),
            histogram: histogram(&values, min, max, HISTOGRAM_BINS),
        })
    };
    Ok(VariableSummary::Numeric {
        variable: name.to_string(),
        count: values.len(),
        missing,
        stats,
    })
}

/// Equal-width bins over `[min, max]`; the maximum lands in the last bin.
/// A zero-width range puts everything in the first bin.
pub fn histogram<T: Real>(values: &[T], min: T, max: T, bins: usize) -> Vec<HistogramBin<T>> {
    let width = (max - min) / T::from_usize_lossy(bins);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let slot = if width == T::zero() {
            0
        } else {
            ((v - min) / width).to_usize().unwrap_or(0).min(bins - 1)
        };
        counts[slot] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: min + width * T::from_usize_lossy(i),
            hi: if i + 1 == bins {
                max
            } else {
                min + width * T::from_usize_lossy(i + 1)
            },
            count,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRate<T> {
    pub level: String,
    pub n: usize,
    pub survived: usize,
    /// `None` for levels with no rows.
    pub rate: Option<T>,
}

pub fn group_outcome_rate<T: Real>(
    ds: &Dataset<T>,
    name: &str,
) -> Result<Vec<GroupRate<T>>, TabularError> {
    let (idx, def) = ds.schema().variable(name)?;
    if !def.is_categorical() {
        return Err(TabularError::NotCategorical(name.to_string()));
    }
    let mut n = vec![0usize; def.levels().len()];
    let mut survived = vec![0usize; def.levels().len()];
    for (row, &y) in ds.rows().iter().zip(ds.targets()) {
        if let Some(code) = row[idx] {
            let j = code.to_usize().expect("level code");
            n[j] += 1;
            survived[j] += usize::from(y);
        }
    }
    Ok(def
        .levels()
        .iter()
        .enumerate()
        .map(|(j, level)| GroupRate {
            level: level.clone(),
            n: n[j],
            survived: survived[j],
            rate: (n[j] > 0)
                .then(|| T::from_usize_lossy(survived[j]) / T::from_usize_lossy(n[j])),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Schema;
    use num_rational::Ratio;
    use std::sync::Arc;

    fn ds<T: Real>(body: &str) -> Dataset<T> {
        let csv = format!("gender,class,age,sibsp,parch,fare,embarked,survived\n{body}");
        Dataset::from_csv(csv.as_bytes(), Arc::new(Schema::titanic()), "mem").unwrap()
    }

    #[test]
    fn numeric_summary_exact() {
        let d: Dataset<Ratio<i64>> =
            ds("male,3,10,0,0,5,S,0\nmale,3,20,0,0,5,S,1\nfemale,1,40,0,0,5,C,0\n");
        let VariableSummary::Numeric { count, missing, stats, .. } =
            summarize_variable(&d, "age").unwrap()
        else {
            panic!("numeric expected")
        };
        let s = stats.unwrap();
        assert_eq!((count, missing), (3, 0));
        assert_eq!(s.min, Ratio::from_integer(10));
        assert_eq!(s.max, Ratio::from_integer(40));
        assert_eq!(s.mean, Ratio::new(70, 3));
        assert_eq!(s.median, Ratio::from_integer(20));
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<usize>(), 3);
        assert_eq!(s.histogram.len(), 10);
        assert_eq!(s.histogram[9].count, 1);
    }

    #[test]
    fn categorical_and_all_missing() {
        let d: Dataset<f64> = ds("male,3,,0,0,5,S,0\nmale,3,,0,0,5,S,1\nfemale,1,,0,0,5,C,0\n");
        let VariableSummary::Categorical { levels, .. } = summarize_variable(&d, "gender").unwrap()
        else {
            panic!()
        };
        assert_eq!(levels, vec![("male".into(), 2), ("female".into(), 1)]);
        let VariableSummary::Numeric { count, missing, stats, .. } =
            summarize_variable(&d, "age").unwrap()
        else {
            panic!()
        };
        assert_eq!((count, missing, stats), (0, 3, None));
        assert!(matches!(
            summarize_variable(&d, "height"),
            Err(TabularError::UnknownVariable(_))
        ));
    }

    #[test]
    fn group_rates() {
        let d: Dataset<Ratio<i64>> = ds(
            "female,3,1,0,0,5,S,1\nfemale,3,1,0,0,5,S,1\nfemale,3,1,0,0,5,S,0\nmale,3,1,0,0,5,S,0\n",
        );
        let rates = group_outcome_rate(&d, "gender").unwrap();
        let female = rates.iter().find(|r| r.level == "female").unwrap();
        assert_eq!((female.n, female.survived, female.rate), (3, 2, Some(Ratio::new(2, 3))));
        let male = rates.iter().find(|r| r.level == "male").unwrap();
        assert_eq!((male.n, male.survived, male.rate), (1, 0, Some(Ratio::from_integer(0))));

        let by_port = group_outcome_rate(&d, "embarked").unwrap();
        assert_eq!(by_port[0].level, "C");
        assert_eq!((by_port[0].n, by_port[0].rate), (0, None));
        assert!(matches!(group_outcome_rate(&d, "age"), Err(TabularError::NotCategorical(_))));
    }
}
