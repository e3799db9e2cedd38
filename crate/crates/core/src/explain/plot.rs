use serde::{Deserialize, Serialize};

use super::{BreakDownResult, CpProfile};
use crate::num::Real;
use crate::tabular::{HistogramBin, Schema};

/// Tolerance for the additivity check on a Break Down spec.
const ADDITIVITY_TOL: f64 = 1e-9;

/// A grid point or observed value: a number for numeric variables, a level
/// name for categorical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlotValue {
    Number(f64),
    Level(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotStep {
    pub variable: String,
    pub value: PlotValue,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedPoint {
    pub value: PlotValue,
    pub prediction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Chart payloads sent to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotSpec {
    BreakDown {
        intercept: f64,
        steps: Vec<PlotStep>,
        prediction: f64,
    },
    CeterisParibus {
        variable: String,
        grid: Vec<PlotValue>,
        predictions: Vec<f64>,
        observed: ObservedPoint,
    },
    Histogram {
        variable: String,
        bins: Vec<PlotBin>,
    },
}

fn plot_value<T: Real>(schema: &Schema, var: usize, x: T) -> PlotValue {
    if schema.variables()[var].is_categorical() {
        PlotValue::Level(schema.display_value(var, x))
    } else {
        PlotValue::Number(x.to_f64_lossy())
    }
}

impl PlotSpec {
    pub fn break_down<T: Real>(schema: &Schema, bd: &BreakDownResult<T>) -> Self {
        PlotSpec::BreakDown {
            intercept: bd.intercept.to_f64_lossy(),
            steps: bd
                .steps
                .iter()
                .map(|s| PlotStep {
                    variable: s.variable.clone(),
                    value: plot_value(schema, s.var, s.value),
                    contribution: s.contribution.to_f64_lossy(),
                })
                .collect(),
            prediction: bd.prediction.to_f64_lossy(),
        }
    }

    pub fn ceteris_paribus<T: Real>(schema: &Schema, cp: &CpProfile<T>) -> Self {
        PlotSpec::CeterisParibus {
            variable: cp.variable.clone(),
            grid: cp.grid.iter().map(|&g| plot_value(schema, cp.var, g)).collect(),
            predictions: cp.predictions.iter().map(|p| p.to_f64_lossy()).collect(),
            observed: ObservedPoint {
                value: plot_value(schema, cp.var, cp.observed_value),
                prediction: cp.observed_prediction.to_f64_lossy(),
            },
        }
    }

    pub fn histogram<T: Real>(variable: &str, bins: &[HistogramBin<T>]) -> Self {
        PlotSpec::Histogram {
            variable: variable.to_string(),
            bins: bins
                .iter()
                .map(|b| PlotBin {
                    lo: b.lo.to_f64_lossy(),
                    hi: b.hi.to_f64_lossy(),
                    count: b.count,
                })
                .collect(),
        }
    }

    /// Structural checks a renderer relies on.
    pub fn validate(&self) -> Result<(), String> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} is not finite"))
            }
        };
        match self {
            PlotSpec::BreakDown {
                intercept,
                steps,
                prediction,
            } => {
                finite(*intercept, "intercept")?;
                finite(*prediction, "prediction")?;
                let mut seen = std::collections::HashSet::new();
                for s in steps {
                    finite(s.contribution, "contribution")?;
                    if !seen.insert(&s.variable) {
                        return Err(format!("variable {} appears twice", s.variable));
                    }
                }
                let total = intercept + steps.iter().map(|s| s.contribution).sum::<f64>();
                if (total - prediction).abs() > ADDITIVITY_TOL {
                    return Err(format!("contributions sum to {total}, prediction is {prediction}"));
                }
                Ok(())
            }
            PlotSpec::CeterisParibus {
                grid,
                predictions,
                observed,
                ..
            } => {
                if grid.is_empty() {
                    return Err("empty grid".into());
                }
                if grid.len() != predictions.len() {
                    return Err(format!("{} grid points, {} predictions", grid.len(), predictions.len()));
                }
                for p in predictions {
                    finite(*p, "prediction")?;
                }
                let Some(i) = grid.iter().position(|g| *g == observed.value) else {
                    return Err("observed value is not on the grid".into());
                };
                if predictions[i] != observed.prediction {
                    return Err("curve does not pass through the observed point".into());
                }
                Ok(())
            }
            PlotSpec::Histogram { bins, .. } => {
                for b in bins {
                    finite(b.lo, "bin edge")?;
                    finite(b.hi, "bin edge")?;
                    if b.lo > b.hi {
                        return Err("bin edges out of order".into());
                    }
                }
                if bins.windows(2).any(|w| w[0].hi > w[1].lo) {
                    return Err("bins overlap".into());
                }
                Ok(())
            }
        }
    }
}
