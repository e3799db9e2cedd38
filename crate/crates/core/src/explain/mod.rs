//! Model-agnostic explanations of a single prediction.
//!
//! Every explainer takes the model as a plain function from a complete
//! encoded row to a score, so the same code explains the forest, toy models
//! in tests, or any other predictor over the same schema.

mod background;
mod break_down;
mod counterfactual;
mod plot;
mod profile;

pub use background::{Background, DEFAULT_BACKGROUND_SIZE};
pub use break_down::{break_down, BreakDownResult, BreakDownStep};
pub use counterfactual::{best_single_change, extreme_cases, Direction, ExtremeCase, Suggestion};
pub use plot::{ObservedPoint, PlotBin, PlotSpec, PlotStep, PlotValue};
pub use profile::{ceteris_paribus, grid_for, CpProfile, Grid, GRID_POINTS};

use crate::tabular::TabularError;

#[derive(Debug, thiserror::Error)]
pub enum ExplainError {
    #[error("background data is empty")]
    EmptyBackground,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("row has {found} values, schema has {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Tabular(#[from] TabularError),
}
