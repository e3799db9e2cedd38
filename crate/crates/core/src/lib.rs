//! Conversational explanations for a Titanic survival classifier.
//!
//! The crate is generic over the scalar type: tabular statistics, metrics
//! and explainers accept any [`num::Real`] (including exact rationals), the
//! forest any [`num::Scalar`] float. The aliases below fix `f64`, which is
//! what the dialogue layer, service and CLI use.

pub mod corpus;
pub mod dialogue;
pub mod explain;
pub mod forest;
pub mod metrics;
pub mod nlu;
pub mod num;
pub mod tabular;
pub mod text;

pub type Forest = forest::Forest<f64>;
pub type Dataset = tabular::Dataset<f64>;
pub type Observation = tabular::Observation<f64>;
pub type Imputer = tabular::Imputer<f64>;
pub type Metrics = metrics::Metrics<f64>;
pub type Background = explain::Background<f64>;
pub type BreakDownResult = explain::BreakDownResult<f64>;
pub type CpProfile = explain::CpProfile<f64>;
pub type Suggestion = explain::Suggestion<f64>;
pub type ExtremeCase = explain::ExtremeCase<f64>;

/// Exact scalar for oracle checks of the explainers.
pub type Rational = num_rational::Ratio<i64>;

/// Model trained on the bundled data with the default parameters.
pub const BUNDLED_MODEL: &str = include_str!("../data/titanic.forest");

/// Parses [`BUNDLED_MODEL`].
pub fn bundled_forest() -> Forest {
    forest::read_forest(BUNDLED_MODEL.as_bytes(), std::sync::Arc::new(tabular::Schema::titanic()))
        .expect("bundled model is valid")
}
