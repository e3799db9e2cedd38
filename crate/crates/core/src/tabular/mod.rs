//! Typed tabular data: schema, CSV ingestion, stratified split, imputation
//! and the summaries behind data-exploration answers.

mod dataset;
mod impute;
mod schema;
mod summary;

pub use dataset::{load_dataset, split, split_indices, Dataset, Provenance, SplitIndices};
pub use impute::{fit_imputer, Imputer};
pub use schema::{
    format_number, Cell, Clamp, Encoded, Observation, Schema, VariableDef, VariableKind,
};
pub use summary::{
    group_outcome_rate, histogram, summarize_variable, GroupRate, HistogramBin, NumericStats,
    VariableSummary, HISTOGRAM_BINS,
};


/// Bundled Titanic passenger table (1309 rows).
pub const TITANIC_CSV: &str = include_str!("../../data/titanic.csv");

pub const DEFAULT_TEST_FRACTION: f64 = 0.25;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum TabularError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("file has no data rows")]
    EmptyFile,
    #[error("data row {row}: target must be 0 or 1")]
    BadTargetValue { row: usize },
    #[error("split would leave train={train} test={test} rows")]
    DegenerateSplit { train: usize, test: usize },
    #[error("test fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("variable `{0}` has no observed value")]
    AllMissing(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not categorical")]
    NotCategorical(String),
    #[error("observation has variable `{0}` not in the schema")]
    SchemaMismatch(String),
    #[error("`{value}` is not a valid value of `{variable}`")]
    InvalidLevel { variable: String, value: String },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// The bundled dataset with the bundled schema.
pub fn bundled_titanic<T: crate::num::Real>() -> Dataset<T> {
    Dataset::from_csv(
        TITANIC_CSV.as_bytes(),
        std::sync::Arc::new(Schema::titanic()),
        "bundled:titanic.csv",
    )
    .expect("bundled dataset parses")
}
