//! Session state and response generation.
//!
//! [`handle_turn`] is a pure transition: it classifies the utterance with the
//! session's NLU context, dispatches to the handler the policy table names
//! for the intent, and returns the next state with a [`Response`]. The
//! model, data and rule files travel in [`Deps`], shared by every session.

mod persona;
mod policy;
mod respond;
mod templates;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use persona::Persona;
pub use policy::{Handler, Policy, Rule, BUNDLED_POLICY, MAX_CHIPS};
pub use templates::{Templates, BUNDLED_TEMPLATES};

use crate::explain::{Background, ExplainError, PlotSpec, DEFAULT_BACKGROUND_SIZE};
use crate::forest::{Forest, ForestError, SplitSpec};
use crate::metrics::Metrics;
use crate::nlu::{EntitySet, IntentMatch, Nlu, NluContext};
use crate::tabular::{fit_imputer, split, Dataset, Imputer, Observation, Schema, TabularError};
use crate::text::RuleError;

#[derive(Debug, thiserror::Error)]
pub enum DialogueError {
    #[error("template file line {line}: {reason}")]
    BadTemplate { line: usize, reason: String },
    #[error("policy file line {line}: {reason}")]
    BadPolicy { line: usize, reason: String },
    #[error("unknown persona `{0}`")]
    UnknownPersona(String),
    #[error(transparent)]
    Syntax(#[from] RuleError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Anything that scores a complete encoded row.
pub trait Predictor: Send + Sync {
    fn predict(&self, row: &[f64]) -> f64;
}

impl Predictor for Forest<f64> {
    fn predict(&self, row: &[f64]) -> f64 {
        self.predict_row(row)
    }
}

/// Adapts a closure into a [`Predictor`].
pub struct FnModel<F>(pub F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Predictor for FnModel<F> {
    fn predict(&self, row: &[f64]) -> f64 {
        (self.0)(row)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelInfo {
    pub trees: usize,
    pub train_rows: usize,
    pub metrics: Option<Metrics<f64>>,
}

/// Per-session conversation state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionState {
    pub slots: Observation<f64>,
    pub persona: Option<String>,
    pub nlu_ctx: NluContext,
    pub turn_count: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DebugInfo {
    pub intent: String,
    pub confidence: f64,
    pub matched_rule: String,
    pub entities: EntitySet,
    pub imputed: Vec<String>,
    pub prediction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub text: String,
    pub rich: Vec<PlotSpec>,
    pub suggestions: Vec<String>,
    pub debug: DebugInfo,
}

/// Rule files bundled with or loaded for the dialogue manager.
#[derive(Debug, Clone)]
pub struct Assets {
    pub nlu: Nlu,
    pub templates: Templates,
    pub policy: Policy,
}

impl Assets {
    pub fn bundled(schema: &Schema) -> Self {
        Self {
            nlu: Nlu::bundled(schema),
            templates: Templates::bundled(schema),
            policy: Policy::bundled(),
        }
    }
}

/// Everything a turn needs besides the session state.
pub struct Deps {
    pub model: Arc<dyn Predictor>,
    pub schema: Arc<Schema>,
    pub imputer: Imputer<f64>,
    /// All passengers: data questions and extreme cases.
    pub data: Dataset<f64>,
    /// Training split: what-if grids and suggestions.
    pub train: Dataset<f64>,
    pub background: Background<f64>,
    /// `data` imputed, for ranking passengers.
    pub population: Background<f64>,
    pub assets: Assets,
    pub personas: Vec<Persona>,
    pub model_info: Option<ModelInfo>,
}

impl Deps {
    /// Background: up to 500 training rows sampled with `seed`.
    pub fn new(
        model: Arc<dyn Predictor>,
        data: Dataset<f64>,
        train: Dataset<f64>,
        imputer: Imputer<f64>,
        assets: Assets,
        seed: u64,
    ) -> Self {
        let background = Background::sample(&train, &imputer, DEFAULT_BACKGROUND_SIZE, seed);
        let population = Background::full(&data, &imputer);
        Self {
            model,
            schema: data.schema_arc(),
            imputer,
            data,
            train,
            background,
            population,
            assets,
            personas: Persona::bundled(),
            model_info: None,
        }
    }

    /// Recreates the forest's training split of `data` from its metadata.
    pub fn for_forest(forest: Forest<f64>, data: Dataset<f64>, assets: Assets) -> Result<Self, DialogueError> {
        if forest.schema() != data.schema() {
            return Err(ForestError::SchemaFingerprintMismatch {
                expected: data.schema().fingerprint(),
                found: forest.schema().fingerprint(),
            }
            .into());
        }
        let spec = forest.meta.split.unwrap_or(SplitSpec {
            seed: crate::tabular::DEFAULT_SEED,
            test_fraction: crate::tabular::DEFAULT_TEST_FRACTION,
        });
        let (train, _) = split(&data, spec.test_fraction, spec.seed)?;
        let imputer = match &forest.meta.imputer {
            Some(imp) => imp.clone(),
            None => fit_imputer(&train)?,
        };
        let info = ModelInfo {
            trees: forest.trees().len(),
            train_rows: forest.meta.train_rows,
            metrics: forest.meta.metrics.clone(),
        };
        let seed = forest.params().seed;
        let mut deps = Self::new(Arc::new(forest), data, train, imputer, assets, seed);
        deps.model_info = Some(info);
        Ok(deps)
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.model.predict(row)
    }

    /// Encoded, imputed row for the session's slots plus the names of the
    /// variables that were filled in.
    pub fn current_row(&self, slots: &Observation<f64>) -> Result<(Vec<f64>, Vec<String>), DialogueError> {
        let encoded = self.schema.encode(slots)?;
        let (row, idx) = self.imputer.impute_row(&encoded.row);
        let names = idx.iter().map(|&i| self.schema.variables()[i].name.clone()).collect();
        Ok((row, names))
    }

    pub fn persona(&self, id: &str) -> Option<&Persona> {
        self.personas.iter().find(|p| p.id == id)
    }
}

/// Replaces the slots with a persona's and records it.
pub fn impersonate(state: &SessionState, persona_id: &str, deps: &Deps) -> Result<SessionState, DialogueError> {
    let p = deps
        .persona(persona_id)
        .ok_or_else(|| DialogueError::UnknownPersona(persona_id.to_string()))?;
    let mut next = state.clone();
    next.slots = p.slots.clone();
    next.persona = Some(p.id.clone());
    Ok(next)
}

/// Text, plots, chip override and imputation note produced by a handler.
#[derive(Debug, Default)]
pub(crate) struct Reply {
    pub text: String,
    pub rich: Vec<PlotSpec>,
    pub chips: Option<Vec<String>>,
    pub imputed: Vec<String>,
    pub prediction: Option<f64>,
}

pub(crate) struct Turn<'a> {
    pub deps: &'a Deps,
    pub matched: &'a IntentMatch,
    pub text: &'a str,
    pub rule: &'a Rule,
}

/// One conversational step. `state` is left untouched.
pub fn handle_turn(state: &SessionState, text: &str, deps: &Deps) -> (SessionState, Response) {
    let matched = deps.assets.nlu.classify(text, &state.nlu_ctx);
    let rule = deps.assets.policy.rule(&matched.intent);
    let mut next = state.clone();
    next.turn_count += 1;
    next.nlu_ctx = state.nlu_ctx.tick();
    let turn = Turn {
        deps,
        matched: &matched,
        text,
        rule,
    };
    let (reply, error) = match respond::dispatch(&turn, &mut next) {
        Ok(r) => (r, None),
        Err(e) => {
            next = state.clone();
            next.turn_count += 1;
            next.nlu_ctx = state.nlu_ctx.tick();
            let r = Reply {
                text: deps.assets.templates.render("error", &[]),
                ..Reply::default()
            };
            (r, Some(e.to_string()))
        }
    };
    let mut suggestions = reply.chips.unwrap_or_else(|| rule.chips.clone());
    suggestions.truncate(MAX_CHIPS);
    let response = Response {
        text: reply.text,
        rich: reply.rich,
        suggestions,
        debug: DebugInfo {
            intent: matched.intent.clone(),
            confidence: matched.confidence,
            matched_rule: matched.matched_rule.clone(),
            entities: matched.entities.clone(),
            imputed: reply.imputed,
            prediction: reply.prediction,
            error,
        },
    };
    (next, response)
}
