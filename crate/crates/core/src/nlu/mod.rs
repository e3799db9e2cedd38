//! Intent classification and entity extraction.
//!
//! Utterances are normalised, scanned for entities against a synonym
//! lexicon, and scored against every intent in a catalog: a pattern match
//! scores 1, otherwise the best token-overlap F1 against the intent's
//! example sentences. A short-lived context lets a bare answer ("20") fill
//! the slot the bot just asked about.

mod catalog;
mod lexicon;

use serde::{Deserialize, Serialize};

pub use catalog::{
    load_catalog, overlap_f1, Catalog, IntentSpec, BUNDLED_CATALOG, DEFAULT_THRESHOLD, FALLBACK, PLACEHOLDERS,
};
pub use lexicon::{EntitySet, Lexicon, NumberEntity, Qualifier, SlotValue, Span, SpanValue, BUNDLED_LEXICON};

use crate::tabular::Schema;
use crate::text::{tokens, RuleError};
use catalog::similarity_set;
use lexicon::SpanIndex;

/// Labeled utterances (`intent<TAB>text`) used to measure accuracy.
pub const BUNDLED_LABELED: &str = include_str!("../../data/nlu/labeled.tsv");

/// Turns a prompt stays answerable.
pub const CONTEXT_LIFESPAN: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum NluError {
    #[error("duplicate intent `{name}` (line {line})")]
    DuplicateIntent { name: String, line: usize },
    #[error("line {line}: {reason}")]
    BadPattern { line: usize, reason: String },
    #[error("line {line}: bad config entry")]
    BadConfig { line: usize },
    #[error("lexicon line {line}: {reason}")]
    BadLexicon { line: usize, reason: String },
    #[error("catalog has no `fallback` intent")]
    NoFallback,
    #[error(transparent)]
    Syntax(#[from] RuleError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What the bot is waiting for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "variable", rename_all = "snake_case")]
pub enum ContextTag {
    /// A value for this passenger variable.
    Slot(String),
    /// Which variable a what-if question is about.
    Variable,
}

impl ContextTag {
    pub fn parse(s: &str) -> Option<Self> {
        let mut w = s.split_whitespace();
        let t = match (w.next()?, w.next()) {
            ("slot", Some(v)) => ContextTag::Slot(v.to_string()),
            ("variable", None) => ContextTag::Variable,
            _ => return None,
        };
        w.next().is_none().then_some(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NluContext {
    pub pending: Option<ContextTag>,
    pub lifespan: u32,
}

impl NluContext {
    pub fn prompt(tag: ContextTag) -> Self {
        Self {
            pending: Some(tag),
            lifespan: CONTEXT_LIFESPAN,
        }
    }

    pub fn active(&self) -> Option<&ContextTag> {
        self.pending.as_ref().filter(|_| self.lifespan > 0)
    }

    /// One turn has passed.
    pub fn tick(&self) -> Self {
        let lifespan = self.lifespan.saturating_sub(1);
        Self {
            pending: self.pending.clone().filter(|_| lifespan > 0),
            lifespan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentMatch {
    pub intent: String,
    pub confidence: f64,
    pub entities: EntitySet,
    pub matched_rule: String,
}

/// Catalog plus lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct Nlu {
    pub catalog: Catalog,
    pub lexicon: Lexicon,
    schema: Schema,
}

fn is_slot_family(intent: &str) -> bool {
    intent.starts_with("set_") || intent == "multi_slot_filling"
}

impl Nlu {
    pub fn new(catalog: Catalog, lexicon: Lexicon, schema: Schema) -> Self {
        Self { catalog, lexicon, schema }
    }

    pub fn bundled(schema: &Schema) -> Self {
        Self::new(Catalog::bundled(), Lexicon::bundled(schema), schema.clone())
    }

    pub fn extract_entities(&self, text: &str) -> EntitySet {
        self.lexicon.extract(text)
    }

    fn matched(intent: &str, confidence: f64, entities: EntitySet, rule: String) -> IntentMatch {
        IntentMatch {
            intent: intent.to_string(),
            confidence,
            entities,
            matched_rule: rule,
        }
    }

    /// Deterministic classification; never fails.
    pub fn classify(&self, text: &str, ctx: &NluContext) -> IntentMatch {
        let toks = tokens(text);
        let spans = self.lexicon.spans(&toks);
        let mut entities = Lexicon::entities_from(&spans);
        let active = ctx.active();
        let covered = |i: usize, kind: &str| spans.iter().any(|s| s.kind == kind && s.start <= i && i < s.end);

        let bare_number = entities.numbers.len() == 1
            && entities.numbers[0].qualifier == Qualifier::Bare
            && toks
                .iter()
                .enumerate()
                .all(|(i, t)| covered(i, "number") || self.lexicon.is_filler(t));
        if bare_number {
            if let Some(ContextTag::Slot(var)) = active {
                if let Some(q) = Qualifier::for_variable(var) {
                    entities.numbers[0].qualifier = q;
                    return Self::matched(&format!("set_{var}"), 1.0, entities, format!("context slot {var}"));
                }
                if let Ok((_, def)) = self.schema.variable(var) {
                    let n = entities.numbers[0].value;
                    if let Some(level) = def.levels().iter().find(|l| l.parse::<f64>() == Ok(n)) {
                        if var == "class" {
                            entities.class = Some(level.clone());
                            entities.numbers.clear();
                            return Self::matched("set_class", 1.0, entities, "context slot class".into());
                        }
                    }
                }
            }
            return Self::matched(FALLBACK, 0.0, entities, "bare number without context".into());
        }
        if active == Some(&ContextTag::Variable)
            && entities.variable.is_some()
            && toks
                .iter()
                .enumerate()
                .all(|(i, t)| covered(i, "variable") || self.lexicon.is_filler(t))
        {
            return Self::matched("ceteris_paribus", 1.0, entities, "context variable".into());
        }

        let index = SpanIndex(&spans);
        let set = similarity_set(&toks);
        let mut best: Option<(f64, i32, &IntentSpec, String)> = None;
        for intent in self.catalog.intents() {
            if intent.name == FALLBACK {
                continue;
            }
            if let Some(req) = &intent.required_context {
                if active != Some(req) {
                    continue;
                }
            }
            let (score, rule) = match intent.patterns.iter().position(|p| p.matches(&toks, &index)) {
                Some(k) => (1.0, format!("{} pattern {}", intent.name, k + 1)),
                None => {
                    let mut top = (0.0, String::new());
                    for (k, ex) in intent.example_sets.iter().enumerate() {
                        let f = overlap_f1(&set, ex);
                        if f > top.0 {
                            top = (f, format!("{} example {}", intent.name, k + 1));
                        }
                    }
                    top
                }
            };
            let better = match &best {
                None => true,
                Some((s, p, _, _)) => score > *s || (score == *s && intent.priority > *p),
            };
            if better {
                best = Some((score, intent.priority, intent, rule));
            }
        }
        let top = best.as_ref().map_or(0.0, |b| b.0);
        let Some((score, _, intent, rule)) = best.filter(|(s, ..)| *s >= self.catalog.threshold()) else {
            let score = top;
            return Self::matched(FALLBACK, score, entities, "below threshold".into());
        };
        let mut name = intent.name.clone();
        if is_slot_family(&name) {
            let values = entities.slot_values();
            match values.len() {
                0 => {}
                1 => name = format!("set_{}", values[0].0),
                _ => name = "multi_slot_filling".into(),
            }
        }
        Self::matched(&name, score, entities, rule)
    }
}

/// Parses `intent<TAB>utterance` lines; blank lines and `#` comments skipped.
pub fn parse_labeled(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(i, u)| (i.trim().to_string(), u.trim().to_string()))
        .collect()
}
