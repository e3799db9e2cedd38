use std::collections::{BTreeSet, HashSet};

use super::{ContextTag, NluError};
use crate::text::{is_number, tokens, Pattern, RuleFile};

pub const BUNDLED_CATALOG: &str = include_str!("../../data/nlu/catalog.txt");

/// Name of the intent that receives every unrecognised utterance.
pub const FALLBACK: &str = "fallback";

/// Placeholders allowed in catalog patterns.
pub const PLACEHOLDERS: &[&str] = &["variable", "gender", "class", "embarked", "persona", "number"];

/// Default similarity threshold when the catalog has no `[config]` section.
pub const DEFAULT_THRESHOLD: f64 = 0.45;

#[derive(Debug, Clone, PartialEq)]
pub struct IntentSpec {
    pub name: String,
    pub patterns: Vec<Pattern>,
    pub training_sentences: Vec<String>,
    pub required_context: Option<ContextTag>,
    pub priority: i32,
    pub(crate) example_sets: Vec<BTreeSet<String>>,
}

/// Ordered intent list; order is the final tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    intents: Vec<IntentSpec>,
    threshold: f64,
}

/// Token set used for similarity: numbers collapse to `#`.
pub(crate) fn similarity_set(toks: &[String]) -> BTreeSet<String> {
    toks.iter()
        .map(|t| if is_number(t) { "#".to_string() } else { t.clone() })
        .collect()
}

/// Token-overlap F1, `2|A∩B| / (|A|+|B|)`.
pub fn overlap_f1(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let common = a.intersection(b).count();
    2.0 * common as f64 / (a.len() + b.len()) as f64
}

impl Catalog {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CATALOG).expect("bundled catalog is valid")
    }

    /// `[config]` takes `threshold:`; each `[intent <name>]` takes
    /// `priority:`, `context:`, and any number of `pattern:` and `example:`
    /// lines.
    pub fn parse(text: &str) -> Result<Self, NluError> {
        let file = RuleFile::parse(text)?;
        let mut intents: Vec<IntentSpec> = Vec::new();
        let mut seen = HashSet::new();
        let mut threshold = DEFAULT_THRESHOLD;
        for s in &file.sections {
            match s.kind.as_str() {
                "config" => {
                    for e in &s.entries {
                        match e.key.as_deref() {
                            Some("threshold") => {
                                threshold = e
                                    .value
                                    .parse::<f64>()
                                    .ok()
                                    .filter(|t| (0.0..=1.0).contains(t))
                                    .ok_or(NluError::BadConfig { line: e.line })?;
                            }
                            _ => return Err(NluError::BadConfig { line: e.line }),
                        }
                    }
                }
                "intent" => {
                    if s.name.is_empty() || s.name.contains(' ') {
                        return Err(NluError::BadPattern {
                            line: s.line,
                            reason: "intent name must be one word".into(),
                        });
                    }
                    if !seen.insert(s.name.clone()) {
                        return Err(NluError::DuplicateIntent {
                            name: s.name.clone(),
                            line: s.line,
                        });
                    }
                    let mut spec = IntentSpec {
                        name: s.name.clone(),
                        patterns: vec![],
                        training_sentences: vec![],
                        required_context: None,
                        priority: 0,
                        example_sets: vec![],
                    };
                    for e in &s.entries {
                        match e.key.as_deref() {
                            Some("pattern") => spec.patterns.push(Pattern::parse(&e.value, PLACEHOLDERS).map_err(|err| {
                                NluError::BadPattern {
                                    line: e.line,
                                    reason: err.0,
                                }
                            })?),
                            Some("example") => {
                                let toks = tokens(&e.value);
                                if toks.is_empty() {
                                    return Err(NluError::BadPattern {
                                        line: e.line,
                                        reason: "empty example".into(),
                                    });
                                }
                                spec.example_sets.push(similarity_set(&toks));
                                spec.training_sentences.push(e.value.clone());
                            }
                            Some("priority") => {
                                spec.priority = e.value.parse().map_err(|_| NluError::BadPattern {
                                    line: e.line,
                                    reason: format!("bad priority `{}`", e.value),
                                })?
                            }
                            Some("context") => {
                                spec.required_context = Some(ContextTag::parse(&e.value).ok_or_else(|| NluError::BadPattern {
                                    line: e.line,
                                    reason: format!("bad context `{}`", e.value),
                                })?)
                            }
                            _ => {
                                return Err(NluError::BadPattern {
                                    line: e.line,
                                    reason: "expected pattern, example, priority or context".into(),
                                })
                            }
                        }
                    }
                    if spec.name != FALLBACK && spec.patterns.is_empty() && spec.training_sentences.is_empty() {
                        return Err(NluError::BadPattern {
                            line: s.line,
                            reason: format!("intent `{}` has no patterns or examples", spec.name),
                        });
                    }
                    intents.push(spec);
                }
                other => {
                    return Err(NluError::BadPattern {
                        line: s.line,
                        reason: format!("unknown section kind `{other}`"),
                    })
                }
            }
        }
        if !intents.iter().any(|i| i.name == FALLBACK) {
            return Err(NluError::NoFallback);
        }
        Ok(Self { intents, threshold })
    }

    pub fn intents(&self) -> &[IntentSpec] {
        &self.intents
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.intents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intents.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&IntentSpec> {
        self.intents.iter().find(|i| i.name == name)
    }
}

pub fn load_catalog(path: &std::path::Path) -> Result<Catalog, NluError> {
    Catalog::parse(&std::fs::read_to_string(path)?)
}
