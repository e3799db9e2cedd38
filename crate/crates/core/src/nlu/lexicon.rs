use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::NluError;
use crate::tabular::Schema;
use crate::text::{is_number, tokens, RuleFile, SpanSource};

pub const BUNDLED_LEXICON: &str = include_str!("../../data/nlu/lexicon.txt");

/// What a number in an utterance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualifier {
    Age,
    Fare,
    Sibsp,
    Parch,
    Bare,
}

impl Qualifier {
    pub fn variable(self) -> Option<&'static str> {
        match self {
            Qualifier::Age => Some("age"),
            Qualifier::Fare => Some("fare"),
            Qualifier::Sibsp => Some("sibsp"),
            Qualifier::Parch => Some("parch"),
            Qualifier::Bare => None,
        }
    }

    pub fn for_variable(name: &str) -> Option<Self> {
        match name {
            "age" => Some(Qualifier::Age),
            "fare" => Some(Qualifier::Fare),
            "sibsp" => Some(Qualifier::Sibsp),
            "parch" => Some(Qualifier::Parch),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberEntity {
    pub value: f64,
    pub qualifier: Qualifier,
}

/// Entities found in one utterance. Level values are schema level names.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EntitySet {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub numbers: Vec<NumberEntity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embarked: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub persona: Option<String>,
}

impl EntitySet {
    /// Passenger values carried by the utterance, as (variable, level or
    /// number) pairs in schema-like order. Bare numbers are not included.
    pub fn slot_values(&self) -> Vec<(String, SlotValue)> {
        let mut out: Vec<(String, SlotValue)> = Vec::new();
        if let Some(g) = &self.gender {
            out.push(("gender".into(), SlotValue::Level(g.clone())));
        }
        if let Some(c) = &self.class {
            out.push(("class".into(), SlotValue::Level(c.clone())));
        }
        for n in &self.numbers {
            if let Some(v) = n.qualifier.variable() {
                if !out.iter().any(|(name, _)| name == v) {
                    out.push((v.into(), SlotValue::Number(n.value)));
                }
            }
        }
        if let Some(e) = &self.embarked {
            out.push(("embarked".into(), SlotValue::Level(e.clone())));
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        *self == EntitySet::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlotValue {
    Number(f64),
    Level(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Phrase {
    tokens: Vec<String>,
    value: String,
}

/// Entity synonym tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    variables: Vec<Phrase>,
    gender: Vec<Phrase>,
    class: Vec<Phrase>,
    embarked: Vec<Phrase>,
    personas: Vec<Phrase>,
    after: Vec<(Vec<String>, Qualifier)>,
    before: Vec<(Vec<String>, Qualifier)>,
    number_words: Vec<(String, f64)>,
    fillers: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpanValue {
    Text(String),
    Number(NumberEntity),
}

/// A located entity: token range plus its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub kind: &'static str,
    pub start: usize,
    pub end: usize,
    pub value: SpanValue,
}

fn qualifier(name: &str) -> Option<Qualifier> {
    match name {
        "bare" => None,
        other => Qualifier::for_variable(other),
    }
}

fn phrase_tokens(text: &str, line: usize) -> Result<Vec<String>, NluError> {
    let t = tokens(text);
    if t.is_empty() {
        return Err(NluError::BadLexicon {
            line,
            reason: format!("`{text}` has no tokens"),
        });
    }
    Ok(t)
}

impl Lexicon {
    pub fn bundled(schema: &Schema) -> Self {
        Self::parse(BUNDLED_LEXICON, schema).expect("bundled lexicon is valid")
    }

    /// Sections: `[variable <name>]`, `[level <variable> <level>]`,
    /// `[persona <id>]` with one synonym phrase per line; `[qualifier
    /// <variable>]` with `after:` / `before:` phrases; `[numbers]` with
    /// `word: value`; `[filler]` with one word per line.
    pub fn parse(text: &str, schema: &Schema) -> Result<Self, NluError> {
        let file = RuleFile::parse(text)?;
        let mut lex = Lexicon {
            variables: vec![],
            gender: vec![],
            class: vec![],
            embarked: vec![],
            personas: vec![],
            after: vec![],
            before: vec![],
            number_words: vec![],
            fillers: BTreeSet::new(),
        };
        let bad = |line: usize, reason: String| NluError::BadLexicon { line, reason };
        for s in &file.sections {
            match s.kind.as_str() {
                "variable" => {
                    if schema.index_of(&s.name).is_none() {
                        return Err(bad(s.line, format!("unknown variable `{}`", s.name)));
                    }
                    for e in s.bare() {
                        lex.variables.push(Phrase {
                            tokens: phrase_tokens(&e.value, e.line)?,
                            value: s.name.clone(),
                        });
                    }
                }
                "level" => {
                    let (var, level) = s
                        .name
                        .split_once(' ')
                        .ok_or_else(|| bad(s.line, "expected `[level <variable> <level>]`".into()))?;
                    let (_, def) = schema.variable(var).map_err(|_| bad(s.line, format!("unknown variable `{var}`")))?;
                    if def.level_index(level).is_none() {
                        return Err(bad(s.line, format!("`{level}` is not a level of {var}")));
                    }
                    let table = match var {
                        "gender" => &mut lex.gender,
                        "class" => &mut lex.class,
                        "embarked" => &mut lex.embarked,
                        _ => return Err(bad(s.line, format!("no entity slot for `{var}`"))),
                    };
                    for e in s.bare() {
                        table.push(Phrase {
                            tokens: phrase_tokens(&e.value, e.line)?,
                            value: level.to_string(),
                        });
                    }
                }
                "persona" => {
                    for e in s.bare() {
                        lex.personas.push(Phrase {
                            tokens: phrase_tokens(&e.value, e.line)?,
                            value: s.name.clone(),
                        });
                    }
                }
                "qualifier" => {
                    let q = qualifier(&s.name).ok_or_else(|| bad(s.line, format!("unknown qualifier `{}`", s.name)))?;
                    for e in &s.entries {
                        let t = phrase_tokens(&e.value, e.line)?;
                        match e.key.as_deref() {
                            Some("after") => lex.after.push((t, q)),
                            Some("before") => lex.before.push((t, q)),
                            _ => return Err(bad(e.line, "expected `after:` or `before:`".into())),
                        }
                    }
                }
                "numbers" => {
                    for e in &s.entries {
                        let (Some(word), Ok(v)) = (e.key.as_ref(), e.value.parse::<f64>()) else {
                            return Err(bad(e.line, "expected `word: number`".into()));
                        };
                        lex.number_words.push((word.clone(), v));
                    }
                }
                "filler" => {
                    for e in s.bare() {
                        lex.fillers.extend(tokens(&e.value));
                    }
                }
                other => return Err(bad(s.line, format!("unknown section kind `{other}`"))),
            }
        }
        Ok(lex)
    }

    pub fn is_filler(&self, token: &str) -> bool {
        self.fillers.contains(token)
    }

    fn longest<'a>(table: &'a [Phrase], toks: &[String], at: usize) -> Option<(usize, &'a str)> {
        table
            .iter()
            .filter(|p| toks[at..].starts_with(&p.tokens))
            .max_by_key(|p| p.tokens.len())
            .map(|p| (p.tokens.len(), p.value.as_str()))
    }

    fn scan(kind: &'static str, table: &[Phrase], toks: &[String]) -> Vec<Span> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            match Self::longest(table, toks, i) {
                Some((len, value)) => {
                    out.push(Span {
                        kind,
                        start: i,
                        end: i + len,
                        value: SpanValue::Text(value.to_string()),
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    fn qualifier_after(&self, toks: &[String], at: usize) -> Option<Qualifier> {
        self.after
            .iter()
            .filter(|(p, _)| toks[at..].starts_with(p))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, q)| *q)
    }

    fn qualifier_before(&self, toks: &[String], end: usize) -> Option<Qualifier> {
        self.before
            .iter()
            .filter(|(p, _)| toks[..end].ends_with(p))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, q)| *q)
    }

    /// Every entity span in a normalised token sequence. Each kind is
    /// scanned independently, left to right, by longest match.
    pub fn spans(&self, toks: &[String]) -> Vec<Span> {
        let mut spans = Self::scan("variable", &self.variables, toks);
        spans.extend(Self::scan("gender", &self.gender, toks));
        let class = Self::scan("class", &self.class, toks);
        spans.extend(Self::scan("embarked", &self.embarked, toks));
        spans.extend(Self::scan("persona", &self.personas, toks));
        for (i, t) in toks.iter().enumerate() {
            if class.iter().any(|s| s.start <= i && i < s.end) {
                continue;
            }
            let (value, word) = if is_number(t) {
                (t.parse::<f64>().ok(), false)
            } else {
                (self.number_words.iter().find(|(w, _)| w == t).map(|(_, v)| *v), true)
            };
            let Some(value) = value.filter(|v| v.is_finite()) else {
                continue;
            };
            let q = if toks.get(i.wrapping_sub(1)).is_some_and(|p| p == "£")
                || toks.get(i + 1).is_some_and(|n| n == "£")
            {
                Some(Qualifier::Fare)
            } else {
                self.qualifier_after(toks, i + 1).or_else(|| self.qualifier_before(toks, i))
            };
            if word && q.is_none() {
                continue;
            }
            spans.push(Span {
                kind: "number",
                start: i,
                end: i + 1,
                value: SpanValue::Number(NumberEntity {
                    value,
                    qualifier: q.unwrap_or(Qualifier::Bare),
                }),
            });
        }
        spans.extend(class);
        spans
    }

    pub fn extract(&self, text: &str) -> EntitySet {
        let toks = tokens(text);
        Self::entities_from(&self.spans(&toks))
    }

    pub(crate) fn entities_from(spans: &[Span]) -> EntitySet {
        let mut ordered: Vec<&Span> = spans.iter().collect();
        ordered.sort_by_key(|s| s.start);
        let first = |kind: &str| -> Option<String> {
            ordered.iter().find(|s| s.kind == kind).and_then(|s| match &s.value {
                SpanValue::Text(t) => Some(t.clone()),
                SpanValue::Number(_) => None,
            })
        };
        EntitySet {
            variable: first("variable"),
            gender: first("gender"),
            class: first("class"),
            embarked: first("embarked"),
            persona: first("persona"),
            numbers: ordered
                .iter()
                .filter_map(|s| match s.value {
                    SpanValue::Number(n) => Some(n),
                    SpanValue::Text(_) => None,
                })
                .collect(),
        }
    }
}

/// Span lookup backing `{kind}` pattern placeholders.
pub(crate) struct SpanIndex<'a>(pub &'a [Span]);

impl SpanSource for SpanIndex<'_> {
    fn ends(&self, kind: &str, start: usize) -> Vec<usize> {
        self.0
            .iter()
            .filter(|s| s.kind == kind && s.start == start)
            .map(|s| s.end)
            .collect()
    }
}
