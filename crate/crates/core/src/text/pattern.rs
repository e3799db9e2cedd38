use std::fmt;

/// One element of a token pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Elem {
    /// One token equal to any of the alternatives (`a|b`).
    Word(Vec<String>),
    /// Like `Word`, or nothing (`[a|b]`).
    Optional(Vec<String>),
    /// Zero or more tokens (`*`).
    Any,
    /// Exactly one token (`_`).
    One,
    /// A span tagged with an entity kind (`{gender}`).
    Slot(String),
}

/// Whitespace-separated token pattern matched against a whole utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    elems: Vec<Elem>,
    source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct PatternError(pub String);

/// Where entity spans of a given kind start and end in a token sequence.
pub trait SpanSource {
    /// Exclusive end positions of spans of `kind` starting at `start`.
    fn ends(&self, kind: &str, start: usize) -> Vec<usize>;
}

/// No entity spans at all; slot elements never match.
pub struct NoSpans;

impl SpanSource for NoSpans {
    fn ends(&self, _: &str, _: usize) -> Vec<usize> {
        Vec::new()
    }
}

fn alternatives(s: &str) -> Result<Vec<String>, PatternError> {
    let alts: Vec<String> = s.split('|').map(str::to_string).collect();
    if alts.iter().any(|a| a.is_empty() || !a.chars().all(|c| c.is_alphanumeric() || c == '.' || c == '£')) {
        return Err(PatternError(format!("bad word alternatives `{s}`")));
    }
    Ok(alts)
}

impl Pattern {
    /// Parses a pattern; `allowed_slots` lists the legal `{kind}` names.
    pub fn parse(source: &str, allowed_slots: &[&str]) -> Result<Self, PatternError> {
        let mut elems = Vec::new();
        for tok in source.split_whitespace() {
            let elem = if tok == "*" {
                Elem::Any
            } else if tok == "_" {
                Elem::One
            } else if let Some(inner) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
                if !allowed_slots.contains(&inner) {
                    return Err(PatternError(format!("unknown placeholder `{{{inner}}}`")));
                }
                Elem::Slot(inner.to_string())
            } else if let Some(inner) = tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                Elem::Optional(alternatives(&inner.to_lowercase())?)
            } else {
                Elem::Word(alternatives(&tok.to_lowercase())?)
            };
            elems.push(elem);
        }
        if elems.is_empty() {
            return Err(PatternError("empty pattern".into()));
        }
        if elems.iter().all(|e| matches!(e, Elem::Any | Elem::Optional(_))) {
            return Err(PatternError(format!("pattern `{source}` matches everything")));
        }
        Ok(Self {
            elems,
            source: source.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn matches(&self, tokens: &[String], spans: &dyn SpanSource) -> bool {
        self.match_from(0, 0, tokens, spans)
    }

    fn match_from(&self, e: usize, t: usize, tokens: &[String], spans: &dyn SpanSource) -> bool {
        let Some(elem) = self.elems.get(e) else {
            return t == tokens.len();
        };
        match elem {
            Elem::Any => (t..=tokens.len()).any(|k| self.match_from(e + 1, k, tokens, spans)),
            Elem::One => t < tokens.len() && self.match_from(e + 1, t + 1, tokens, spans),
            Elem::Word(alts) => {
                t < tokens.len() && alts.contains(&tokens[t]) && self.match_from(e + 1, t + 1, tokens, spans)
            }
            Elem::Optional(alts) => {
                (t < tokens.len() && alts.contains(&tokens[t]) && self.match_from(e + 1, t + 1, tokens, spans))
                    || self.match_from(e + 1, t, tokens, spans)
            }
            Elem::Slot(kind) => spans
                .ends(kind, t)
                .into_iter()
                .any(|end| self.match_from(e + 1, end, tokens, spans)),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokens;

    struct Gender;
    impl SpanSource for Gender {
        fn ends(&self, kind: &str, start: usize) -> Vec<usize> {
            // token 2 of "how many women survived"
            if kind == "gender" && start == 2 {
                vec![3]
            } else {
                vec![]
            }
        }
    }

    #[test]
    fn wildcards_and_options() {
        let p = Pattern::parse("* what if [i] *", &[]).unwrap();
        assert!(p.matches(&tokens("so what if i had been older"), &NoSpans));
        assert!(p.matches(&tokens("what if"), &NoSpans));
        assert!(!p.matches(&tokens("what is this"), &NoSpans));
        let p = Pattern::parse("hi|hello _", &[]).unwrap();
        assert!(p.matches(&tokens("hello there"), &NoSpans));
        assert!(!p.matches(&tokens("hello"), &NoSpans));
    }

    #[test]
    fn slots() {
        let p = Pattern::parse("how many {gender} survived", &["gender"]).unwrap();
        assert!(p.matches(&tokens("how many women survived"), &Gender));
        assert!(!p.matches(&tokens("how many women survived"), &NoSpans));
    }

    #[test]
    fn rejects_bad_patterns() {
        assert!(Pattern::parse("{nope}", &["gender"]).is_err());
        assert!(Pattern::parse("* [x]", &[]).is_err());
        assert!(Pattern::parse("a||b", &[]).is_err());
        assert!(Pattern::parse("", &[]).is_err());
    }
}
