//! Line-oriented rule files.
//!
//! ```text
//! # comment
//! [kind name words]
//! key: value
//! bare value
//! ```
//!
//! A section header names a kind and an optional name; entries are either
//! `key: value` pairs (keys are lowercase identifiers) or bare lines. Every
//! section and entry keeps its 1-based line number for error reporting.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: Option<String>,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub kind: String,
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn values<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key.as_deref() == Some(key))
    }

    pub fn first(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key.as_deref() == Some(key))
    }

    pub fn bare(&self) -> impl Iterator<Item = &Entry> + '_ {
        self.entries.iter().filter(|e| e.key.is_none())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct RuleError {
    pub line: usize,
    pub reason: String,
}

impl RuleError {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleFile {
    pub sections: Vec<Section>,
}

fn split_key(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    let k = k.trim();
    (!k.is_empty() && k.bytes().all(|b| b.is_ascii_lowercase() || b == b'_')).then(|| (k, v.trim()))
}

impl RuleFile {
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let inner = rest
                    .strip_suffix(']')
                    .ok_or_else(|| RuleError::new(line_no, "unterminated section header"))?;
                let mut words = inner.split_whitespace();
                let kind = words
                    .next()
                    .ok_or_else(|| RuleError::new(line_no, "empty section header"))?;
                sections.push(Section {
                    kind: kind.to_string(),
                    name: words.collect::<Vec<_>>().join(" "),
                    line: line_no,
                    entries: Vec::new(),
                });
                continue;
            }
            let section = sections
                .last_mut()
                .ok_or_else(|| RuleError::new(line_no, "entry before any section"))?;
            let (key, value) = match split_key(line) {
                Some((k, v)) => (Some(k.to_string()), v.to_string()),
                None => (None, line.to_string()),
            };
            section.entries.push(Entry {
                key,
                value,
                line: line_no,
            });
        }
        Ok(Self { sections })
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Section> + 'a {
        self.sections.iter().filter(move |s| s.kind == kind)
    }
}
