use std::collections::BTreeMap;

use super::DialogueError;
use crate::tabular::Schema;
use crate::text::RuleFile;

pub const BUNDLED_TEMPLATES: &str = include_str!("../../data/dialogue/templates.txt");

/// Keys every template file must define.
pub const REQUIRED: &[&str] = &[
    "greeting", "goodbye", "restart", "help", "list_variables", "describe", "describe_levels",
    "describe_unknown", "slot_set", "slot_clamped", "slot_missing_value", "slots_complete", "predict",
    "predict_imputed", "bd_summary", "bd_up", "bd_down", "bd_flat", "ask_variable", "cp_profile", "cp_target",
    "improve_intro", "improve_item", "improve_fixed", "improve_none", "compare_intro", "compare_item",
    "extreme_high", "extreme_low", "extreme_item", "wdyk_known", "wdyk_missing", "wdyk_complete", "wdyk_empty",
    "wdyk_persona", "impersonate", "impersonate_which", "eda_group", "eda_numeric", "eda_numeric_empty",
    "eda_categorical", "eda_overview", "model_info", "model_basic", "model_unknown", "fallback", "error",
];

/// Named-placeholder response templates plus per-variable descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    texts: BTreeMap<String, String>,
    descriptions: BTreeMap<String, String>,
}

impl Templates {
    pub fn bundled(schema: &Schema) -> Self {
        Self::parse(BUNDLED_TEMPLATES, schema).expect("bundled templates are valid")
    }

    /// `[template <key>]` and `[description <variable>]` sections, each with
    /// one `text:` entry. Every required key, and an `ask_<variable>` prompt
    /// and description for every schema variable, must be present.
    pub fn parse(text: &str, schema: &Schema) -> Result<Self, DialogueError> {
        let file = RuleFile::parse(text)?;
        let mut texts = BTreeMap::new();
        let mut descriptions = BTreeMap::new();
        for s in &file.sections {
            let target = match s.kind.as_str() {
                "template" => &mut texts,
                "description" => &mut descriptions,
                other => {
                    return Err(DialogueError::BadTemplate {
                        line: s.line,
                        reason: format!("unknown section kind `{other}`"),
                    })
                }
            };
            let body = s.first("text").ok_or_else(|| DialogueError::BadTemplate {
                line: s.line,
                reason: format!("`{}` has no text", s.name),
            })?;
            if target.insert(s.name.clone(), body.value.clone()).is_some() {
                return Err(DialogueError::BadTemplate {
                    line: s.line,
                    reason: format!("`{}` defined twice", s.name),
                });
            }
        }
        let asks: Vec<String> = schema.names().map(|n| format!("ask_{n}")).collect();
        for key in REQUIRED.iter().copied().chain(asks.iter().map(String::as_str)) {
            if !texts.contains_key(key) {
                return Err(DialogueError::BadTemplate {
                    line: 0,
                    reason: format!("missing template `{key}`"),
                });
            }
        }
        for name in schema.names() {
            if !descriptions.contains_key(name) {
                return Err(DialogueError::BadTemplate {
                    line: 0,
                    reason: format!("missing description for `{name}`"),
                });
            }
        }
        Ok(Self { texts, descriptions })
    }

    /// Fills `{name}` placeholders. Unknown keys render as the key itself.
    pub fn render(&self, key: &str, args: &[(&str, String)]) -> String {
        let Some(t) = self.texts.get(key) else {
            return key.to_string();
        };
        let mut out = String::with_capacity(t.len());
        let mut rest = t.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            match after.find('}') {
                Some(close) => {
                    let name = &after[..close];
                    match args.iter().find(|(k, _)| *k == name) {
                        Some((_, v)) => out.push_str(v),
                        None => {
                            out.push('{');
                            out.push_str(name);
                            out.push('}');
                        }
                    }
                    rest = &after[close + 1..];
                }
                None => {
                    out.push_str(&rest[open..]);
                    rest = "";
                }
            }
        }
        out.push_str(rest);
        out
    }

    pub fn description(&self, variable: &str) -> &str {
        self.descriptions.get(variable).map_or("", String::as_str)
    }
}
