use std::collections::BTreeMap;

use super::DialogueError;
use crate::nlu::FALLBACK;
use crate::text::RuleFile;

pub const BUNDLED_POLICY: &str = include_str!("../../data/dialogue/policy.txt");

/// Most suggestion chips a response may carry.
pub const MAX_CHIPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handler {
    Greeting,
    Goodbye,
    Restart,
    Help,
    ListVariables,
    DescribeVariable,
    SetSlots,
    Predict,
    CeterisParibus,
    BreakDown,
    HowToImprove,
    ClassComparison,
    ExtremeCases,
    WhatDoYouKnow,
    Impersonate,
    Eda,
    ModelInfo,
    Fallback,
}

impl Handler {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "greeting" => Handler::Greeting,
            "goodbye" => Handler::Goodbye,
            "restart" => Handler::Restart,
            "help" => Handler::Help,
            "list_variables" => Handler::ListVariables,
            "describe_variable" => Handler::DescribeVariable,
            "set_slots" => Handler::SetSlots,
            "predict" => Handler::Predict,
            "ceteris_paribus" => Handler::CeterisParibus,
            "break_down" => Handler::BreakDown,
            "how_to_improve" => Handler::HowToImprove,
            "class_comparison" => Handler::ClassComparison,
            "extreme_cases" => Handler::ExtremeCases,
            "what_do_you_know" => Handler::WhatDoYouKnow,
            "impersonate" => Handler::Impersonate,
            "eda" => Handler::Eda,
            "model_info" => Handler::ModelInfo,
            "fallback" => Handler::Fallback,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub handler: Handler,
    pub chips: Vec<String>,
    pub prompt_next_missing: bool,
}

/// Intent → handler table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    rules: BTreeMap<String, Rule>,
}

impl Policy {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_POLICY).expect("bundled policy is valid")
    }

    pub fn parse(text: &str) -> Result<Self, DialogueError> {
        let file = RuleFile::parse(text)?;
        let bad = |line: usize, reason: String| DialogueError::BadPolicy { line, reason };
        let mut rules = BTreeMap::new();
        for s in &file.sections {
            if s.kind != "intent" {
                return Err(bad(s.line, format!("unknown section kind `{}`", s.kind)));
            }
            let mut handler = None;
            let mut chips = Vec::new();
            let mut prompt_next_missing = false;
            for e in &s.entries {
                match e.key.as_deref() {
                    Some("handler") => {
                        handler = Some(Handler::parse(&e.value).ok_or_else(|| bad(e.line, format!("unknown handler `{}`", e.value)))?)
                    }
                    Some("chips") => {
                        chips = e.value.split('|').map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect();
                        if chips.len() > MAX_CHIPS {
                            return Err(bad(e.line, format!("at most {MAX_CHIPS} chips")));
                        }
                    }
                    Some("prompt") if e.value == "next_missing" => prompt_next_missing = true,
                    Some("prompt") if e.value == "none" => prompt_next_missing = false,
                    _ => return Err(bad(e.line, "expected handler, chips or prompt".into())),
                }
            }
            let handler = handler.ok_or_else(|| bad(s.line, format!("`{}` has no handler", s.name)))?;
            if rules
                .insert(
                    s.name.clone(),
                    Rule {
                        handler,
                        chips,
                        prompt_next_missing,
                    },
                )
                .is_some()
            {
                return Err(bad(s.line, format!("`{}` listed twice", s.name)));
            }
        }
        if !rules.contains_key(FALLBACK) {
            return Err(bad(0, "no fallback entry".into()));
        }
        Ok(Self { rules })
    }

    pub fn rule(&self, intent: &str) -> &Rule {
        self.rules.get(intent).unwrap_or_else(|| &self.rules[FALLBACK])
    }
}
