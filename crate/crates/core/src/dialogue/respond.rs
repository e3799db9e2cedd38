use super::{DialogueError, Handler, Reply, SessionState, Turn};
use crate::explain::{
    best_single_change, break_down, ceteris_paribus, extreme_cases, grid_for, Direction, PlotSpec,
};
use crate::nlu::{ContextTag, NluContext, Qualifier, SlotValue};
use crate::tabular::{format_number, group_outcome_rate, summarize_variable, Cell, VariableSummary};
use crate::text::tokens;

type Outcome = Result<Reply, DialogueError>;

/// Variables whose suggested changes the passenger cannot act on.
/// Contributions smaller than this are rounding noise from averaging.
const NEGLIGIBLE: f64 = 1e-9;

fn actionable(variable: &str, from: f64, to: f64) -> bool {
    match variable {
        "gender" => false,
        "age" => to >= from,
        _ => true,
    }
}

pub(crate) fn percent(p: f64) -> String {
    format!("{}%", (p * 100.0).round() as i64)
}

pub(crate) fn points(d: f64) -> String {
    let pp = (d * 1000.0).round() / 10.0;
    let pp = if pp == 0.0 { 0.0 } else { pp };
    format!("{pp:+.1} points")
}

fn say(t: &Turn, key: &str, args: &[(&str, String)]) -> String {
    t.deps.assets.templates.render(key, args)
}

fn text_reply(text: String) -> Reply {
    Reply {
        text,
        ..Reply::default()
    }
}

fn join(parts: &[String]) -> String {
    parts.join(", ")
}

fn cell_text(cell: &Cell<f64>) -> String {
    match cell {
        Cell::Number(x) => format_number(*x),
        Cell::Level(l) => l.clone(),
        Cell::Missing => "missing".into(),
    }
}

fn value_text(t: &Turn, var: usize, value: f64) -> String {
    t.deps.schema.display_value(var, value)
}

fn known_and_missing(t: &Turn, state: &SessionState) -> (Vec<String>, Vec<String>) {
    let mut known = Vec::new();
    let mut missing = Vec::new();
    for name in t.deps.schema.names() {
        match state.slots.get(name) {
            Some(c) if !matches!(c, Cell::Missing) => known.push(format!("{name} {}", cell_text(c))),
            _ => missing.push(name.to_string()),
        }
    }
    (known, missing)
}

pub(crate) fn dispatch(t: &Turn, next: &mut SessionState) -> Outcome {
    match t.rule.handler {
        Handler::Greeting => Ok(text_reply(say(t, "greeting", &[]))),
        Handler::Goodbye => Ok(text_reply(say(t, "goodbye", &[]))),
        Handler::Help => Ok(text_reply(say(t, "help", &[]))),
        Handler::Fallback => Ok(text_reply(say(t, "fallback", &[]))),
        Handler::Restart => {
            *next = SessionState {
                turn_count: next.turn_count,
                ..SessionState::default()
            };
            Ok(text_reply(say(t, "restart", &[])))
        }
        Handler::ListVariables => {
            let names: Vec<String> = t.deps.schema.names().map(String::from).collect();
            Ok(text_reply(say(t, "list_variables", &[("variables", join(&names))])))
        }
        Handler::DescribeVariable => describe_variable(t),
        Handler::SetSlots => set_slots(t, next),
        Handler::Predict => predict(t, next),
        Handler::BreakDown => explain_break_down(t, next),
        Handler::CeterisParibus => what_if(t, next),
        Handler::HowToImprove => how_to_improve(t, next),
        Handler::ClassComparison => class_comparison(t, next),
        Handler::ExtremeCases => extremes(t),
        Handler::WhatDoYouKnow => what_do_you_know(t, next),
        Handler::Impersonate => impersonate(t, next),
        Handler::Eda => eda(t),
        Handler::ModelInfo => model_info(t),
    }
}

fn describe_variable(t: &Turn) -> Outcome {
    let Some(var) = &t.matched.entities.variable else {
        let names: Vec<String> = t.deps.schema.names().map(String::from).collect();
        return Ok(text_reply(say(t, "describe_unknown", &[("variables", join(&names))])));
    };
    let (_, def) = t.deps.schema.variable(var)?;
    let description = t.deps.assets.templates.description(var).to_string();
    let text = if def.is_categorical() {
        say(
            t,
            "describe_levels",
            &[
                ("variable", var.clone()),
                ("description", description),
                ("levels", def.levels().join(", ")),
            ],
        )
    } else {
        say(t, "describe", &[("variable", var.clone()), ("description", description)])
    };
    Ok(text_reply(text))
}

fn set_slots(t: &Turn, next: &mut SessionState) -> Outcome {
    let values = t.matched.entities.slot_values();
    if values.is_empty() {
        let var = t.matched.intent.strip_prefix("set_").filter(|v| t.deps.schema.index_of(v).is_some());
        let Some(var) = var else {
            return Ok(text_reply(say(t, "fallback", &[])));
        };
        next.nlu_ctx = NluContext::prompt(ContextTag::Slot(var.to_string()));
        let question = say(t, &format!("ask_{var}"), &[]);
        return Ok(text_reply(say(t, "slot_missing_value", &[("question", question)])));
    }
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (var, value) in values {
        let cell = match value {
            SlotValue::Number(x) => Cell::Number(x),
            SlotValue::Level(l) => Cell::Level(l),
        };
        let probe = crate::tabular::Observation::new().with(&var, cell.clone());
        let encoded = t.deps.schema.encode(&probe)?;
        let stored = match (&cell, encoded.clamps.first()) {
            (Cell::Number(_), Some(c)) => {
                notes.push(say(
                    t,
                    "slot_clamped",
                    &[
                        ("variable", var.clone()),
                        ("original", format_number(c.original)),
                        ("clamped", format_number(c.clamped)),
                    ],
                ));
                Cell::Number(c.clamped)
            }
            _ => cell,
        };
        parts.push(format!("{var} {}", cell_text(&stored)));
        next.slots.set(&var, stored);
    }
    next.persona = None;
    let mut text = say(t, "slot_set", &[("values", join(&parts))]);
    for n in notes {
        text.push(' ');
        text.push_str(&n);
    }
    if t.rule.prompt_next_missing {
        let missing = t
            .deps
            .schema
            .names()
            .find(|n| !matches!(next.slots.get(n), Some(c) if !matches!(c, Cell::Missing)));
        text.push(' ');
        match missing {
            Some(var) => {
                text.push_str(&say(t, &format!("ask_{var}"), &[]));
                next.nlu_ctx = NluContext::prompt(ContextTag::Slot(var.to_string()));
            }
            None => text.push_str(&say(t, "slots_complete", &[])),
        }
    }
    Ok(text_reply(text))
}

fn predict(t: &Turn, next: &SessionState) -> Outcome {
    let (row, imputed) = t.deps.current_row(&next.slots)?;
    let p = t.deps.predict(&row);
    let mut text = say(t, "predict", &[("percent", percent(p))]);
    if !imputed.is_empty() {
        text.push(' ');
        text.push_str(&say(t, "predict_imputed", &[("variables", join(&imputed))]));
    }
    Ok(Reply {
        text,
        imputed,
        prediction: Some(p),
        ..Reply::default()
    })
}

fn explain_break_down(t: &Turn, next: &SessionState) -> Outcome {
    let (row, imputed) = t.deps.current_row(&next.slots)?;
    let bd = break_down(|r: &[f64]| t.deps.predict(r), &t.deps.background, &row)?;
    let spec = PlotSpec::break_down(&t.deps.schema, &bd);
    let label = |s: &crate::explain::BreakDownStep<f64>| format!("{} = {}", s.variable, value_text(t, s.var, s.value));
    let strongest = bd
        .steps
        .iter()
        .fold(None::<&crate::explain::BreakDownStep<f64>>, |best, s| match best {
            Some(b) if b.contribution.abs() >= s.contribution.abs() => Some(b),
            _ => Some(s),
        })
        .filter(|s| s.contribution.abs() > NEGLIGIBLE);
    let text = match strongest {
        None => say(t, "bd_flat", &[("prediction", percent(bd.prediction))]),
        Some(top) => {
            let mut text = say(
                t,
                "bd_summary",
                &[
                    ("prediction", percent(bd.prediction)),
                    ("intercept", percent(bd.intercept)),
                    ("strongest", label(top)),
                    ("strongest_delta", points(top.contribution)),
                ],
            );
            let up = bd.steps.iter().filter(|s| s.contribution > 0.0).fold(None::<&crate::explain::BreakDownStep<f64>>, |b, s| match b {
                Some(b) if b.contribution >= s.contribution => Some(b),
                _ => Some(s),
            });
            let down = bd.steps.iter().filter(|s| s.contribution < 0.0).fold(None::<&crate::explain::BreakDownStep<f64>>, |b, s| match b {
                Some(b) if b.contribution <= s.contribution => Some(b),
                _ => Some(s),
            });
            for (key, step) in [("bd_up", up), ("bd_down", down)] {
                if let Some(s) = step.filter(|s| s.var != top.var) {
                    text.push(' ');
                    text.push_str(&say(t, key, &[("variable", label(s)), ("delta", points(s.contribution))]));
                }
            }
            text
        }
    };
    Ok(Reply {
        text,
        rich: vec![spec],
        imputed,
        prediction: Some(bd.prediction),
        ..Reply::default()
    })
}

/// The variable a what-if question is about: named directly, or implied by
/// a level or qualified number in the utterance.
fn what_if_variable(t: &Turn) -> Option<String> {
    let e = &t.matched.entities;
    e.variable
        .clone()
        .or_else(|| e.class.as_ref().map(|_| "class".to_string()))
        .or_else(|| e.gender.as_ref().map(|_| "gender".to_string()))
        .or_else(|| e.embarked.as_ref().map(|_| "embarked".to_string()))
        .or_else(|| e.numbers.iter().find_map(|n| n.qualifier.variable()).map(String::from))
}

/// Encoded target value for `var` mentioned in the utterance, if any.
fn what_if_target(t: &Turn, var: &str) -> Result<Option<f64>, DialogueError> {
    let e = &t.matched.entities;
    let cell = match var {
        "gender" => e.gender.clone().map(Cell::Level),
        "class" => e.class.clone().map(Cell::Level),
        "embarked" => e.embarked.clone().map(Cell::Level),
        _ => {
            let q = Qualifier::for_variable(var);
            e.numbers
                .iter()
                .find(|n| Some(n.qualifier) == q)
                .or_else(|| e.numbers.iter().find(|n| n.qualifier == Qualifier::Bare))
                .map(|n| Cell::Number(n.value))
        }
    };
    let Some(cell) = cell else { return Ok(None) };
    let (idx, _) = t.deps.schema.variable(var)?;
    let enc = t.deps.schema.encode(&crate::tabular::Observation::new().with(var, cell))?;
    Ok(enc.row[idx])
}

fn what_if(t: &Turn, next: &mut SessionState) -> Outcome {
    let Some(var) = what_if_variable(t) else {
        next.nlu_ctx = NluContext::prompt(ContextTag::Variable);
        return Ok(text_reply(say(t, "ask_variable", &[])));
    };
    let (row, imputed) = t.deps.current_row(&next.slots)?;
    let grid = grid_for(&t.deps.train, &var)?;
    let cp = ceteris_paribus(|r: &[f64]| t.deps.predict(r), &t.deps.schema, &row, grid)?;
    let mut text = say(
        t,
        "cp_profile",
        &[
            ("variable", var.clone()),
            ("value", value_text(t, cp.var, cp.observed_value)),
            ("percent", percent(cp.observed_prediction)),
        ],
    );
    if let Some(target) = what_if_target(t, &var)? {
        let mut changed = row.clone();
        changed[cp.var] = target;
        let p = t.deps.predict(&changed);
        text.push(' ');
        text.push_str(&say(
            t,
            "cp_target",
            &[
                ("variable", var.clone()),
                ("value", value_text(t, cp.var, target)),
                ("percent", percent(p)),
                ("delta", points(p - cp.observed_prediction)),
            ],
        ));
    }
    Ok(Reply {
        text,
        rich: vec![PlotSpec::ceteris_paribus(&t.deps.schema, &cp)],
        imputed,
        prediction: Some(cp.observed_prediction),
        ..Reply::default()
    })
}

fn how_to_improve(t: &Turn, next: &SessionState) -> Outcome {
    let (row, imputed) = t.deps.current_row(&next.slots)?;
    let current = t.deps.predict(&row);
    let suggestions = best_single_change(|r: &[f64]| t.deps.predict(r), &t.deps.train, &row);
    let text = if suggestions.is_empty() {
        say(t, "improve_none", &[])
    } else {
        let mut text = say(t, "improve_intro", &[]);
        for s in suggestions.iter().take(3) {
            let note = if actionable(&s.variable, s.from, s.to) {
                String::new()
            } else {
                format!(" {}", say(t, "improve_fixed", &[]))
            };
            text.push(' ');
            text.push_str(&say(
                t,
                "improve_item",
                &[
                    ("variable", s.variable.clone()),
                    ("value", value_text(t, s.var, s.to)),
                    ("percent", percent(s.prediction)),
                    ("delta", points(s.delta)),
                    ("note", note),
                ],
            ));
            text.push(';');
        }
        text.pop();
        text.push('.');
        text
    };
    Ok(Reply {
        text,
        imputed,
        prediction: Some(current),
        ..Reply::default()
    })
}

fn class_comparison(t: &Turn, next: &SessionState) -> Outcome {
    let e = &t.matched.entities;
    let categorical = |v: &str| t.deps.schema.variable(v).map(|(_, d)| d.is_categorical()).unwrap_or(false);
    let var = e
        .variable
        .clone()
        .filter(|v| categorical(v))
        .or_else(|| e.gender.as_ref().map(|_| "gender".to_string()))
        .or_else(|| e.embarked.as_ref().map(|_| "embarked".to_string()))
        .unwrap_or_else(|| "class".to_string());
    let (row, imputed) = t.deps.current_row(&next.slots)?;
    let rates = group_outcome_rate(&t.deps.data, &var)?;
    let grid = grid_for(&t.deps.train, &var)?;
    let cp = ceteris_paribus(|r: &[f64]| t.deps.predict(r), &t.deps.schema, &row, grid)?;
    let mut text = say(t, "compare_intro", &[("variable", var.clone())]);
    for (rate, p) in rates.iter().zip(&cp.predictions) {
        text.push(' ');
        text.push_str(&say(
            t,
            "compare_item",
            &[
                ("level", rate.level.clone()),
                ("rate", rate.rate.map_or("n/a".into(), percent)),
                ("n", rate.n.to_string()),
                ("model", percent(*p)),
            ],
        ));
        text.push(';');
    }
    text.pop();
    text.push('.');
    Ok(Reply {
        text,
        rich: vec![PlotSpec::ceteris_paribus(&t.deps.schema, &cp)],
        imputed,
        prediction: Some(cp.observed_prediction),
        ..Reply::default()
    })
}

fn extremes(t: &Turn) -> Outcome {
    let low = tokens(t.text).iter().any(|w| {
        matches!(
            w.as_str(),
            "die" | "died" | "dies" | "least" | "lowest" | "worst" | "unluckiest" | "dead"
        )
    });
    let direction = if low { Direction::Lowest } else { Direction::Highest };
    let cases = extreme_cases(|r: &[f64]| t.deps.predict(r), &t.deps.population, 3, direction);
    let mut text = say(t, if low { "extreme_low" } else { "extreme_high" }, &[]);
    for c in &cases {
        let values: Vec<String> = c
            .row
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{} {}", t.deps.schema.variables()[i].name, value_text(t, i, v)))
            .collect();
        text.push(' ');
        text.push_str(&say(
            t,
            "extreme_item",
            &[
                ("row", (c.row_id + 1).to_string()),
                ("values", join(&values)),
                ("percent", percent(c.prediction)),
            ],
        ));
        text.push(';');
    }
    text.pop();
    text.push('.');
    Ok(text_reply(text))
}

fn what_do_you_know(t: &Turn, next: &SessionState) -> Outcome {
    let (known, missing) = known_and_missing(t, next);
    if known.is_empty() {
        return Ok(Reply {
            text: say(t, "wdyk_empty", &[]),
            chips: Some(vec![
                "I am a 20 year old woman".into(),
                "I travelled in 3rd class".into(),
                "Impersonate Jack".into(),
                "Impersonate Rose".into(),
            ]),
            ..Reply::default()
        });
    }
    let mut parts = Vec::new();
    if let Some(p) = next.persona.as_deref().and_then(|id| t.deps.persona(id)) {
        parts.push(say(t, "wdyk_persona", &[("name", p.name.clone())]));
    }
    parts.push(say(t, "wdyk_known", &[("values", join(&known))]));
    parts.push(if missing.is_empty() {
        say(t, "wdyk_complete", &[])
    } else {
        say(t, "wdyk_missing", &[("variables", join(&missing))])
    });
    Ok(text_reply(parts.join(" ")))
}

fn impersonate(t: &Turn, next: &mut SessionState) -> Outcome {
    let Some(id) = &t.matched.entities.persona else {
        let names: Vec<String> = t.deps.personas.iter().map(|p| p.name.clone()).collect();
        return Ok(Reply {
            text: say(t, "impersonate_which", &[]),
            chips: Some(names),
            ..Reply::default()
        });
    };
    *next = super::impersonate(next, id, t.deps)?;
    let persona = t.deps.persona(id).expect("checked by impersonate");
    let (known, _) = known_and_missing(t, next);
    Ok(text_reply(say(
        t,
        "impersonate",
        &[("name", persona.name.clone()), ("values", join(&known))],
    )))
}

fn eda(t: &Turn) -> Outcome {
    let e = &t.matched.entities;
    let data = &t.deps.data;
    let level = [("gender", &e.gender), ("class", &e.class), ("embarked", &e.embarked)]
        .into_iter()
        .find_map(|(v, l)| l.as_ref().map(|l| (v, l.clone())));
    if let Some((var, level)) = level {
        let rates = group_outcome_rate(data, var)?;
        let g = rates.iter().find(|r| r.level == level).expect("lexicon levels are schema levels");
        return Ok(text_reply(say(
            t,
            "eda_group",
            &[
                ("n", g.n.to_string()),
                ("variable", var.to_string()),
                ("level", level.clone()),
                ("survived", g.survived.to_string()),
                ("rate", g.rate.map_or("n/a".into(), percent)),
            ],
        )));
    }
    if let Some(var) = &e.variable {
        return match summarize_variable(data, var)? {
            VariableSummary::Numeric {
                variable,
                count,
                missing,
                stats: Some(s),
            } => Ok(Reply {
                text: say(
                    t,
                    "eda_numeric",
                    &[
                        ("variable", variable.clone()),
                        ("count", count.to_string()),
                        ("missing", missing.to_string()),
                        ("min", format_number(s.min)),
                        ("max", format_number(s.max)),
                        ("mean", format_number(s.mean)),
                        ("median", format_number(s.median)),
                    ],
                ),
                rich: vec![PlotSpec::histogram(&variable, &s.histogram)],
                ..Reply::default()
            }),
            VariableSummary::Numeric { variable, .. } => {
                Ok(text_reply(say(t, "eda_numeric_empty", &[("variable", variable)])))
            }
            VariableSummary::Categorical {
                variable,
                missing,
                levels,
                ..
            } => {
                let parts: Vec<String> = levels.iter().map(|(l, c)| format!("{l} {c}")).collect();
                Ok(text_reply(say(
                    t,
                    "eda_categorical",
                    &[
                        ("variable", variable),
                        ("levels", join(&parts)),
                        ("missing", missing.to_string()),
                    ],
                )))
            }
        };
    }
    let survived = data.targets().iter().filter(|&&y| y).count();
    let names: Vec<String> = t.deps.schema.names().map(String::from).collect();
    Ok(text_reply(say(
        t,
        "eda_overview",
        &[
            ("n", data.len().to_string()),
            ("survived", survived.to_string()),
            ("rate", percent(survived as f64 / data.len() as f64)),
            ("variables", join(&names)),
        ],
    )))
}

fn model_info(t: &Turn) -> Outcome {
    let Some(info) = &t.deps.model_info else {
        return Ok(text_reply(say(t, "model_unknown", &[])));
    };
    let base = [("trees", info.trees.to_string()), ("rows", info.train_rows.to_string())];
    let text = match &info.metrics {
        Some(m) => {
            let mut args = base.to_vec();
            args.push(("auc", m.auc.map_or("n/a".into(), |a| format!("{a:.3}"))));
            args.push(("f1", format!("{:.3}", m.f1)));
            args.push(("accuracy", format!("{:.3}", m.accuracy)));
            say(t, "model_info", &args)
        }
        None => say(t, "model_basic", &base),
    };
    Ok(text_reply(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(percent(0.503), "50%");
        assert_eq!(percent(0.125), "13%");
        assert_eq!(points(-1.0), "-100.0 points");
        assert_eq!(points(0.00001), "+0.0 points");
        assert_eq!(points(-0.00001), "+0.0 points");
    }
}
