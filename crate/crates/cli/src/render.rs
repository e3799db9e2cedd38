//! Plain-text tables for chart payloads.

use std::fmt::Write as _;

use explainbot_core::explain::{PlotSpec, PlotValue};

/// Rows of a profile shown in the terminal, besides the observed point.
const PROFILE_ROWS: usize = 11;

fn value(v: &PlotValue) -> String {
    match v {
        PlotValue::Number(x) => format!("{x:.3}"),
        PlotValue::Level(l) => l.clone(),
    }
}

pub fn plot(spec: &PlotSpec) -> String {
    let mut out = String::new();
    match spec {
        PlotSpec::BreakDown { intercept, steps, prediction } => {
            let label = |s: &explainbot_core::explain::PlotStep| format!("{} = {}", s.variable, value(&s.value));
            let width = steps.iter().map(|s| label(s).len()).max().unwrap_or(0).max(10);
            let _ = writeln!(out, "  {:<width$}  {:>7.3}", "intercept", intercept);
            for s in steps {
                let _ = writeln!(out, "  {:<width$}  {:>+7.3}", label(s), s.contribution);
            }
            let _ = writeln!(out, "  {:<width$}  {:>7.3}", "prediction", prediction);
        }
        PlotSpec::CeterisParibus { variable, grid, predictions, observed } => {
            let step = (grid.len() / (PROFILE_ROWS - 1)).max(1);
            let width = grid.iter().map(|g| value(g).len()).max().unwrap_or(0).max(variable.len());
            let _ = writeln!(out, "  {:<width$}  prediction", variable);
            let mut shown_observed = false;
            for (i, (g, p)) in grid.iter().zip(predictions).enumerate() {
                let is_observed = *g == observed.value;
                if i % step != 0 && i + 1 != grid.len() && !is_observed {
                    continue;
                }
                let mark = if is_observed && !shown_observed { "  <- you" } else { "" };
                shown_observed |= is_observed;
                let _ = writeln!(out, "  {:<width$}  {:.3}{}", value(g), p, mark);
            }
        }
        PlotSpec::Histogram { variable, bins } => {
            let top = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
            let _ = writeln!(out, "  {variable}");
            for b in bins {
                let bar = "#".repeat((b.count * 30).div_ceil(top));
                let _ = writeln!(out, "  {:>8.1} - {:<8.1} {:<30} {}", b.lo, b.hi, bar, b.count);
            }
        }
    }
    out
}
