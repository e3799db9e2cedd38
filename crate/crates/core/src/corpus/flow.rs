use std::collections::HashMap;

use serde::Serialize;

use super::Conversation;

/// A run of `depth` consecutive logged intents and how often it occurs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowEdge {
    pub path: Vec<String>,
    pub count: usize,
}

/// Counts every window of exactly `depth` consecutive intents within each
/// conversation. Sorted by count descending, then path.
pub fn intent_flow(convs: &[Conversation], depth: usize) -> Vec<FlowEdge> {
    if depth == 0 {
        return Vec::new();
    }
    let mut counts: HashMap<Vec<&str>, usize> = HashMap::new();
    for c in convs {
        let intents: Vec<&str> = c.turns.iter().map(|t| t.intent.as_str()).collect();
        for w in intents.windows(depth) {
            *counts.entry(w.to_vec()).or_default() += 1;
        }
    }
    let mut edges: Vec<FlowEdge> = counts
        .into_iter()
        .map(|(path, count)| FlowEdge {
            path: path.into_iter().map(str::to_string).collect(),
            count,
        })
        .collect();
    edges.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.path.cmp(&b.path)));
    edges
}
