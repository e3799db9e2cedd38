use std::fmt::Write as _;

use serde::Serialize;

use super::{corpus_stats, filter_corpus, intent_flow, taxonomy_table, CorpusStats, FlowEdge, LoadedCorpus, Taxonomy};
use crate::tabular::format_number;

pub const TOTAL_LABEL: &str = "Number of all analyzed dialogues";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub query_type: &'static str,
    pub dialogues_count: usize,
}

/// Everything the `analyze` command prints, in one serializable value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub malformed_lines: usize,
    pub partial_tail: bool,
    pub dialogues_loaded: usize,
    pub min_queries: usize,
    pub drop_irrelevant: bool,
    pub stats: CorpusStats,
    pub query_types: Vec<TableRow>,
    pub number_of_all_analyzed_dialogues: usize,
    pub flow_depth: usize,
    pub intent_flow: Vec<FlowEdge>,
}

impl Report {
    pub fn build(
        corpus: &LoadedCorpus,
        taxonomy: &Taxonomy,
        min_queries: usize,
        drop_irrelevant: bool,
        flow_depth: usize,
    ) -> Self {
        let kept = filter_corpus(&corpus.conversations, min_queries, drop_irrelevant);
        Self {
            malformed_lines: corpus.malformed,
            partial_tail: corpus.partial_tail,
            dialogues_loaded: corpus.conversations.len(),
            min_queries,
            drop_irrelevant,
            stats: corpus_stats(&kept),
            query_types: taxonomy_table(taxonomy, &kept)
                .into_iter()
                .map(|(t, n)| TableRow {
                    query_type: t.label(),
                    dialogues_count: n,
                })
                .collect(),
            number_of_all_analyzed_dialogues: kept.len(),
            flow_depth,
            intent_flow: intent_flow(&kept, flow_depth),
        }
    }

    /// One line like `621 dialogues, 5675 queries, mean 9.14, median 7, max 83`.
    pub fn summary_line(&self) -> String {
        let s = &self.stats;
        let opt = |x: Option<f64>, f: &dyn Fn(f64) -> String| x.map(f).unwrap_or_else(|| "n/a".into());
        format!(
            "{} dialogues, {} queries, mean {}, median {}, max {}",
            s.n_dialogues,
            s.n_queries,
            opt(s.mean_length, &|m| format!("{m:.2}")),
            opt(s.median_length, &|m| format_number(m)),
            s.max_length
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.summary_line());
        let _ = writeln!(
            out,
            "loaded {} dialogues, kept {} with at least {} queries{}",
            self.dialogues_loaded,
            self.number_of_all_analyzed_dialogues,
            self.min_queries,
            if self.drop_irrelevant { " and one understood query" } else { "" }
        );
        if self.malformed_lines > 0 || self.partial_tail {
            let _ = writeln!(
                out,
                "skipped {} malformed line(s){}",
                self.malformed_lines,
                if self.partial_tail { " and an unterminated last line" } else { "" }
            );
        }
        out.push_str("\nConversation length\n");
        let widest = self.stats.buckets.iter().map(|b| b.count).max().unwrap_or(0).max(1);
        for b in &self.stats.buckets {
            let bar = "#".repeat((b.count * 40).div_ceil(widest));
            let _ = writeln!(out, "{:>9}  {:<40}  {}", format!("{}-{}", b.lo, b.hi), bar, b.count);
        }
        let width = self.query_types.iter().map(|r| r.query_type.len()).chain([TOTAL_LABEL.len()]).max().unwrap_or(0);
        let _ = writeln!(out, "\n{:<width$}  Dialogues count", "Query type");
        for r in &self.query_types {
            let _ = writeln!(out, "{:<width$}  {}", r.query_type, r.dialogues_count);
        }
        let _ = writeln!(out, "{:<width$}  {}", TOTAL_LABEL, self.number_of_all_analyzed_dialogues);
        let _ = writeln!(out, "\nIntent flow (depth {})", self.flow_depth);
        if self.intent_flow.is_empty() {
            out.push_str("(none)\n");
        }
        for e in &self.intent_flow {
            let _ = writeln!(out, "{:>6}  {}", e.count, e.path.join(" -> "));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
