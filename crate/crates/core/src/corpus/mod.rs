//! Dialogue log analytics: conversation lengths, query taxonomy counts and
//! intent flows over a JSONL log of turns.

mod flow;
mod log;
mod report;
mod stats;
mod taxonomy;

pub use flow::{intent_flow, FlowEdge};
pub use log::{append_log, load_corpus, now_millis, parse_log, Conversation, LoadedCorpus, LogTurn, LogWriter};
pub use report::{Report, TableRow, TOTAL_LABEL};
pub use stats::{corpus_stats, filter_corpus, Bucket, CorpusStats, LengthBin, BUCKET_START, BUCKET_WIDTH, DEFAULT_MIN_QUERIES};
pub use taxonomy::{taxonomy_table, QueryType, Taxonomy, TaxonomyRule, BUNDLED_TAXONOMY};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no data")]
    NoData,
    #[error("taxonomy line {line}: {reason}")]
    BadTaxonomy { line: usize, reason: String },
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}
