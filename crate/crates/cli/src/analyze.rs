use std::path::PathBuf;

use anyhow::Context;
use explainbot_core::corpus::{load_corpus, CorpusError, Report, Taxonomy};

use crate::{config, Failure, Format, Outcome};

#[derive(clap::Args)]
pub struct Args {
    /// Dialogue log written by `serve` or `chat --log`.
    #[arg(long, env = "EXPLAINBOT_LOG")]
    log: PathBuf,
    /// Conversations with fewer user queries are left out.
    #[arg(long, env = "EXPLAINBOT_MIN_QUERIES", default_value_t = config::MIN_QUERIES)]
    min_queries: usize,
    /// Also leave out conversations where no query was understood.
    #[arg(long)]
    drop_irrelevant: bool,
    /// Length of the intent sequences counted in the flow.
    #[arg(long, env = "EXPLAINBOT_FLOW_DEPTH", default_value_t = config::FLOW_DEPTH)]
    depth: usize,
    /// Query taxonomy rule file (default: bundled).
    #[arg(long, env = "EXPLAINBOT_TAXONOMY")]
    taxonomy: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn run(a: Args) -> Outcome {
    let taxonomy = match &a.taxonomy {
        Some(p) => Taxonomy::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Taxonomy::bundled(),
    };
    let corpus = match load_corpus(&a.log) {
        Ok(c) => c,
        Err(CorpusError::NoData) => return Err(Failure::Degenerate("no data".into())),
        Err(e) => return Err(anyhow::Error::new(e).context(format!("reading {}", a.log.display())).into()),
    };
    let report = Report::build(&corpus, &taxonomy, a.min_queries, a.drop_irrelevant, a.depth);
    match a.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    Ok(())
}
