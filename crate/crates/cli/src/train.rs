use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use explainbot_core::forest::{fit, save_forest, ForestParams, SplitSpec};
use explainbot_core::tabular::{bundled_titanic, load_dataset, Schema};
use explainbot_core::Dataset;

use crate::{config, Failure, Format, Outcome};

#[derive(clap::Args)]
pub struct Args {
    /// Passenger CSV (default: the bundled Titanic table).
    #[arg(long, env = "EXPLAINBOT_DATA")]
    data: Option<PathBuf>,
    /// Where to write the model.
    #[arg(long, env = "EXPLAINBOT_OUT")]
    out: PathBuf,
    #[arg(long, env = "EXPLAINBOT_SEED", default_value_t = config::SEED)]
    seed: u64,
    /// Share of passengers held out for evaluation, stratified by outcome.
    #[arg(long, env = "EXPLAINBOT_TEST_FRACTION", default_value_t = config::TEST_FRACTION)]
    test_fraction: f64,
    #[arg(long, env = "EXPLAINBOT_TREES", default_value_t = config::TREES)]
    trees: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn run(a: Args) -> Outcome {
    if !(a.test_fraction > 0.0 && a.test_fraction < 1.0) {
        return Err(anyhow::anyhow!("--test-fraction must be strictly between 0 and 1").into());
    }
    let ds: Dataset = match &a.data {
        Some(p) => load_dataset(p, Arc::new(Schema::titanic())).with_context(|| format!("reading {}", p.display()))?,
        None => bundled_titanic(),
    };
    if ds.is_empty() {
        return Err(Failure::Degenerate("no data".into()));
    }
    let mut params = ForestParams::defaults_for(ds.schema().len());
    params.seed = a.seed;
    params.n_trees = a.trees;
    let spec = SplitSpec {
        seed: a.seed,
        test_fraction: a.test_fraction,
    };
    let fitted = fit(&ds, spec, params).map_err(|e| Failure::Degenerate(e.to_string()))?;
    save_forest(&fitted.forest, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let m = fitted.forest.meta.metrics.as_ref().expect("fit records metrics");
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(m)?),
        Format::Text => {
            println!("trained {} trees on {} passengers, tested on {}", a.trees, fitted.train.len(), fitted.test.len());
            match m.auc {
                Some(auc) => println!("AUC       {auc:.4}"),
                None => println!("AUC       n/a"),
            }
            println!("F1        {:.4}", m.f1);
            println!("accuracy  {:.4}", m.accuracy);
            let c = &m.confusion;
            println!("confusion tp {} fp {} tn {} fn {}", c.tp, c.fp, c.tn, c.fn_);
            println!("model written to {}", a.out.display());
        }
    }
    Ok(())
}
