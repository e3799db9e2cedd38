use anyhow::{anyhow, bail, Context};
use explainbot_core::explain::{break_down, ceteris_paribus, grid_for, PlotSpec};
use explainbot_core::tabular::{Cell, Observation};
use explainbot_service::load;
use serde_json::json;

use crate::{render, Format, ModelArgs, Outcome};

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    model: ModelArgs,
    /// Explain this passenger row of the data (0-based).
    #[arg(long, conflicts_with = "set")]
    row: Option<usize>,
    /// Passenger value as name=value, repeatable; missing ones are imputed.
    #[arg(long, value_name = "NAME=VALUE")]
    set: Vec<String>,
    /// Also print the what-if profile for this variable.
    #[arg(long)]
    variable: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn observation(
    a: &Args,
    data: &explainbot_core::Dataset,
) -> anyhow::Result<Observation<f64>> {
    if let Some(i) = a.row {
        if i >= data.len() {
            bail!("--row {i} is out of range: the data has {} passengers", data.len());
        }
        return Ok(data.observation(i));
    }
    let mut obs = Observation::new();
    for s in &a.set {
        let (name, value) = s.split_once('=').ok_or_else(|| anyhow!("expected NAME=VALUE, got `{s}`"))?;
        let (_, def) = data.schema().variable(name.trim())?;
        let cell = if def.is_categorical() {
            Cell::Level(value.trim().to_string())
        } else {
            Cell::Number(value.trim().parse::<f64>().with_context(|| format!("`{value}` is not a number"))?)
        };
        obs.set(name.trim(), cell);
    }
    Ok(obs)
}

pub fn run(a: Args) -> Outcome {
    let loaded = load(&a.model.load_options()).context("loading the model")?;
    let deps = &loaded.deps;
    let obs = observation(&a, &deps.data)?;
    let (row, imputed) = deps.current_row(&obs)?;
    let predict = |r: &[f64]| deps.predict(r);
    let bd = PlotSpec::break_down(&deps.schema, &break_down(predict, &deps.background, &row)?);
    let cp = match &a.variable {
        Some(v) => {
            let grid = grid_for(&deps.train, v)?;
            Some(PlotSpec::ceteris_paribus(&deps.schema, &ceteris_paribus(predict, &deps.schema, &row, grid)?))
        }
        None => None,
    };
    let prediction = deps.predict(&row);
    match a.format {
        Format::Json => {
            let v = json!({ "prediction": prediction, "imputed": imputed, "break_down": bd, "ceteris_paribus": cp });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        Format::Text => {
            println!("prediction {prediction:.3}");
            if !imputed.is_empty() {
                println!("imputed {}", imputed.join(", "));
            }
            print!("{}", render::plot(&bd));
            if let Some(cp) = &cp {
                print!("{}", render::plot(cp));
            }
        }
    }
    Ok(())
}
