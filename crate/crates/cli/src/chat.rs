use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;

use anyhow::Context;
use explainbot_core::corpus::{now_millis, LogTurn, LogWriter};
use explainbot_core::dialogue::{handle_turn, Response, SessionState};
use explainbot_service::load;

use crate::{render, ModelArgs, Outcome};

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    model: ModelArgs,
    /// Append the transcript to this dialogue log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Session id written to the log.
    #[arg(long, default_value = "terminal")]
    session_id: String,
}

pub fn print_response(out: &mut impl Write, r: &Response) -> std::io::Result<()> {
    writeln!(out, "bot: {}", r.text)?;
    for spec in &r.rich {
        write!(out, "{}", render::plot(spec))?;
    }
    if !r.suggestions.is_empty() {
        writeln!(out, "  [{}]", r.suggestions.join(" | "))?;
    }
    Ok(())
}

pub fn run(a: Args) -> Outcome {
    let loaded = load(&a.model.load_options()).context("loading the model")?;
    let mut log = match &a.log {
        Some(p) => Some(LogWriter::open(p).with_context(|| format!("opening {}", p.display()))?),
        None => None,
    };
    let stdin = std::io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = std::io::stdout().lock();
    let mut state = SessionState::default();
    let mut last_ts = 0;
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            eprint!("you> ");
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text == "exit" || text == "quit" {
            break;
        }
        let (next, resp) = handle_turn(&state, text, &loaded.deps);
        print_response(&mut out, &resp)?;
        out.flush()?;
        if let Some(w) = &mut log {
            last_ts = now_millis().max(last_ts);
            w.append(&LogTurn {
                session_id: a.session_id.clone(),
                timestamp: last_ts,
                user_text: text.to_string(),
                intent: resp.debug.intent.clone(),
                entities: resp.debug.entities.clone(),
                reply_text: resp.text.clone(),
            })?;
        }
        state = next;
    }
    Ok(())
}
