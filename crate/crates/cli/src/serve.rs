use std::io::Cursor;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use explainbot_core::forest::read_forest;
use explainbot_core::tabular::Schema;
use explainbot_core::Forest;
use explainbot_service::{load, serve, AppState, ServiceConfig};

use crate::{config, ModelArgs, Outcome};

#[derive(clap::Args)]
pub struct Args {
    #[command(flatten)]
    model: ModelArgs,
    /// Dialogue log (JSONL), appended to.
    #[arg(long, env = "EXPLAINBOT_LOG")]
    log: Option<PathBuf>,
    #[arg(long, env = "EXPLAINBOT_PORT", default_value_t = config::PORT)]
    port: u16,
    #[arg(long, env = "EXPLAINBOT_HOST", default_value = config::HOST)]
    host: String,
    /// Comma-separated allowed CORS origins, `*` for any.
    #[arg(long, env = "EXPLAINBOT_CORS_ORIGINS", default_value = config::CORS_ORIGINS)]
    cors_origins: String,
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

pub fn run(a: Args) -> Outcome {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    if let Some(p) = &a.model.model {
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        let _: Forest = read_forest(Cursor::new(bytes), Arc::new(Schema::titanic()))
            .with_context(|| format!("loading {}", p.display()))?;
    }
    let app = AppState::new(ServiceConfig {
        log_path: a.log.clone(),
        cors_origins: a.cors_origins.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        ..ServiceConfig::default()
    })
    .context("opening the dialogue log")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port))
            .await
            .with_context(|| format!("binding {}:{}", a.host, a.port))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        let opts = a.model.load_options();
        let loader = app.clone();
        let loading = tokio::task::spawn_blocking(move || load(&opts).map(|l| loader.install(l)));
        let server = tokio::spawn(serve(listener, app, shutdown_signal()));
        loading.await?.context("loading the model")?;
        eprintln!("model loaded");
        server.await??;
        Ok::<(), anyhow::Error>(())
    })?;
    Ok(())
}
