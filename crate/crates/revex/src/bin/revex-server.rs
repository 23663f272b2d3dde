use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use revex::config::ServerConfig;
use revex::service::{router, AppState};
use revex::store::SessionStore;
use revex_core::suggest::DissimilarityMode;

/// Review exploration server.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// TOML configuration file; flags and environment override it.
    #[arg(long, env = "REVEX_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "REVEX_CORPUS")]
    corpus: Option<PathBuf>,
    #[arg(long, env = "REVEX_STORE")]
    store: Option<PathBuf>,
    #[arg(long, env = "REVEX_LISTEN")]
    listen: Option<String>,
    #[arg(long, env = "REVEX_SIMILARITY_THRESHOLD")]
    similarity_threshold: Option<f64>,
    #[arg(long, env = "REVEX_SKEW_THRESHOLD")]
    skew_threshold: Option<f64>,
    #[arg(long, env = "REVEX_SUGGESTION_COUNT")]
    suggestion_count: Option<usize>,
    #[arg(long, env = "REVEX_UI_ORIGIN")]
    ui_origin: Option<String>,
    #[arg(long, env = "REVEX_EMBEDDER")]
    embedder: Option<String>,
    #[arg(long, env = "REVEX_VECTORS")]
    vectors: Option<PathBuf>,
    /// Use distance to the nearest visited review instead of the farthest.
    #[arg(long)]
    nearest: bool,
    /// Write the ingestion rejection report here as JSON.
    #[arg(long)]
    rejections: Option<PathBuf>,
}

impl Args {
    fn resolve(self) -> anyhow::Result<(ServerConfig, Option<PathBuf>)> {
        let mut c = match &self.config {
            Some(path) => ServerConfig::from_toml_file(path)?,
            None => ServerConfig::default(),
        };
        if let Some(v) = self.corpus {
            c.corpus = v;
        }
        if let Some(v) = self.store {
            c.store = v;
        }
        if let Some(v) = self.listen {
            c.listen = v;
        }
        if let Some(v) = self.similarity_threshold {
            c.similarity_threshold = v;
        }
        if let Some(v) = self.skew_threshold {
            c.skew_threshold = v;
        }
        if let Some(v) = self.suggestion_count {
            c.suggestion_count = v;
        }
        if self.ui_origin.is_some() {
            c.ui_origin = self.ui_origin;
        }
        if let Some(v) = self.embedder {
            c.embedder = v;
        }
        if self.vectors.is_some() {
            c.vectors = self.vectors;
        }
        if self.nearest {
            c.dissimilarity = DissimilarityMode::Nearest;
        }
        c.validate()?;
        Ok((c, self.rejections))
    }
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let (config, rejections) = Args::parse().resolve()?;

    let (catalog, report) = config.load_catalog().context("loading corpus")?;
    tracing::info!(
        products = catalog.len(),
        accepted = report.accepted,
        rejected = report.rejected(),
        "corpus loaded"
    );
    if let Some(path) = rejections {
        std::fs::write(&path, serde_json::to_vec_pretty(&report)?).with_context(|| format!("{}", path.display()))?;
    }

    let store = SessionStore::open(&config.store)?;
    let app = AppState::open(Arc::new(catalog), config.engine(), store).context("restoring sessions")?;
    tracing::info!(sessions = app.session_count(), "sessions restored");

    let app = router(Arc::new(app), config.ui_origin.as_deref())?;
    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .with_context(|| config.listen.clone())?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
