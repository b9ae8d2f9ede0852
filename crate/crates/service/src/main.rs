use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;

/// Serves exam sessions over HTTP.
#[derive(Debug, Parser)]
#[command(name = "acuity-service", version)]
struct Args {
    /// Directory holding one JSON-lines log per session.
    #[arg(long, env = "ACUITY_DATA_DIR", default_value = "acuity-data")]
    data_dir: PathBuf,
    /// Address to listen on.
    #[arg(long, env = "ACUITY_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let state = acuity_service::AppState::open(&args.data_dir)
        .with_context(|| format!("opening data dir {}", args.data_dir.display()))?;
    let listener = tokio::net::TcpListener::bind(args.bind)
        .await
        .with_context(|| format!("binding {}", args.bind))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, acuity_service::router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
