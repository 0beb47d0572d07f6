use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use causeplan::PlannerConfig;
use causeplan_service::{router, AppState, Settings};

/// Serve the causal-model authoring API.
#[derive(Parser)]
#[command(name = "causeplan-serve", version)]
struct Args {
    #[arg(long, env = "CAUSEPLAN_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    #[arg(long, env = "CAUSEPLAN_CATALOG", default_value = "fixtures/catalog")]
    catalog: PathBuf,
    #[arg(long, env = "CAUSEPLAN_DATA", default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, env = "CAUSEPLAN_DISCOUNT")]
    discount: Option<f64>,
    #[arg(long, env = "CAUSEPLAN_EPSILON")]
    epsilon: Option<f64>,
    #[arg(long, env = "CAUSEPLAN_MAX_STATES")]
    max_states: Option<usize>,
    #[arg(long, env = "CAUSEPLAN_WORKERS", default_value_t = 4)]
    workers: usize,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let d = PlannerConfig::default();
    let settings = Settings {
        catalog_dir: args.catalog,
        data_dir: args.data_dir,
        planner: PlannerConfig {
            discount: args.discount.unwrap_or(d.discount),
            epsilon: args.epsilon.unwrap_or(d.epsilon),
            max_states: args.max_states.unwrap_or(d.max_states),
            ..d
        },
        workers: args.workers,
    };
    let state = match AppState::new(&settings) {
        Ok(state) => state,
        Err(e) => {
            tracing::error!("{e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(args.listen).await {
        Ok(l) => l,
        Err(e) => {
            tracing::error!("binding {}: {e}", args.listen);
            return ExitCode::FAILURE;
        }
    };
    tracing::info!("listening on {}", args.listen);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
    {
        tracing::error!("{e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
