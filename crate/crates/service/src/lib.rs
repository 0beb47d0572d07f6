//! HTTP service for the three-step authoring protocol: label the training
//! object's parts, write and check a causal model against plans, then bind
//! a test object and replan with the frozen model.
//!
//! | method | path                       |                                   |
//! |--------|----------------------------|-----------------------------------|
//! | GET    | `/objects`                 | catalog summaries                 |
//! | GET    | `/objects/{id}`            | full object document              |
//! | POST   | `/models/validate`         | body is model text                |
//! | POST   | `/sessions`                | new session                       |
//! | GET    | `/sessions/{id}`           |                                   |
//! | PUT    | `/sessions/{id}`           | save step 1 or 2 (versioned)      |
//! | POST   | `/sessions/{id}/plan`      | plan with the step-2 model        |
//! | POST   | `/sessions/{id}/transfer`  | step 3, bindings only             |

mod api;
mod error;
pub mod session;

use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use tokio::sync::Semaphore;

use causeplan::{Catalog, CatalogError, PlannerConfig};

pub use error::ApiError;
pub use session::{Session, SessionStore};

pub struct Settings {
    pub catalog_dir: PathBuf,
    pub data_dir: PathBuf,
    pub planner: PlannerConfig,
    /// Planning runs allowed at once.
    pub workers: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("loading catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("opening data directory {}: {source}", path.display())]
    DataDir {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Planner(#[from] causeplan::PlannerError),
    #[error("worker cap must be at least 1")]
    Workers,
}

#[derive(Clone)]
pub struct AppState {
    catalog: Arc<Catalog>,
    store: SessionStore,
    planner: PlannerConfig,
    workers: Arc<Semaphore>,
}

impl AppState {
    pub fn new(settings: &Settings) -> Result<Self, StartupError> {
        settings.planner.check()?;
        if settings.workers == 0 {
            return Err(StartupError::Workers);
        }
        let catalog = Catalog::load_dir(&settings.catalog_dir)?;
        let store = SessionStore::open(&settings.data_dir).map_err(|source| StartupError::DataDir {
            path: settings.data_dir.clone(),
            source,
        })?;
        Ok(AppState {
            catalog: Arc::new(catalog),
            store,
            planner: settings.planner,
            workers: Arc::new(Semaphore::new(settings.workers)),
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/objects", get(api::list_objects))
        .route("/objects/{id}", get(api::get_object))
        .route("/models/validate", post(api::validate_model))
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session).put(api::save_step))
        .route("/sessions/{id}/plan", post(api::plan))
        .route("/sessions/{id}/transfer", post(api::transfer))
        .with_state(state)
}
