//! REST service for the interactive question-generation workflow: review a
//! paragraph, pick pivotal answers, generate and filter questions, then
//! browse, edit and export them grouped by answer facet.

pub mod api;
pub mod config;
pub mod engine;
pub mod error;
pub mod export;
pub mod session;
pub mod views;

pub use api::{router, AppState};
pub use config::ServiceConfig;
pub use engine::Engine;
pub use error::{ApiError, ErrorBody};
pub use session::SessionStore;

/// Builds the application state from a service configuration.
pub fn app_state(cfg: &ServiceConfig) -> anyhow::Result<AppState> {
    let engine = Engine::from_config(cfg)?;
    let store = match &cfg.session_dir {
        Some(dir) => SessionStore::on_disk(dir.clone())?,
        None => SessionStore::in_memory(),
    };
    Ok(AppState {
        store,
        engine: std::sync::Arc::new(engine),
        default_knobs: qgen_core::Knobs::new(cfg.intra_threshold, cfg.inter_threshold)?,
    })
}
