//! Decision-support HTTP service.
//!
//! `POST /predict` scores a child file with the active model and persists
//! a prediction record before responding; `POST /feedback` attaches a
//! professional judgment to an earlier prediction; `GET /healthz` reports
//! the active model version. A retraining job folds feedback into the
//! training set and swaps the active model atomically; in-flight requests
//! finish on the version they started with.

mod http;
mod journal;
mod payload;
mod state;

pub use http::{router, ApiError};
pub use payload::{FeedbackPayload, PredictPayload, PredictResponse};
pub use state::{FeedbackRecord, PredictionRecord, ServiceConfig, ServiceState};

use std::net::SocketAddr;
use std::sync::Arc;

use signaal_core::{Error, Result};

/// Serve until the process ends. Refuses non-loopback plaintext binds
/// unless the config acknowledges a fronting TLS terminator.
pub async fn serve(state: Arc<ServiceState>, bind: SocketAddr) -> Result<()> {
    if !bind.ip().is_loopback() && !state.config.allow_remote_plaintext {
        return Err(Error::Config(format!(
            "refusing plaintext bind on {bind}; terminate TLS in front and pass \
             allow_remote_plaintext = true"
        )));
    }
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(Error::Io)?;
    serve_listener(state, listener).await
}

/// Serve on an already bound listener (useful for ephemeral test ports).
pub async fn serve_listener(
    state: Arc<ServiceState>,
    listener: tokio::net::TcpListener,
) -> Result<()> {
    let app = router(state.clone());
    let local = listener.local_addr().map_err(Error::Io)?;
    tracing::info!("listening on {local}");
    state.spawn_scheduler();
    axum::serve(listener, app)
        .await
        .map_err(|e| Error::Config(format!("server error: {e}")))?;
    Ok(())
}
