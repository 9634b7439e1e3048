//! HTTP surface: POST /predict, POST /feedback, GET /healthz.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;

use signaal_core::Error as CoreError;

use crate::payload::{find_forbidden_key, FeedbackPayload, PredictPayload};
use crate::state::ServiceState;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> ApiError {
        let status = match &e {
            CoreError::InvalidArgument(msg) if msg.contains("unknown prediction id") => {
                StatusCode::NOT_FOUND
            }
            CoreError::InvalidArgument(_) | CoreError::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

fn check_token(state: &ServiceState, headers: &HeaderMap) -> Result<(), ApiError> {
    if let Some(expected) = &state.config.bearer_token {
        let presented = headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(expected.as_str()) {
            return Err(ApiError {
                status: StatusCode::UNAUTHORIZED,
                message: "missing or invalid bearer token".into(),
            });
        }
    }
    Ok(())
}

/// Parse JSON with a field path on error and the identifier-key screen.
fn parse_payload<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))?;
    if let Some(key) = find_forbidden_key(&value) {
        return Err(ApiError::bad_request(format!(
            "field '{key}' looks like a direct identifier; payloads must arrive \
             de-identified"
        )));
    }
    let deserializer = value;
    let mut track = serde_path_to_error::Track::new();
    let traced = serde_path_to_error::Deserializer::new(&deserializer, &mut track);
    T::deserialize(traced).map_err(|e| {
        ApiError::bad_request(format!("schema violation at '{}': {e}", track.path()))
    })
}

async fn handle_predict(
    State(state): State<Arc<ServiceState>>,
    headers: HeaderMap,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    check_token(&state, &headers)?;
    let payload: PredictPayload = parse_payload(&bytes)?;
    payload.validate().map_err(ApiError::bad_request)?;
    let response = state.predict(payload)?;
    Ok(Json(response).into_response())
}

async fn handle_feedback(
    State(state): State<Arc<ServiceState>>,
    headers: HeaderMap,
    bytes: Bytes,
) -> Result<Response, ApiError> {
    check_token(&state, &headers)?;
    let payload: FeedbackPayload = parse_payload(&bytes)?;
    let record = state.feedback(payload)?;
    Ok(Json(serde_json::json!({
        "prediction_id": record.prediction_id,
        "received_at": record.received_at,
    }))
    .into_response())
}

async fn handle_healthz(State(state): State<Arc<ServiceState>>) -> Response {
    Json(serde_json::json!({ "active_version": state.active_version() })).into_response()
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/predict", post(handle_predict))
        .route("/feedback", post(handle_feedback))
        .route("/healthz", get(handle_healthz))
        .with_state(state)
}
