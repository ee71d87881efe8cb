use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

/// JSON error body returned by every endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{} {}: {}", status.as_u16(), body.code, body.message)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody { code: code.into(), message: message.into(), details: serde_json::Value::Null },
        }
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.body.details = details;
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", format!("{what} {id} not found"))
    }

    pub fn internal(err: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", err.to_string())
    }
}

impl From<qgen_core::Error> for ApiError {
    fn from(err: qgen_core::Error) -> Self {
        use qgen_core::Error as E;
        let (status, code) = match &err {
            E::EmptyInput => (StatusCode::BAD_REQUEST, "EmptyInput"),
            E::OverlappingEdits(_) => (StatusCode::CONFLICT, "OverlappingEdits"),
            E::RangeOutOfBounds { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "RangeOutOfBounds"),
            E::EmptySpan { .. } | E::SpanMisaligned(_) | E::MalformedTags(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "InvalidSpan")
            }
            E::AnnotatorUnavailable(_) | E::MalformedAnnotation(_) => (StatusCode::BAD_GATEWAY, "AnnotatorUnavailable"),
            E::NonFiniteInput | E::InvalidKnob(_) => (StatusCode::UNPROCESSABLE_ENTITY, "InvalidInput"),
        };
        Self::new(status, code, err.to_string())
    }
}

impl From<qgen_model::Error> for ApiError {
    fn from(err: qgen_model::Error) -> Self {
        match err {
            qgen_model::Error::Text(e) => e.into(),
            qgen_model::Error::SequenceTooLong { .. } | qgen_model::Error::QuestionTooLong { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "InputTooLong", err.to_string())
            }
            other => Self::internal(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
