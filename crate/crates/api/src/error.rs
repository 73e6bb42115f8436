use std::collections::BTreeMap;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use citilink_core::service::ServiceError;
use citilink_core::store::StoreError;
use citilink_core::MinuteStatus;
use serde::Serialize;

/// JSON error body: `{error, fields?, status?}`.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<BTreeMap<String, String>>,
    /// Current minute status on a refused transition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<MinuteStatus>,
}

#[derive(Debug)]
pub struct ApiError {
    pub code: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(code: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            code,
            body: ErrorBody {
                error: error.into(),
                fields: None,
                status: None,
            },
        }
    }

    pub fn with_fields(
        code: StatusCode,
        error: impl Into<String>,
        fields: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        let mut e = ApiError::new(code, error);
        let mut map = BTreeMap::new();
        for (k, v) in fields {
            // several messages for one field are joined
            map.entry(k)
                .and_modify(|m: &mut String| {
                    m.push_str("; ");
                    m.push_str(&v);
                })
                .or_insert(v);
        }
        e.body.fields = Some(map);
        e
    }

    pub fn unauthorized(msg: &str) -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, msg)
    }

    pub fn not_found(what: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("{what} not found"))
    }

    pub fn bad_request(msg: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, msg)
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let msg = e.to_string();
        match e {
            ServiceError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, msg),
            ServiceError::Conflict { status, .. } => {
                let mut err = ApiError::new(StatusCode::CONFLICT, msg);
                err.body.status = Some(status);
                err
            }
            ServiceError::Invalid(issues) => ApiError::with_fields(
                StatusCode::UNPROCESSABLE_ENTITY,
                msg,
                issues.into_iter().map(|i| (i.field, i.message)),
            ),
            ServiceError::BadQuery(fields) => ApiError::with_fields(StatusCode::BAD_REQUEST, msg, fields),
            ServiceError::Extraction(_) => ApiError::new(StatusCode::BAD_GATEWAY, msg),
            ServiceError::Store(StoreError::Locked) => ApiError::new(StatusCode::SERVICE_UNAVAILABLE, msg),
            ServiceError::Store(_) => {
                log::error!("store failure: {msg}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, msg)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code, Json(self.body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
