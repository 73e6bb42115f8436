//! HTTP API over the citilink [`Service`]: public browse and search routes,
//! an optional password gate, and the bearer-token back office.

mod error;
mod params;

pub use error::{ApiError, ApiResult, ErrorBody};
pub use params::{pairs, search_query, SEARCH_PARAMS};

use std::collections::HashSet;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use citilink_core::extraction::{ExtractionResult, Extractor, ExtractorKind, RuleExtractor};
use citilink_core::search::Scope;
use citilink_core::service::{Service, ServiceError, SubscribeOutcome};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const SESSION_COOKIE: &str = "citilink_session";

#[derive(Clone)]
pub struct ApiConfig {
    pub bind: SocketAddr,
    pub site_access_password: Option<String>,
    pub admin_token: String,
    pub page_size_default: usize,
    /// Allowed browser origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    /// Extractor used for `extractor: "llm"` uploads, when configured.
    pub llm: Option<Arc<dyn Extractor>>,
}

impl ApiConfig {
    pub fn new(admin_token: impl Into<String>) -> Self {
        ApiConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            site_access_password: None,
            admin_token: admin_token.into(),
            page_size_default: 10,
            cors_origins: Vec::new(),
            llm: None,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.admin_token.trim().is_empty() {
            return Err("admin token must not be empty".into());
        }
        if !(1..=citilink_core::search::MAX_PAGE_SIZE).contains(&self.page_size_default) {
            return Err("page_size_default out of range".into());
        }
        if self.site_access_password.as_deref() == Some("") {
            return Err("site password must not be empty when set".into());
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct AppState {
    service: Arc<Service>,
    config: Arc<ApiConfig>,
    sessions: Arc<Mutex<HashSet<String>>>,
}

impl AppState {
    pub fn new(service: Arc<Service>, config: ApiConfig) -> Self {
        AppState {
            service,
            config: Arc::new(config),
            sessions: Arc::new(Mutex::new(HashSet::new())),
        }
    }

    pub fn service(&self) -> &Arc<Service> {
        &self.service
    }

    fn is_admin(&self, headers: &HeaderMap) -> bool {
        headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t.trim() == self.config.admin_token)
    }

    fn has_session(&self, headers: &HeaderMap) -> bool {
        let sessions = self.sessions.lock().unwrap_or_else(|p| p.into_inner());
        headers
            .get_all(header::COOKIE)
            .iter()
            .filter_map(|v| v.to_str().ok())
            .flat_map(|v| v.split(';'))
            .filter_map(|c| c.trim().split_once('='))
            .any(|(k, v)| k == SESSION_COOKIE && sessions.contains(v))
    }
}

/// Runs blocking service work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

// ---- gate and auth -----------------------------------------------------------

async fn site_gate(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let open = state.config.site_access_password.is_none()
        || req.method() == Method::OPTIONS
        || req.uri().path() == "/api/access"
        || req.uri().path() == "/api/health"
        || state.is_admin(req.headers())
        || state.has_session(req.headers());
    if open {
        next.run(req).await
    } else {
        ApiError::unauthorized("site access password required").into_response()
    }
}

async fn require_admin(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if state.is_admin(req.headers()) {
        next.run(req).await
    } else {
        ApiError::unauthorized("missing or invalid admin token").into_response()
    }
}

#[derive(Deserialize)]
struct AccessBody {
    password: String,
}

async fn access(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let AccessBody { password } = parse_json(&body)?;
    match &state.config.site_access_password {
        None => Ok(StatusCode::NO_CONTENT.into_response()),
        Some(expected) if *expected == password => {
            let token = uuid::Uuid::new_v4().to_string();
            state
                .sessions
                .lock()
                .unwrap_or_else(|p| p.into_inner())
                .insert(token.clone());
            let cookie = format!("{SESSION_COOKIE}={token}; Path=/; HttpOnly; SameSite=Lax");
            let mut resp = StatusCode::NO_CONTENT.into_response();
            resp.headers_mut().insert(
                header::SET_COOKIE,
                HeaderValue::from_str(&cookie).expect("cookie is ascii"),
            );
            Ok(resp)
        }
        Some(_) => Err(ApiError::unauthorized("wrong password")),
    }
}

// ---- public routes ------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}

fn page_of<T: Clone>(all: &[T], page: usize, page_size: usize) -> Page<T> {
    let start = (page - 1).saturating_mul(page_size).min(all.len());
    let end = start.saturating_add(page_size).min(all.len());
    Page {
        items: all[start..end].to_vec(),
        total: all.len(),
        page,
        page_size,
    }
}

async fn health() -> &'static str {
    "ok"
}

async fn municipalities(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Response> {
    let (page, size) = params::paging(&pairs(raw.as_deref()), &[], state.config.page_size_default)?;
    Ok(Json(page_of(&state.service.municipalities(), page, size)).into_response())
}

async fn overview(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.service.overview(&id)?).into_response())
}

async fn municipality_minutes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Response> {
    if state.service.data().municipality(&id).is_none() {
        return Err(ApiError::not_found(format!("municipality {id}")));
    }
    let p = pairs(raw.as_deref());
    if p.iter().any(|(k, _)| k == "municipality_id") {
        return Err(ApiError::with_fields(
            StatusCode::BAD_REQUEST,
            "invalid query parameters",
            [("municipality_id".to_string(), "fixed by the path".to_string())],
        ));
    }
    let mut q = search_query(&p, state.config.page_size_default, Scope::Minutes)?;
    q.facets.municipality_ids = vec![id];
    Ok(Json(state.service.search(&q)?).into_response())
}

async fn timeline(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.service.timeline(&id)?).into_response())
}

async fn search(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Response> {
    let q = search_query(&pairs(raw.as_deref()), state.config.page_size_default, Scope::All)?;
    Ok(Json(state.service.search(&q)?).into_response())
}

async fn minute(State(state): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.service.minute_view(&id, state.is_admin(&headers))?).into_response())
}

async fn minute_text(State(state): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    let text = state.service.raw_text(&id, state.is_admin(&headers))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

#[derive(Deserialize)]
struct SubscribeBody {
    email: String,
    #[serde(default)]
    municipality_ids: Vec<String>,
}

#[derive(Serialize)]
struct SubscribeReply {
    email: String,
    outcome: SubscribeOutcome,
}

async fn subscribe(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let SubscribeBody {
        email,
        municipality_ids,
    } = parse_json(&body)?;
    let service = state.service.clone();
    let reply_email = email.trim().to_string();
    let outcome = blocking(move || service.subscribe(&email, municipality_ids)).await?;
    let code = match outcome {
        SubscribeOutcome::Created => StatusCode::CREATED,
        SubscribeOutcome::AlreadySubscribed => StatusCode::OK,
    };
    Ok((
        code,
        Json(SubscribeReply {
            email: reply_email,
            outcome,
        }),
    )
        .into_response())
}

// ---- back office ----------------------------------------------------------------

#[derive(Deserialize)]
struct UploadBody {
    municipality_id: String,
    #[serde(default)]
    filename: Option<String>,
    text: String,
    #[serde(default = "default_extractor")]
    extractor: String,
}

fn default_extractor() -> String {
    "rule".into()
}

async fn admin_minutes(State(state): State<AppState>, RawQuery(raw): RawQuery) -> ApiResult<Response> {
    let (page, size) = params::paging(&pairs(raw.as_deref()), &[], state.config.page_size_default)?;
    Ok(Json(page_of(&state.service.admin_minutes(), page, size)).into_response())
}

/// Stores the text (status `uploaded`) and starts extraction in the
/// background; poll the extraction route for the outcome.
async fn upload(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: UploadBody = parse_json(&body)?;
    let kind: ExtractorKind = body.extractor.parse().map_err(|m: String| {
        ApiError::with_fields(
            StatusCode::UNPROCESSABLE_ENTITY,
            m.clone(),
            [("extractor".to_string(), m)],
        )
    })?;
    let extractor: Arc<dyn Extractor> = match kind {
        ExtractorKind::Rule => Arc::new(RuleExtractor),
        ExtractorKind::Llm => state.config.llm.clone().ok_or_else(|| {
            ApiError::with_fields(
                StatusCode::UNPROCESSABLE_ENTITY,
                "no LLM extractor is configured",
                [(
                    "extractor".to_string(),
                    "llm is not configured on this server".to_string(),
                )],
            )
        })?,
    };
    let service = state.service.clone();
    let filename = body
        .filename
        .unwrap_or_else(|| format!("{}-minute.txt", body.municipality_id));
    let minute = blocking(move || service.upload(&body.municipality_id, &filename, &body.text)).await?;
    let service = state.service.clone();
    let id = minute.id.clone();
    tokio::task::spawn_blocking(move || {
        if let Err(e) = service.run_extraction(&id, extractor.as_ref()) {
            log::warn!("extraction of {id} failed: {e}");
        }
    });
    Ok((StatusCode::ACCEPTED, Json(minute)).into_response())
}

async fn get_extraction(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.service.extraction(&id)?).into_response())
}

async fn put_extraction(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let result: ExtractionResult = parse_json(&body)?;
    let service = state.service.clone();
    Ok(Json(blocking(move || service.replace_extraction(&id, result)).await?).into_response())
}

#[derive(Deserialize, Default)]
struct ValidateBody {
    #[serde(default)]
    ack_unresolved: bool,
}

async fn validate(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let ValidateBody { ack_unresolved } = if body.iter().all(u8::is_ascii_whitespace) {
        ValidateBody::default()
    } else {
        parse_json(&body)?
    };
    let service = state.service.clone();
    Ok(Json(blocking(move || service.validate(&id, ack_unresolved)).await?).into_response())
}

async fn publish(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let service = state.service.clone();
    Ok(Json(blocking(move || service.publish(&id)).await?).into_response())
}

async fn rebuild(State(state): State<AppState>) -> ApiResult<Response> {
    let service = state.service.clone();
    let units = blocking(move || service.rebuild_index()).await?;
    Ok(Json(serde_json::json!({ "units": units })).into_response())
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

fn cors(config: &ApiConfig) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::PUT, Method::OPTIONS])
        .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE]);
    if config.cors_origins.is_empty() {
        layer.allow_origin(AllowOrigin::any())
    } else {
        let origins: Vec<HeaderValue> = config
            .cors_origins
            .iter()
            .filter_map(|o| HeaderValue::from_str(o).ok())
            .collect();
        layer.allow_origin(origins).allow_credentials(true)
    }
}

pub fn router(state: AppState) -> Router {
    let admin = Router::new()
        .route("/minutes", get(admin_minutes).post(upload))
        .route("/minutes/:id/extraction", get(get_extraction).put(put_extraction))
        .route("/minutes/:id/validate", post(validate))
        .route("/minutes/:id/publish", post(publish))
        .route("/index/rebuild", post(rebuild))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_admin));
    let api = Router::new()
        .route("/health", get(health))
        .route("/access", post(access))
        .route("/municipalities", get(municipalities))
        .route("/municipalities/:id/overview", get(overview))
        .route("/municipalities/:id/minutes", get(municipality_minutes))
        .route("/municipalities/:id/timeline", get(timeline))
        .route("/search", get(search))
        .route("/minutes/:id", get(minute))
        .route("/minutes/:id/text", get(minute_text))
        .route("/newsletter/subscribe", post(subscribe))
        .nest("/admin", admin);
    Router::new()
        .nest("/api", api)
        .fallback(fallback)
        .layer(middleware::from_fn_with_state(state.clone(), site_gate))
        .layer(cors(&state.config))
        .with_state(state)
}

/// Serves until the future `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
