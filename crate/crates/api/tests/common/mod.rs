#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use citilink_api::{router, ApiConfig, AppState};
use citilink_core::extraction::RuleExtractor;
use citilink_core::service::{RegistryFile, Service};
use citilink_core::store::MemoryStore;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const TOKEN: &str = "s3cret-admin";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn registry() -> RegistryFile {
    serde_json::from_slice(&std::fs::read(fixtures().join("registry.json")).unwrap()).unwrap()
}

pub fn minute_text(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("minutes").join(name)).unwrap()
}

/// Registry imported and every fixture minute whose file name passes
/// `keep` taken through to publication.
pub fn service_with(keep: impl Fn(&str) -> bool) -> Arc<Service> {
    let svc = Service::open(Arc::new(MemoryStore::new())).unwrap();
    svc.import_registry(registry()).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(fixtures().join("minutes"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| keep(n))
        .collect();
    names.sort();
    for name in names {
        let slug = name.split('-').next().unwrap();
        let m = svc.ingest(slug, &name, &minute_text(&name)).unwrap();
        svc.run_extraction(&m.id, &RuleExtractor).unwrap();
        svc.validate(&m.id, true).unwrap();
        svc.publish(&m.id).unwrap();
    }
    Arc::new(svc)
}

pub fn app(svc: Arc<Service>, configure: impl FnOnce(&mut ApiConfig)) -> Router {
    let mut config = ApiConfig::new(TOKEN);
    configure(&mut config);
    router(AppState::new(svc, config))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

pub struct Call {
    req: axum::http::request::Builder,
    body: Body,
}

pub fn call(method: Method, uri: &str) -> Call {
    Call {
        req: Request::builder().method(method).uri(uri),
        body: Body::empty(),
    }
}

pub fn get(uri: &str) -> Call {
    call(Method::GET, uri)
}

pub fn post(uri: &str) -> Call {
    call(Method::POST, uri)
}

impl Call {
    pub fn admin(mut self) -> Self {
        self.req = self.req.header(header::AUTHORIZATION, format!("Bearer {TOKEN}"));
        self
    }
    pub fn header(mut self, k: &str, v: &str) -> Self {
        self.req = self.req.header(k, v);
        self
    }
    pub fn json(mut self, v: Value) -> Self {
        self.req = self.req.header(header::CONTENT_TYPE, "application/json");
        self.body = Body::from(v.to_string());
        self
    }
    pub async fn send(self, app: &Router) -> Reply {
        let resp = app.clone().oneshot(self.req.body(self.body).unwrap()).await.unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, headers, body }
    }
}
