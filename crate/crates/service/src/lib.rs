//! HTTP API over a single, immutable catalog.
//!
//! Every endpoint lives under `/api`. Failures are reported as
//! `{"error_code": ..., "message": ...}` with a 4xx or 5xx status.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use robocim_core::reasoning::AttributeRequirement;
use robocim_core::report::DEFAULT_MAX_RESULTS;
use robocim_core::{
    load_catalog, report_uncertain, run_query, validate_catalog, Catalog, CatalogError, Diagnostic, JustificationLevel,
    QueryRequirements, ReasoningError, SolverError,
};

/// Body of `POST /api/configure`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigureRequest {
    pub application: String,
    pub size_k: usize,
    #[serde(default)]
    pub min_justification: Option<String>,
    #[serde(default)]
    pub extra_required_attributes: Option<Vec<AttributeRequirement>>,
}

impl ConfigureRequest {
    pub fn into_requirements(self) -> Result<QueryRequirements, ApiError> {
        let level = parse_level(self.min_justification.as_deref())?;
        let mut req = QueryRequirements::new(self.application, self.size_k)
            .map_err(ApiError::from)?
            .with_min_justification(level);
        for r in self.extra_required_attributes.unwrap_or_default() {
            req = req.with_requirement(r);
        }
        Ok(req)
    }
}

fn parse_level(level: Option<&str>) -> Result<Option<JustificationLevel>, ApiError> {
    level
        .map(|l| {
            l.parse().map_err(|e: robocim_core::catalog::UnknownLevel| {
                ApiError::bad_request("unknown_justification", e.to_string())
            })
        })
        .transpose()
}

/// A structured API failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub error_code: String,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self {
            status: 400,
            error_code: code.into(),
            message: message.into(),
        }
    }
}

impl From<ReasoningError> for ApiError {
    fn from(e: ReasoningError) -> Self {
        let code = match e {
            ReasoningError::InvalidSize(_) => "invalid_size",
            ReasoningError::UnknownApplication(_) => "unknown_application",
            ReasoningError::UnknownProduct(_) => "unknown_product",
            ReasoningError::UnknownPort { .. } => "unknown_port",
            ReasoningError::SameProduct(_) => "same_product",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<SolverError> for ApiError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidQuery(r) => r.into(),
            other => Self {
                status: 500,
                error_code: "internal".into(),
                message: other.to_string(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = serde_json::to_string(&self).expect("error serializes");
        (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

/// Runs a configure request and renders the response body.
///
/// The CLI's `configure --format json` prints exactly this string.
pub fn configure_body(catalog: &Catalog, request: ConfigureRequest, max_results: usize) -> Result<String, ApiError> {
    let req = request.into_requirements()?;
    Ok(run_query(catalog, &req, max_results)?.to_json())
}

/// Renders the uncertainty report shared by the CLI and `GET /api/uncertain`.
pub fn uncertain_body(catalog: &Catalog, min_justification: Option<&str>) -> Result<String, ApiError> {
    let level = parse_level(min_justification)?;
    Ok(pretty(&report_uncertain(catalog, level)))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("response serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_results: usize,
    /// Origin allowed by CORS; `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_results: DEFAULT_MAX_RESULTS,
            cors_origin: None,
        }
    }
}

#[derive(Debug, Clone)]
struct AppState {
    catalog: Arc<Catalog>,
    max_results: usize,
}

fn json(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn health(State(state): State<AppState>) -> Response {
    json(pretty(&serde_json::json!({
        "status": "ok",
        "catalog_fingerprint": state.catalog.fingerprint(),
    })))
}

async fn get_catalog(State(state): State<AppState>) -> Response {
    json(pretty(state.catalog.document()))
}

async fn applications(State(state): State<AppState>) -> Response {
    let names: Vec<&str> = state.catalog.applications().iter().map(|a| a.name.as_str()).collect();
    json(pretty(&names))
}

#[derive(Debug, Deserialize)]
struct ProductsQuery {
    #[serde(rename = "type")]
    product_type: Option<String>,
}

async fn products(State(state): State<AppState>, Query(q): Query<ProductsQuery>) -> Response {
    let products: Vec<_> = state
        .catalog
        .products()
        .iter()
        .filter(|p| q.product_type.as_deref().is_none_or(|t| p.product_type() == Some(t)))
        .collect();
    json(pretty(&products))
}

async fn configure(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: ConfigureRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_body", e.to_string()))?;
    configure_body(&state.catalog, request, state.max_results).map(json)
}

#[derive(Debug, Deserialize)]
struct UncertainQuery {
    min_justification: Option<String>,
}

async fn uncertain(State(state): State<AppState>, Query(q): Query<UncertainQuery>) -> Result<Response, ApiError> {
    uncertain_body(&state.catalog, q.min_justification.as_deref()).map(json)
}

async fn not_found() -> ApiError {
    ApiError {
        status: 404,
        error_code: "not_found".into(),
        message: "no such endpoint".into(),
    }
}

/// Builds the API router over `catalog`.
pub fn router(catalog: Catalog, config: &ServiceConfig) -> Router {
    let origin = match &config.cors_origin {
        Some(o) => AllowOrigin::exact(HeaderValue::from_str(o).unwrap_or(HeaderValue::from_static("null"))),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers(Any);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/catalog", get(get_catalog))
        .route("/api/applications", get(applications))
        .route("/api/products", get(products))
        .route("/api/configure", post(configure))
        .route("/api/uncertain", get(uncertain))
        .fallback(not_found)
        .layer(cors)
        .with_state(AppState {
            catalog: Arc::new(catalog),
            max_results: config.max_results,
        })
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("catalog has {} diagnostic(s); run `validate` for details", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("cannot serve on {address}: {source}")]
    Bind {
        address: String,
        #[source]
        source: std::io::Error,
    },
}

/// Loads and validates the catalog, then serves until the process ends.
pub async fn serve(catalog_path: &Path, bind_address: &str, config: ServiceConfig) -> Result<(), ServiceError> {
    let catalog = load_catalog(catalog_path)?;
    let diagnostics = validate_catalog(&catalog);
    if !diagnostics.is_empty() {
        return Err(ServiceError::Invalid(diagnostics));
    }
    let bind_err = |source| ServiceError::Bind {
        address: bind_address.to_string(),
        source,
    };
    let listener = tokio::net::TcpListener::bind(bind_address).await.map_err(bind_err)?;
    let local: SocketAddr = listener.local_addr().map_err(bind_err)?;
    tracing::info!(address = %local, products = catalog.products().len(), "serving catalog");
    let app = router(catalog, &config);
    axum::serve(listener, app).await.map_err(bind_err)
}
