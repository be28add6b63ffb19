//! Stateless HTTP/JSON service for interactive exploration.
//!
//! | Method | Path                   | Body                                   |
//! |--------|------------------------|----------------------------------------|
//! | POST   | `/api/forecast`        | `{design, workload?}`                  |
//! | POST   | `/api/network/summary` | scenario fragment without design       |
//! | GET    | `/api/presets`         |                                        |
//! | GET    | `/api/roadmaps`        |                                        |
//!
//! Every response is JSON. Failures carry `{"errors": [{"field", "message"}]}`
//! with a dotted field path: 400 for malformed or invalid input, 422 for
//! roadmap-year or horizon-cap violations, 404 for unknown routes.
//! Numbers come from the same [`run`] used by the CLI.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::astro::{ClientConfig, ConstellationConfig, GroundStation, SunModel};
use crate::forecast::{ForecastParams, SdcDesign};
use crate::isl::LinkParams;
use crate::scenario::{
    preset_names, preset_source, run, Analysis, OutageConfig, RoutersConfig, RoutingConfig, Scenario, ScenarioError, TimeConfig,
    ValidationIssue, WorkloadSpec,
};

#[derive(Debug, Clone)]
pub struct ApiConfig {
    /// Longest network-summary horizon, in orbital periods.
    pub horizon_cap_periods: f64,
    /// Built explorer UI served at `/` when set.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        Self { horizon_cap_periods: 2.0, ui_dir: None }
    }
}

struct AppState {
    horizon_cap_periods: f64,
}

struct ApiError {
    status: StatusCode,
    issues: Vec<ValidationIssue>,
}

impl ApiError {
    fn new(status: StatusCode, field: &str, message: impl std::fmt::Display) -> Self {
        Self { status, issues: vec![ValidationIssue::new(field, message)] }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "errors": self.issues }))).into_response()
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        let status = match &e {
            // the only semantic error that is not the caller's malformed input
            ScenarioError::Invalid(v) if v.iter().all(|i| i.field == "design.year") => StatusCode::UNPROCESSABLE_ENTITY,
            ScenarioError::Analysis { .. } | ScenarioError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self { status, issues: e.issues() }
    }
}

/// Deserialize with the dotted path of the first offending field.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        ApiError::new(StatusCode::BAD_REQUEST, &field, e.into_inner())
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecastRequest {
    design: SdcDesign,
    #[serde(default)]
    workload: Option<WorkloadSpec>,
}

async fn forecast_handler(body: Bytes) -> Result<Json<Value>, ApiError> {
    let req: ForecastRequest = parse_body(&body)?;
    let mut analyses = BTreeSet::from([Analysis::Forecast]);
    if req.workload.is_some() {
        analyses.insert(Analysis::Workload);
    }
    let scenario = Scenario { design: Some(req.design), workload: req.workload, analyses, ..Scenario::default() };
    let report = run(&scenario)?;
    Ok(Json(json!({ "forecast": report.forecast, "workload": report.workload, "errors": [] })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NetworkRequest {
    constellation: ConstellationConfig,
    clients: Vec<ClientConfig>,
    ground_stations: Vec<GroundStation>,
    time: TimeConfig,
    sun: SunModel,
    links: LinkParams,
    routing: RoutingConfig,
    outage: OutageConfig,
    routers: RoutersConfig,
}

#[derive(Serialize)]
struct SnapshotsMeta {
    count: usize,
    nodes: usize,
    horizon_s: f64,
    step_s: f64,
    connected_fraction: f64,
    quasi_static_links: usize,
    dynamic_links: usize,
}

async fn network_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let req: NetworkRequest = parse_body(&body)?;
    let scenario = Scenario {
        constellation: req.constellation,
        clients: req.clients,
        ground_stations: req.ground_stations,
        time: req.time,
        sun: req.sun,
        links: req.links,
        routing: req.routing,
        outage: req.outage,
        routers: req.routers,
        analyses: BTreeSet::from([Analysis::Topology, Analysis::Outage, Analysis::Routing]),
        ..Scenario::default()
    }
    .resolve()?;
    let period = scenario.scene()?.constellation.max_period_s();
    let horizon = scenario.time.horizon_s.unwrap_or(0.0);
    let cap = state.horizon_cap_periods * period;
    if horizon > cap * (1.0 + 1e-12) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "time.horizon_s",
            format!("horizon {horizon} s exceeds the cap of {cap} s ({} orbital periods)", state.horizon_cap_periods),
        ));
    }
    let report = run(&scenario)?;
    let topo = report.topology.expect("topology requested");
    let meta = SnapshotsMeta {
        count: topo.snapshots.len(),
        nodes: topo.nodes,
        horizon_s: topo.horizon_s,
        step_s: topo.step_s,
        connected_fraction: topo.connected_fraction,
        quasi_static_links: topo.quasi_static_links,
        dynamic_links: topo.dynamic_links,
    };
    Ok(Json(json!({
        "snapshots": meta,
        "outage": report.outage,
        "routing": report.routing,
        "content_hash": report.content_hash,
        "errors": [],
    })))
}

async fn presets_handler() -> Result<Json<Value>, ApiError> {
    let mut presets = Vec::new();
    for name in preset_names() {
        let text = preset_source(&name)?;
        let scenario: Value = serde_json::from_str(&text).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, &name, e))?;
        presets.push(json!({ "name": name, "scenario": scenario }));
    }
    Ok(Json(json!({ "presets": presets })))
}

async fn roadmaps_handler() -> Json<Value> {
    let params = ForecastParams::shipped();
    Json(json!({ "roadmaps": params.roadmaps(), "valid_years": [2024, 2060] }))
}

async fn not_found(method: Method, uri: Uri) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "", format!("no route for {method} {}", uri.path()))
}

/// The service with all routes, CORS and optional static UI.
pub fn router(config: ApiConfig) -> Router {
    let state = Arc::new(AppState { horizon_cap_periods: config.horizon_cap_periods });
    let cors = CorsLayer::new().allow_origin(Any).allow_methods([Method::GET, Method::POST]).allow_headers(Any);
    let api = Router::new()
        .route("/api/forecast", post(forecast_handler))
        .route("/api/network/summary", post(network_handler))
        .route("/api/presets", get(presets_handler))
        .route("/api/roadmaps", get(roadmaps_handler))
        .route("/api/{*rest}", any(not_found))
        .with_state(state);
    let app = match config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    };
    app.layer(cors)
}

/// Bind and serve until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ApiConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(config)).await
}
