//! HTTP JSON API over the game engine.
//!
//! | method | path                       | body / query              |
//! |--------|----------------------------|---------------------------|
//! | GET    | `/api/strategies`          |                           |
//! | POST   | `/api/play`                | `{a, b, backend?}`        |
//! | POST   | `/api/session`             | `{policy}`                |
//! | POST   | `/api/session/{id}/round`  | `{a}`                     |
//! | GET    | `/api/session/{id}`        |                           |
//! | GET    | `/api/sweep`               | `?n=<points per segment>` |
//!
//! Strategies travel as strings in the `NAME | C(<deg>, <rad>)` grammar.
//! Everything else under `/` is served from the configured static directory.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::analysis::{self, DEFAULT_RESOLUTION};
use crate::game::{Backend, NamedStrategy, OpponentPolicy, Outcome, PayoffTable, Protocol, Strategy};
use crate::Error;

/// Largest sweep resolution the API will compute per request.
pub const MAX_SWEEP_RESOLUTION: usize = 201;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub backend: Backend,
    pub table: PayoffTable,
    /// Points per segment for the best-response opponent.
    pub best_response_grid: usize,
    /// Directory holding the web UI bundle.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            backend: Backend::Abstract,
            table: PayoffTable::default(),
            best_response_grid: DEFAULT_RESOLUTION,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbsJson {
    pub cc: f64,
    pub cd: f64,
    pub dc: f64,
    pub dd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeJson {
    pub amplitudes: Vec<AmplitudeJson>,
    pub probs: ProbsJson,
    pub payoffs: [f64; 2],
}

impl From<&Outcome> for OutcomeJson {
    fn from(o: &Outcome) -> Self {
        OutcomeJson {
            amplitudes: o.amplitudes.iter().map(|c| AmplitudeJson { re: c.re, im: c.im }).collect(),
            probs: ProbsJson { cc: o.probs[0], cd: o.probs[1], dc: o.probs[2], dd: o.probs[3] },
            payoffs: [o.payoff_a, o.payoff_b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyInfo {
    pub name: String,
    pub theta_deg: f64,
    pub phi_rad: f64,
    /// `classical` or `quantum`.
    pub kind: String,
}

pub fn strategy_registry() -> Vec<StrategyInfo> {
    NamedStrategy::ALL
        .iter()
        .map(|n| {
            let p = n.params();
            StrategyInfo {
                name: n.name().to_string(),
                theta_deg: p.theta_deg,
                phi_rad: p.phi_rad,
                kind: if n.is_classical() { "classical" } else { "quantum" }.to_string(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub outcome: OutcomeJson,
    pub cumulative: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionJson {
    pub id: String,
    pub policy: String,
    pub history: Vec<RoundRecord>,
    pub cumulative: [f64; 2],
}

#[derive(Debug)]
struct Session {
    id: String,
    policy: OpponentPolicy,
    history: Vec<RoundRecord>,
    cumulative: [f64; 2],
}

impl Session {
    fn to_json(&self) -> SessionJson {
        SessionJson {
            id: self.id.clone(),
            policy: self.policy.to_string(),
            history: self.history.clone(),
            cumulative: self.cumulative,
        }
    }
}

struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

/// Error body: `{"error": <code>, "detail": <message>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        ApiError { status, code, detail: detail.into() }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::ParseStrategy { .. } => ApiError::new(StatusCode::BAD_REQUEST, "bad_strategy", e.to_string()),
            Error::CalibrationFailed { .. } | Error::PipelineMismatch { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "calibration_failed", e.to_string())
            }
            Error::InvalidGrid { .. } | Error::Config(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.to_string())
            }
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.code, "detail": self.detail }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
struct PlayRequest {
    a: String,
    b: String,
    backend: Option<Backend>,
}

#[derive(Debug, Deserialize)]
struct SessionRequest {
    policy: String,
}

#[derive(Debug, Deserialize)]
struct RoundRequest {
    a: String,
}

#[derive(Debug, Deserialize)]
struct SweepQuery {
    n: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SweepJson {
    n_per_segment: usize,
    points: Vec<analysis::SurfacePoint>,
    /// Where the five named strategies sit on the `t` axis.
    named: Vec<NamedPoint>,
}

#[derive(Debug, Serialize)]
struct NamedPoint {
    name: &'static str,
    t: f64,
}

async fn strategies() -> Json<Vec<StrategyInfo>> {
    Json(strategy_registry())
}

async fn play(State(state): State<Arc<AppState>>, body: Result<Json<PlayRequest>, JsonRejection>) -> ApiResult<OutcomeJson> {
    let Json(req) = body?;
    let a: Strategy = req.a.parse()?;
    let b: Strategy = req.b.parse()?;
    let protocol = Protocol::cached(req.backend.unwrap_or(state.config.backend))?;
    Ok(Json(OutcomeJson::from(&protocol.play(&a, &b, &state.config.table))))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<SessionRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionJson>), ApiError> {
    let Json(req) = body?;
    let policy: OpponentPolicy = req
        .policy
        .parse()
        .map_err(|e: Error| ApiError::new(StatusCode::BAD_REQUEST, "bad_policy", e.to_string()))?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session { id: id.clone(), policy, history: Vec::new(), cumulative: [0.0; 2] };
    let json = session.to_json();
    state.sessions.lock().insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(json)))
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    state
        .sessions
        .lock()
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id:?}")))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<SessionJson> {
    let session = lookup(&state, &id)?;
    let json = session.lock().to_json();
    Ok(Json(json))
}

async fn play_round(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<RoundRequest>, JsonRejection>,
) -> ApiResult<RoundRecord> {
    let session = lookup(&state, &id)?;
    let Json(req) = body?;
    let a: Strategy = req.a.parse()?;
    let cfg = &state.config;
    // Held for the whole round so concurrent rounds on one session serialize.
    let mut s = session.lock();
    let b = s.policy.choose(&a, cfg.best_response_grid, cfg.backend, &cfg.table)?;
    let outcome = Protocol::cached(cfg.backend)?.play(&a, &b, &cfg.table);
    s.cumulative[0] += outcome.payoff_a;
    s.cumulative[1] += outcome.payoff_b;
    let record = RoundRecord {
        round: s.history.len() + 1,
        a: a.to_string(),
        b: b.to_string(),
        outcome: OutcomeJson::from(&outcome),
        cumulative: s.cumulative,
    };
    s.history.push(record.clone());
    Ok(Json(record))
}

async fn sweep(State(state): State<Arc<AppState>>, Query(q): Query<SweepQuery>) -> ApiResult<SweepJson> {
    let n = q.n.unwrap_or(21);
    if n > MAX_SWEEP_RESOLUTION {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad_request",
            format!("n must be at most {MAX_SWEEP_RESOLUTION}"),
        ));
    }
    let points = analysis::sweep(n, state.config.backend, &state.config.table)?;
    let named = [("iX", -1.0), ("Q1", -0.5), ("I", 0.0), ("Q2", 0.5), ("iZ", 1.0)]
        .into_iter()
        .map(|(name, t)| NamedPoint { name, t })
        .collect();
    Ok(Json(SweepJson { n_per_segment: n, points, named }))
}

async fn placeholder_index() -> Html<&'static str> {
    Html(
        "<!doctype html><title>qpd</title><p>No UI bundle configured. \
         Start the server with <code>--static-dir</code> or use the JSON API under <code>/api</code>.</p>",
    )
}

pub fn router(config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState { config, sessions: Mutex::new(HashMap::new()) });
    let api = Router::new()
        .route("/api/strategies", get(strategies))
        .route("/api/play", post(play))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/round", post(play_round))
        .route("/api/sweep", get(sweep))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(placeholder_index)),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Config(format!("bind {addr}: {e}")))?;
    axum::serve(listener, router(config)).await.map_err(|e| Error::Config(format!("server: {e}")))
}
