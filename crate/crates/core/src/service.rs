//! HTTP API over the planning engine.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | GET | `/recipes` | |
//! | PUT | `/recipes` | recipe JSON or `text/csv` |
//! | GET | `/stock` | |
//! | PUT | `/stock` | `{quantities, as_of?}` (manual override) |
//! | POST | `/plan` | `{demand}` |
//! | POST | `/variants` | `{demand}` |
//! | POST | `/sessions` | `{demand}` |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/choose` | `{option}` |
//! | GET | `/sessions/{id}/report` | `?format=text\|csv\|json` |
//!
//! Errors are `{"error": CODE, "detail": text}` with 404 for unknown
//! sessions, 409 for finished sessions and 422 for validation failures.
//! State is in memory; engine calls run on immutable snapshots.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, ErrorCode, ValidationError, ValidationErrors};
use crate::ingestion::{
    parse_recipes_csv_with, write_recipes_csv, StockBody, StockFeed, StockSource, StockSourceKind,
};
use crate::model::{
    check_quantities, validate_recipes, DemandVector, EngineConfig, RawRecipes, RecipeMatrix,
    StockState, StockVector,
};
use crate::optimizer::{enumerate_variants, open_session, plan, Choice, Outcome, Session};
use crate::reporting::StepReport;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(24 * 60 * 60);
pub const DEFAULT_MAX_SESSIONS: usize = 1000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub stock_source: StockSource,
    pub recipes_path: PathBuf,
    /// Write uploaded recipes back to `recipes_path`.
    pub snapshot_recipes: bool,
    pub engine: EngineConfig,
    pub session_ttl: Duration,
    pub max_sessions: usize,
}

impl ServiceConfig {
    pub fn new(addr: SocketAddr, recipes_path: impl Into<PathBuf>, stock_source: StockSource) -> Self {
        ServiceConfig {
            addr,
            stock_source,
            recipes_path: recipes_path.into(),
            snapshot_recipes: false,
            engine: EngineConfig::default(),
            session_ttl: DEFAULT_SESSION_TTL,
            max_sessions: DEFAULT_MAX_SESSIONS,
        }
    }
}

/// Service-level failures on top of engine errors.
#[derive(Debug)]
pub enum ApiError {
    Engine(Error),
    SessionNotFound(String),
    BadRequest(String),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Engine(e)
    }
}

impl From<ValidationErrors> for ApiError {
    fn from(e: ValidationErrors) -> Self {
        ApiError::Engine(Error::Validation(e))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            ApiError::SessionNotFound(id) => (
                StatusCode::NOT_FOUND,
                json!({"error": "SESSION_NOT_FOUND", "detail": format!("no session {id}")}),
            ),
            ApiError::BadRequest(detail) => (
                StatusCode::BAD_REQUEST,
                json!({"error": "BAD_REQUEST", "detail": detail}),
            ),
            ApiError::Engine(e) => {
                let status = match e {
                    Error::Validation(_) | Error::InvalidOption { .. } | Error::LimitExceeded { .. } => {
                        StatusCode::UNPROCESSABLE_ENTITY
                    }
                    Error::SessionFinished => StatusCode::CONFLICT,
                    Error::Unreachable(_) => StatusCode::SERVICE_UNAVAILABLE,
                    Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
                };
                let mut body = json!({"error": e.code(), "detail": e.to_string()});
                if let Error::Validation(errs) = e {
                    body["errors"] = serde_json::to_value(errs).unwrap();
                }
                (status, body)
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct SessionEntry {
    session: Arc<Mutex<Session>>,
    last_access: Instant,
}

/// Open sessions keyed by id, with idle expiry and a size cap that evicts
/// the least recently used session.
pub struct SessionStore {
    entries: Mutex<HashMap<String, SessionEntry>>,
    ttl: Duration,
    max_sessions: usize,
}

impl SessionStore {
    pub fn new(ttl: Duration, max_sessions: usize) -> Self {
        SessionStore {
            entries: Mutex::new(HashMap::new()),
            ttl,
            max_sessions: max_sessions.max(1),
        }
    }

    pub fn insert(&self, session: Session) -> Arc<Mutex<Session>> {
        let now = Instant::now();
        let mut entries = self.entries.lock().unwrap();
        entries.retain(|_, e| now.duration_since(e.last_access) < self.ttl);
        while entries.len() >= self.max_sessions {
            let oldest = entries
                .iter()
                .min_by_key(|(_, e)| e.last_access)
                .map(|(id, _)| id.clone())
                .expect("store is non-empty");
            entries.remove(&oldest);
        }
        let id = session.id().to_string();
        let shared = Arc::new(Mutex::new(session));
        entries.insert(
            id,
            SessionEntry {
                session: Arc::clone(&shared),
                last_access: now,
            },
        );
        shared
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        let now = Instant::now();
        let mut entries = self.entries.lock().unwrap();
        match entries.get_mut(id) {
            Some(e) if now.duration_since(e.last_access) < self.ttl => {
                e.last_access = now;
                Some(Arc::clone(&e.session))
            }
            Some(_) => {
                entries.remove(id);
                None
            }
            None => None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

enum StockProvider {
    /// Re-read on every request.
    File(StockSource),
    Feed(StockFeed),
}

/// Shared service state.
pub struct AppState {
    recipes: RwLock<Arc<RecipeMatrix>>,
    stock: StockProvider,
    stock_override: RwLock<Option<StockVector>>,
    sessions: SessionStore,
    engine: EngineConfig,
    snapshot_path: Option<PathBuf>,
}

impl AppState {
    /// Loads recipes from `config.recipes_path` and connects the stock
    /// source. Blocks while the first stock snapshot is fetched.
    pub fn from_config(config: &ServiceConfig) -> crate::error::Result<Self> {
        let text = std::fs::read_to_string(&config.recipes_path)?;
        let recipes = parse_recipes_csv_with(&text, config.engine.row_sum_tolerance)?;
        let mut state = AppState::new(recipes, config.stock_source.clone(), config.engine)?;
        state.sessions = SessionStore::new(config.session_ttl, config.max_sessions);
        if config.snapshot_recipes {
            state.snapshot_path = Some(config.recipes_path.clone());
        }
        Ok(state)
    }

    pub fn new(recipes: RecipeMatrix, stock_source: StockSource, engine: EngineConfig) -> crate::error::Result<Self> {
        engine.validate()?;
        let m = recipes.n_components();
        let stock = match stock_source.kind {
            StockSourceKind::File => {
                crate::ingestion::load_stock(&stock_source, m)?;
                StockProvider::File(stock_source)
            }
            _ => StockProvider::Feed(StockFeed::spawn(&stock_source, m)?),
        };
        Ok(AppState {
            recipes: RwLock::new(Arc::new(recipes)),
            stock,
            stock_override: RwLock::new(None),
            sessions: SessionStore::new(DEFAULT_SESSION_TTL, DEFAULT_MAX_SESSIONS),
            engine,
            snapshot_path: None,
        })
    }

    pub fn recipes(&self) -> Arc<RecipeMatrix> {
        Arc::clone(&self.recipes.read().unwrap())
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    pub fn stock(&self) -> crate::error::Result<StockVector> {
        if let Some(s) = self.stock_override.read().unwrap().clone() {
            return Ok(s);
        }
        let m = self.recipes().n_components();
        let stock = match &self.stock {
            StockProvider::File(src) => crate::ingestion::load_stock(src, m)?,
            StockProvider::Feed(feed) => feed.snapshot()?,
        };
        if stock.len() != m {
            return Err(Error::dimension(format!(
                "stock has {} values but recipes have {m} components",
                stock.len()
            )));
        }
        Ok(stock)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/recipes", get(get_recipes).put(put_recipes))
        .route("/stock", get(get_stock).put(put_stock))
        .route("/plan", post(post_plan))
        .route("/variants", post(post_variants))
        .route("/sessions", post(post_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/choose", post(post_choose))
        .route("/sessions/{id}/report", get(get_report))
        .with_state(state)
}

/// Binds `config.addr` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> crate::error::Result<()> {
    let cfg = config.clone();
    let state = tokio::task::spawn_blocking(move || AppState::from_config(&cfg))
        .await
        .expect("startup task")?;
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(e.to_string()))
}

#[derive(Deserialize)]
struct DemandBody {
    demand: Vec<f64>,
}

#[derive(Deserialize)]
struct ChooseBody {
    option: usize,
}

#[derive(Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

/// `{feasible: false, ...}` body for a demand the stock cannot cover.
pub fn shortfall_view(state: &StockState) -> Value {
    json!({
        "feasible": false,
        "message": "Required blended products cannot be made",
        "used": state.used,
        "required": state.required,
    })
}

pub fn choice_view(recipes: &RecipeMatrix, c: &Choice) -> Value {
    json!({
        "option": c.option,
        "product": recipes.products()[c.product],
        "product_index": c.product,
        "quantity": c.quantity,
    })
}

pub fn session_view(s: &Session) -> Value {
    let recipes = s.recipes();
    json!({
        "feasible": true,
        "id": s.id(),
        "step": s.step(),
        "totals": s.totals(),
        "extra": s.extra(),
        "requirements": s.requirements().values,
        "remaining": s.remaining().quantities,
        "choices": s.choices().iter().map(|c| choice_view(recipes, c)).collect::<Vec<_>>(),
        "finished": s.finished(),
    })
}

async fn get_recipes(State(app): State<Arc<AppState>>) -> Json<RawRecipes> {
    Json(app.recipes().to_raw())
}

async fn put_recipes(
    State(app): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<RawRecipes>> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv") || v.starts_with("text/plain"));
    let recipes = if is_csv {
        let text = std::str::from_utf8(&body)
            .map_err(|_| ApiError::BadRequest("recipe CSV must be UTF-8".into()))?;
        parse_recipes_csv_with(text, app.engine.row_sum_tolerance)?
    } else {
        validate_recipes(parse_json(&body)?, app.engine.row_sum_tolerance)?
    };
    if let Some(path) = &app.snapshot_path {
        std::fs::write(path, write_recipes_csv(&recipes)).map_err(Error::from)?;
    }
    let raw = recipes.to_raw();
    *app.recipes.write().unwrap() = Arc::new(recipes);
    Ok(Json(raw))
}

async fn get_stock(State(app): State<Arc<AppState>>) -> ApiResult<Json<StockBody>> {
    let s = app.stock()?;
    Ok(Json(StockBody {
        quantities: s.quantities,
        as_of: s.as_of,
    }))
}

async fn put_stock(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<StockBody>> {
    let body: StockBody = parse_json(&body)?;
    let m = app.recipes().n_components();
    let mut errors = Vec::new();
    if body.quantities.len() != m {
        errors.push(ValidationError::new(
            ErrorCode::DimensionMismatch,
            format!("stock has {} values, expected {m}", body.quantities.len()),
        ));
    }
    check_quantities(&body.quantities, "stock", &mut errors);
    if !errors.is_empty() {
        return Err(ValidationErrors(errors).into());
    }
    let as_of = body.as_of.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    let stock = StockVector::new(body.quantities).with_as_of(as_of);
    *app.stock_override.write().unwrap() = Some(stock.clone());
    Ok(Json(StockBody {
        quantities: stock.quantities,
        as_of: stock.as_of,
    }))
}

fn planning_inputs(app: &AppState, body: &Bytes) -> ApiResult<(Arc<RecipeMatrix>, StockVector, DemandVector)> {
    let DemandBody { demand } = parse_json(body)?;
    Ok((app.recipes(), app.stock()?, DemandVector(demand)))
}

async fn post_plan(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let (recipes, stock, demand) = planning_inputs(&app, &body)?;
    Ok(Json(match plan(&recipes, &stock, &demand, &app.engine)? {
        Outcome::Shortfall(s) => shortfall_view(&s),
        Outcome::Feasible(tree) => json!({
            "feasible": true,
            "requirements": tree.requirements.values,
            "remaining": tree.state.remaining,
            "root_choices": tree.root_choices().iter().map(|c| choice_view(&recipes, c)).collect::<Vec<_>>(),
        }),
    }))
}

async fn post_variants(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let (recipes, stock, demand) = planning_inputs(&app, &body)?;
    Ok(Json(match plan(&recipes, &stock, &demand, &app.engine)? {
        Outcome::Shortfall(s) => shortfall_view(&s),
        Outcome::Feasible(tree) => {
            let variants = enumerate_variants(&tree, &app.engine)?;
            json!({"feasible": true, "variants": variants})
        }
    }))
}

async fn post_session(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let (recipes, stock, demand) = planning_inputs(&app, &body)?;
    Ok(match open_session(&recipes, &stock, &demand, &app.engine)? {
        Outcome::Shortfall(s) => Json(shortfall_view(&s)).into_response(),
        Outcome::Feasible(session) => {
            let view = session_view(&session);
            app.sessions.insert(session);
            (StatusCode::CREATED, Json(view)).into_response()
        }
    })
}

fn find_session(app: &AppState, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
    app.sessions
        .get(id)
        .ok_or_else(|| ApiError::SessionNotFound(id.to_string()))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let shared = find_session(&app, &id)?;
    let session = shared.lock().unwrap();
    Ok(Json(session_view(&session)))
}

async fn post_choose(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let ChooseBody { option } = parse_json(&body)?;
    let shared = find_session(&app, &id)?;
    let mut session = shared.lock().unwrap();
    session.choose(option)?;
    Ok(Json(session_view(&session)))
}

async fn get_report(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let shared = find_session(&app, &id)?;
    let report = StepReport::from_session(&shared.lock().unwrap());
    let response = match q.format.as_deref().unwrap_or("text") {
        "text" => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], report.to_text()).into_response(),
        "csv" => (
            [
                (header::CONTENT_TYPE, "text/csv; charset=utf-8"),
                (header::CONTENT_DISPOSITION, "attachment; filename=\"plan.csv\""),
            ],
            report.to_csv(),
        )
            .into_response(),
        "json" => ([(header::CONTENT_TYPE, "application/json")], report.to_json()).into_response(),
        other => {
            return Err(ApiError::BadRequest(format!(
                "unknown report format {other:?}, expected text, csv or json"
            )))
        }
    };
    Ok(response)
}
