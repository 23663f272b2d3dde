//! HTTP/JSON API over the catalog and the session store.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use revex_core::search::{filter_reviews, HighlightSpan};
use revex_core::session::required_hover_ms;
use revex_core::{
    Action, Catalog, Component, EngineConfig, ExplorationMetrics, InteractionEvent, KeywordPair, Metric,
    ReadingSession, Review, ReviewFilter, Sentiment, SentimentCounts, SessionState, SuggestionRecord, SuggestionSet,
    VisitMethod, VisitRequest, WidgetBreakdown,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::error::Error;
use crate::io::events_to_jsonl;
use crate::store::{SessionFile, SessionStore};

struct Live {
    session: ReadingSession,
    file: SessionFile,
}

/// Shared service state. Sessions are locked individually.
pub struct AppState {
    catalog: Arc<Catalog>,
    config: EngineConfig,
    store: SessionStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<Live>>>>,
}

impl AppState {
    /// Restores every stored session. A session that fails to replay
    /// aborts startup with an error naming it.
    pub fn open(catalog: Arc<Catalog>, config: EngineConfig, store: SessionStore) -> crate::Result<Self> {
        let mut sessions = HashMap::new();
        for session in store.restore(&catalog, &config)? {
            let id = session.session_id().to_string();
            let file = store.append_to(&id)?;
            sessions.insert(id, Arc::new(Mutex::new(Live { session, file })));
        }
        Ok(AppState {
            catalog,
            config,
            store,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map").len()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Live>>, ApiError> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_session", format!("no session {id}")))
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, reason: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": reason, "message": message.into() }),
        }
    }

    fn not_found(reason: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, reason, message)
    }

    fn bad_request(reason: &str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, reason, message)
    }
}

impl From<revex_core::Error> for ApiError {
    fn from(e: revex_core::Error) -> Self {
        use revex_core::Error as E;
        let message = e.to_string();
        match e {
            E::UnknownProduct(_) => ApiError::not_found("unknown_product", message),
            E::UnknownReview { .. } => ApiError::not_found("unknown_review", message),
            E::DwellTooShort {
                dwell_ms, required_ms, ..
            } => ApiError {
                status: StatusCode::CONFLICT,
                body: json!({
                    "error": "dwell_too_short",
                    "message": message,
                    "dwell_ms": dwell_ms,
                    "required_ms": required_ms,
                }),
            },
            E::NotSuggested(_) => ApiError::new(StatusCode::CONFLICT, "not_suggested", message),
            E::NonMonotonicTimestamp { .. } => ApiError::new(StatusCode::CONFLICT, "non_monotonic_timestamp", message),
            E::UnknownEmbedder(_) | E::InvalidInput(_) => ApiError::bad_request("invalid_input", message),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Engine(e) => e.into(),
            other => {
                tracing::error!(error = %other, "storage failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", other.to_string())
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request("invalid_payload", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ProductSummary {
    pub product_id: String,
    pub name: String,
    pub n: usize,
    pub sentiment_totals: SentimentCounts,
}

async fn products(State(app): State<Arc<AppState>>) -> ApiResult<Vec<ProductSummary>> {
    Ok(Json(
        app.catalog
            .iter()
            .map(|s| {
                let p = s.product();
                ProductSummary {
                    product_id: p.product_id.clone(),
                    name: p.name.clone(),
                    n: p.n,
                    sentiment_totals: p.sentiment_totals,
                }
            })
            .collect(),
    ))
}

async fn keywords(State(app): State<Arc<AppState>>, Path(pid): Path<String>) -> ApiResult<Vec<KeywordPair>> {
    Ok(Json(app.catalog.get(&pid)?.keywords().to_vec()))
}

#[derive(Debug, Default, Deserialize)]
pub struct ReviewQuery {
    pub sentiment: Option<String>,
    /// `word_a,word_b`.
    pub keyword: Option<String>,
    pub q: Option<String>,
    /// `visited` or `covered`; needs `session`.
    pub metric_filter: Option<String>,
    pub session: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewView {
    #[serde(flatten)]
    pub review: Review,
    pub required_hover_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub visited: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covered: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewList {
    pub reviews: Vec<ReviewView>,
    pub spans: Vec<HighlightSpan>,
}

fn blank(s: Option<String>) -> Option<String> {
    s.filter(|v| !v.trim().is_empty())
}

async fn reviews(
    State(app): State<Arc<AppState>>,
    Path(pid): Path<String>,
    Query(q): Query<ReviewQuery>,
) -> ApiResult<ReviewList> {
    let space = app.catalog.get(&pid)?;
    let mut filter = ReviewFilter::default();
    if let Some(s) = blank(q.sentiment) {
        filter.sentiment =
            Some(Sentiment::parse(&s).ok_or_else(|| ApiError::bad_request("invalid_sentiment", format!("{s:?}")))?);
    }
    if let Some(k) = blank(q.keyword) {
        let (a, b) = k
            .split_once(',')
            .ok_or_else(|| ApiError::bad_request("invalid_keyword", "expected word_a,word_b"))?;
        filter.keyword = Some(KeywordPair {
            word_a: a.trim().to_string(),
            word_b: b.trim().to_string(),
            frequency: 0,
        });
    }
    filter.query = blank(q.q);
    let metric = match blank(q.metric_filter).as_deref() {
        None => None,
        Some("visited") => Some(Metric::Visit),
        Some("covered") => Some(Metric::Coverage),
        Some(other) => return Err(ApiError::bad_request("invalid_metric_filter", format!("{other:?}"))),
    };

    // Marks come from the session's state for this product, if any.
    let live = match blank(q.session) {
        Some(sid) => Some(app.session(&sid)?),
        None if metric.is_some() => {
            return Err(ApiError::bad_request(
                "missing_session",
                "metric_filter requires session",
            ));
        }
        None => None,
    };
    let guard = live.as_ref().map(|l| l.lock().expect("session lock"));
    let fresh;
    let state: Option<&SessionState> = match &guard {
        Some(g) => match g.session.product(&pid) {
            Some(s) => Some(s),
            None => {
                fresh = SessionState::new(g.session.session_id(), space, &app.config, g.session.created_at());
                Some(&fresh)
            }
        },
        None => None,
    };

    let base: Vec<&Review> = match (metric, state) {
        (Some(m), Some(st)) => st.drilldown(space, m),
        _ => space.reviews().iter().collect(),
    };
    let (kept, spans) = filter_reviews(&base, &filter);
    let reviews = kept
        .into_iter()
        .map(|r| {
            let i = space.position(&r.review_id).expect("review of this product");
            ReviewView {
                review: r.clone(),
                required_hover_ms: required_hover_ms(r.word_count),
                visited: state.map(|s| s.is_visited(i)),
                covered: state.map(|s| s.is_covered(i)),
            }
        })
        .collect();
    Ok(Json(ReviewList { reviews, spans }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub created_at: u64,
}

async fn create_session(State(app): State<Arc<AppState>>) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let session_id = uuid::Uuid::new_v4().simple().to_string();
    let created_at = now_ms();
    let file = app.store.create(&session_id, created_at)?;
    let live = Live {
        session: ReadingSession::new(session_id.clone(), created_at),
        file,
    };
    app.sessions
        .write()
        .expect("session map")
        .insert(session_id.clone(), Arc::new(Mutex::new(live)));
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id, created_at })))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisitSource {
    #[default]
    Review,
    Suggestion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisitBody {
    pub review_id: String,
    pub method: VisitMethod,
    #[serde(default)]
    pub dwell_ms: Option<u64>,
    #[serde(default)]
    pub source: VisitSource,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VisitResponse {
    pub metrics: ExplorationMetrics,
    pub newly_covered: Vec<String>,
    pub suggestions: SuggestionSet,
    pub changed: bool,
}

async fn visit(
    State(app): State<Arc<AppState>>,
    Path((sid, pid)): Path<(String, String)>,
    body: Result<Json<VisitBody>, JsonRejection>,
) -> ApiResult<VisitResponse> {
    let Json(body) = body?;
    let live = app.session(&sid)?;
    let mut live = live.lock().expect("session lock");
    let live = &mut *live;
    let mut request = match body.method {
        VisitMethod::Click => VisitRequest::click(),
        VisitMethod::Hover => {
            let dwell = body
                .dwell_ms
                .ok_or_else(|| ApiError::bad_request("missing_dwell", "hover needs dwell_ms"))?;
            VisitRequest::hover(dwell)
        }
    };
    if body.method == VisitMethod::Click {
        request.dwell_ms = body.dwell_ms;
    }
    if body.source == VisitSource::Suggestion {
        request = request.from_suggestions();
    }
    let ts = now_ms().max(live.session.last_timestamp());
    let outcome = live
        .session
        .visit(&app.catalog, &app.config, &pid, &body.review_id, request, ts)?;
    live.file.append(live.session.log().last().expect("visit logged"))?;
    Ok(Json(VisitResponse {
        metrics: outcome.metrics,
        newly_covered: outcome.newly_covered,
        suggestions: outcome.suggestions,
        changed: outcome.changed,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WidgetBreakdowns {
    pub visit: WidgetBreakdown,
    pub coverage: WidgetBreakdown,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsResponse {
    pub metrics: ExplorationMetrics,
    pub visited: usize,
    pub covered: usize,
    pub n: usize,
    pub widget_breakdown: WidgetBreakdowns,
}

/// Runs `f` on the session's state for a product, or on a fresh state if the
/// reader has not touched it; reads never modify the session.
fn with_state<T>(app: &AppState, sid: &str, pid: &str, f: impl FnOnce(&SessionState) -> T) -> Result<T, ApiError> {
    let space = app.catalog.get(pid)?;
    let live = app.session(sid)?;
    let live = live.lock().expect("session lock");
    Ok(match live.session.product(pid) {
        Some(state) => f(state),
        None => f(&SessionState::new(sid, space, &app.config, live.session.created_at())),
    })
}

async fn metrics(
    State(app): State<Arc<AppState>>,
    Path((sid, pid)): Path<(String, String)>,
) -> ApiResult<MetricsResponse> {
    let space = app.catalog.get(&pid)?;
    with_state(&app, &sid, &pid, |state| MetricsResponse {
        metrics: state.metrics(space, &app.config),
        visited: state.visited().len(),
        covered: state.covered_count(),
        n: space.len(),
        widget_breakdown: WidgetBreakdowns {
            visit: state.widget_breakdown(space, Metric::Visit),
            coverage: state.widget_breakdown(space, Metric::Coverage),
        },
    })
    .map(Json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuggestionsResponse {
    pub suggestions: SuggestionSet,
    /// Visited suggestions, newest first.
    pub history: Vec<SuggestionRecord>,
}

async fn suggestions(
    State(app): State<Arc<AppState>>,
    Path((sid, pid)): Path<(String, String)>,
) -> ApiResult<SuggestionsResponse> {
    with_state(&app, &sid, &pid, |state| SuggestionsResponse {
        suggestions: state.suggestions().clone(),
        history: state.suggestion_history().iter().rev().cloned().collect(),
    })
    .map(Json)
}

/// A UI-side interaction; the server assigns the timestamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventBody {
    pub component: Component,
    pub action: Action,
    #[serde(default)]
    pub product_id: Option<String>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub dwell_ms: Option<u64>,
}

async fn post_event(
    State(app): State<Arc<AppState>>,
    Path(sid): Path<String>,
    body: Result<Json<EventBody>, JsonRejection>,
) -> Result<(StatusCode, Json<InteractionEvent>), ApiError> {
    let Json(body) = body?;
    let live = app.session(&sid)?;
    let mut live = live.lock().expect("session lock");
    let live = &mut *live;
    let ts = now_ms().max(live.session.last_timestamp());
    let event = InteractionEvent {
        timestamp: ts,
        component: body.component,
        action: body.action,
        product_id: body.product_id,
        target: body.target,
        dwell_ms: body.dwell_ms,
    };
    if event.is_visit() {
        return Err(ApiError::bad_request(
            "use_visit_endpoint",
            "visits must be posted to the visit endpoint",
        ));
    }
    live.session.record(&app.catalog, &app.config, event.clone())?;
    live.file.append(&event)?;
    Ok((StatusCode::CREATED, Json(event)))
}

async fn log(State(app): State<Arc<AppState>>, Path(sid): Path<String>) -> Result<Response, ApiError> {
    let live = app.session(&sid)?;
    let body = events_to_jsonl(live.lock().expect("session lock").session.log());
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

pub fn router(app: Arc<AppState>, ui_origin: Option<&str>) -> crate::Result<Router> {
    let mut router = Router::new()
        .route("/products", get(products))
        .route("/products/{id}/keywords", get(keywords))
        .route("/products/{id}/reviews", get(reviews))
        .route("/sessions", post(create_session))
        .route("/sessions/{sid}/products/{pid}/visit", post(visit))
        .route("/sessions/{sid}/products/{pid}/metrics", get(metrics))
        .route("/sessions/{sid}/products/{pid}/suggestions", get(suggestions))
        .route("/sessions/{sid}/events", post(post_event))
        .route("/sessions/{sid}/log", get(log))
        .with_state(app);
    if let Some(origin) = ui_origin {
        let origin = HeaderValue::from_str(origin).map_err(|e| Error::Config(format!("ui_origin: {e}")))?;
        router = router.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::exact(origin))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    Ok(router)
}
