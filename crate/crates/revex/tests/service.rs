mod support;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use revex::service::{router, AppState};
use revex::store::SessionStore;
use revex_core::EngineConfig;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Harness {
    _dir: tempfile::TempDir,
    store_path: std::path::PathBuf,
    catalog: Arc<revex_core::Catalog>,
}

impl Harness {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store_path = dir.path().join("store");
        Harness {
            _dir: dir,
            store_path,
            catalog: Arc::new(support::catalog()),
        }
    }

    fn app(&self) -> Router {
        let store = SessionStore::open(&self.store_path).unwrap();
        let state = AppState::open(self.catalog.clone(), EngineConfig::default(), store).unwrap();
        router(Arc::new(state), Some("http://localhost:5173")).unwrap()
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body.map(|b| b.to_string())).await;
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or(Value::Null)
    };
    (status, value)
}

async fn call_raw(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or(Body::empty(), Body::from)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn new_session(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
    body["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn catalog_endpoints() {
    let h = Harness::new();
    let app = h.app();
    let (status, products) = call(&app, "GET", "/products", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(products[0]["product_id"], "p1");
    assert_eq!(products[0]["n"], 6);
    assert_eq!(
        products[0]["sentiment_totals"],
        json!({"positive": 3, "neutral": 1, "negative": 2})
    );

    let (_, keywords) = call(&app, "GET", "/products/p1/keywords", None).await;
    let keywords = keywords.as_array().unwrap();
    assert!(keywords.len() <= 8 && !keywords.is_empty());
    assert!(keywords[0].get("word_a").is_some() && keywords[0].get("frequency").is_some());

    let (status, body) = call(&app, "GET", "/products/nope/keywords", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "unknown_product");
}

#[tokio::test]
async fn review_filters_and_spans() {
    let h = Harness::new();
    let app = h.app();
    let (_, all) = call(&app, "GET", "/products/p1/reviews", None).await;
    let ids: Vec<&str> = all["reviews"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["review_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["a", "b", "c", "d", "e", "f"]);
    assert_eq!(all["reviews"][0]["required_hover_ms"], 1000 + (4000 + 45) / 90);
    assert!(all["reviews"][0].get("visited").is_none());

    let (_, found) = call(&app, "GET", "/products/p1/reviews?q=BASS&sentiment=positive", None).await;
    assert_eq!(found["reviews"].as_array().unwrap().len(), 2);
    let span = &found["spans"][0];
    assert_eq!(span["field"], "text");
    let text = found["reviews"][0]["text"].as_str().unwrap();
    let (s, e) = (
        span["start"].as_u64().unwrap() as usize,
        span["end"].as_u64().unwrap() as usize,
    );
    assert_eq!(&text[s..e], "bass");

    let (_, kw) = call(&app, "GET", "/products/p1/reviews?keyword=battery,headphones", None).await;
    assert_eq!(kw["reviews"].as_array().unwrap().len(), 2);

    let (status, err) = call(&app, "GET", "/products/p1/reviews?sentiment=angry", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "invalid_sentiment");
    let (status, err) = call(&app, "GET", "/products/p1/reviews?metric_filter=visited", None).await;
    assert_eq!(
        (status, err["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("missing_session"))
    );
}

#[tokio::test]
async fn fresh_metrics_are_zero_and_visits_update_them() {
    let h = Harness::new();
    let app = h.app();
    let sid = new_session(&app).await;
    let (status, m) = call(&app, "GET", &format!("/sessions/{sid}/products/p1/metrics"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(m["metrics"]["visit_pct"], 0);
    assert_eq!(m["metrics"]["coverage_pct"], 0);
    assert_eq!(
        m["metrics"]["distribution"],
        json!({"positive": 0.0, "neutral": 0.0, "negative": 0.0})
    );
    assert_eq!(m["metrics"]["skewed_toward"], Value::Null);
    assert_eq!(m["widget_breakdown"]["visit"]["metric"], "visit");
    assert!(m["widget_breakdown"]["coverage"]["sentiments"]["positive"]
        .get("fraction")
        .is_some());

    let (status, v) = call(
        &app,
        "POST",
        &format!("/sessions/{sid}/products/p1/visit"),
        Some(json!({"review_id": "a", "method": "click"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    for key in ["metrics", "newly_covered", "suggestions", "changed"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["metrics"]["visit_pct"], 17);
    assert_eq!(v["newly_covered"], json!(["a", "b"]));
    assert_eq!(v["metrics"]["coverage_pct"], 34);
    let ranked = v["suggestions"]["ranked"].as_array().unwrap();
    assert!(!ranked.is_empty() && ranked.len() <= 5);
    for c in ranked {
        assert_ne!(c["review_id"], "a");
        for key in ["rank", "d", "s", "cov", "score", "component"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }

    let (_, s) = call(&app, "GET", &format!("/sessions/{sid}/products/p1/suggestions"), None).await;
    assert!(s["suggestions"]["ranked"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["review_id"] != "a"));
    assert_eq!(s["history"], json!([]));

    let (_, visited) = call(
        &app,
        "GET",
        &format!("/products/p1/reviews?metric_filter=covered&session={sid}"),
        None,
    )
    .await;
    let ids: Vec<&str> = visited["reviews"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["review_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["a", "b"]);
    assert_eq!(visited["reviews"][1]["visited"], false);
    assert_eq!(visited["reviews"][1]["covered"], true);
}

#[tokio::test]
async fn hover_below_required_dwell_is_rejected() {
    let h = Harness::new();
    let app = h.app();
    let sid = new_session(&app).await;
    let uri = format!("/sessions/{sid}/products/p2/visit");
    // Review x has exactly ten words.
    let (status, body) = call(
        &app,
        "POST",
        &uri,
        Some(json!({"review_id": "x", "method": "hover", "dwell_ms": 900})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "dwell_too_short");
    assert_eq!(body["required_ms"], 1000);
    let (_, log) = call_raw(&app, "GET", &format!("/sessions/{sid}/log"), None).await;
    assert!(log.is_empty());

    let (status, _) = call(
        &app,
        "POST",
        &uri,
        Some(json!({"review_id": "x", "method": "hover", "dwell_ms": 1000})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = call(&app, "POST", &uri, Some(json!({"review_id": "y", "method": "hover"}))).await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("missing_dwell"))
    );
}

#[tokio::test]
async fn bad_payloads_and_unknown_ids() {
    let h = Harness::new();
    let app = h.app();
    let sid = new_session(&app).await;
    let visit = format!("/sessions/{sid}/products/p1/visit");
    let (status, body) = call_raw(&app, "POST", &visit, Some("{\"review_id\": 3}".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(
        serde_json::from_slice::<Value>(&body).unwrap()["error"],
        "invalid_payload"
    );
    let (status, body) = call(
        &app,
        "POST",
        &visit,
        Some(json!({"review_id": "nope", "method": "click"})),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown_review"))
    );
    let (status, _) = call(
        &app,
        "POST",
        "/sessions/zzz/products/p1/visit",
        Some(json!({"review_id": "a", "method": "click"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", &format!("/sessions/{sid}/products/nope/metrics"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(
        &app,
        "POST",
        &visit,
        Some(json!({"review_id": "a", "method": "click", "source": "suggestion"})),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::CONFLICT, Some("not_suggested"))
    );
}

#[tokio::test]
async fn events_endpoint_and_log() {
    let h = Harness::new();
    let app = h.app();
    let sid = new_session(&app).await;
    let events = format!("/sessions/{sid}/events");
    let (status, e) = call(
        &app,
        "POST",
        &events,
        Some(json!({"component": "keyword", "action": "filter", "product_id": "p1", "target": "bass,sound"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(e["timestamp"].as_u64().unwrap() > 0);
    let (status, body) = call(
        &app,
        "POST",
        &events,
        Some(json!({"component": "review", "action": "click", "target": "a"})),
    )
    .await;
    assert_eq!(
        (status, body["error"].as_str()),
        (StatusCode::BAD_REQUEST, Some("use_visit_endpoint"))
    );
    let (status, _) = call(
        &app,
        "POST",
        &events,
        Some(json!({"component": "metrics", "action": "dance"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(
        &app,
        "POST",
        &events,
        Some(json!({"component": "metrics", "action": "view", "product_id": "nope"})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    call(
        &app,
        "POST",
        &format!("/sessions/{sid}/products/p1/visit"),
        Some(json!({"review_id": "c", "method": "click"})),
    )
    .await;
    let (status, log) = call_raw(&app, "GET", &format!("/sessions/{sid}/log"), None).await;
    assert_eq!(status, StatusCode::OK);
    let lines: Vec<Value> = String::from_utf8(log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["component"], "keyword");
    assert_eq!(lines[1]["component"], "review");
    assert_eq!(lines[1]["target"], "c");
}

#[tokio::test]
async fn suggestion_history_is_newest_first() {
    let h = Harness::new();
    let app = h.app();
    let sid = new_session(&app).await;
    let visit = format!("/sessions/{sid}/products/p1/visit");
    call(&app, "POST", &visit, Some(json!({"review_id": "a", "method": "click"}))).await;
    let mut followed = Vec::new();
    for _ in 0..3 {
        let (_, s) = call(&app, "GET", &format!("/sessions/{sid}/products/p1/suggestions"), None).await;
        let top = s["suggestions"]["ranked"][0]["review_id"].as_str().unwrap().to_string();
        let (status, _) = call(
            &app,
            "POST",
            &visit,
            Some(json!({"review_id": top, "method": "click", "source": "suggestion"})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        followed.push(top);
    }
    let (_, s) = call(&app, "GET", &format!("/sessions/{sid}/products/p1/suggestions"), None).await;
    let history: Vec<&str> = s["history"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["review_id"].as_str().unwrap())
        .collect();
    followed.reverse();
    assert_eq!(history, followed);
    assert!(s["history"][0]["component"].is_string());
}

#[tokio::test]
async fn restart_reproduces_metrics_and_suggestions() {
    let h = Harness::new();
    let sid;
    let before;
    let before_s;
    {
        let app = h.app();
        sid = new_session(&app).await;
        let visit = format!("/sessions/{sid}/products/p1/visit");
        for (rid, method) in [
            ("a", "click"),
            ("c", "click"),
            ("d", "click"),
            ("e", "click"),
            ("f", "click"),
        ] {
            let (status, _) = call(&app, "POST", &visit, Some(json!({"review_id": rid, "method": method}))).await;
            assert_eq!(status, StatusCode::OK);
        }
        call(
            &app,
            "POST",
            &format!("/sessions/{sid}/products/p2/visit"),
            Some(json!({"review_id": "y", "method": "hover", "dwell_ms": 2000})),
        )
        .await;
        before = call_raw(&app, "GET", &format!("/sessions/{sid}/products/p1/metrics"), None)
            .await
            .1;
        before_s = call_raw(&app, "GET", &format!("/sessions/{sid}/products/p1/suggestions"), None)
            .await
            .1;
    }
    let app = h.app();
    let after = call_raw(&app, "GET", &format!("/sessions/{sid}/products/p1/metrics"), None)
        .await
        .1;
    let after_s = call_raw(&app, "GET", &format!("/sessions/{sid}/products/p1/suggestions"), None)
        .await
        .1;
    assert_eq!(before, after);
    assert_eq!(before_s, after_s);
    let m: Value = serde_json::from_slice(&after).unwrap();
    assert_eq!(m["metrics"]["visit_pct"], 84);
}

#[tokio::test]
async fn cors_allows_the_ui_origin() {
    let h = Harness::new();
    let app = h.app();
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/products")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "GET")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
    let req = Request::builder()
        .uri("/products")
        .header("origin", "http://evil.example")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_ne!(
        resp.headers().get("access-control-allow-origin").unwrap(),
        "http://evil.example"
    );
}
