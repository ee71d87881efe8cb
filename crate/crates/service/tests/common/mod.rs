#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use qgen_core::{HeuristicAnnotator, Knobs};
use qgen_model::filter::{FilterExample, SpanScorer};
use qgen_model::qg::QgModel;
use qgen_model::{FilterConfig, QgConfig, Vocabulary};
use qgen_service::{router, AppState, Engine, SessionStore};

pub const PARAGRAPH: &str = "Edison switched on the first switch in 1869 . Switching power then spread across New York .";

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

/// Untrained generator over a small vocabulary; outputs are arbitrary but
/// well-formed.
pub fn toy_qg() -> QgModel {
    let cfg = QgConfig {
        embedding_dim: 8,
        encoder_layers: 1,
        hidden_size: 8,
        dropout: 0.0,
        vocab_size: 30,
        embeddings_frozen: false,
        tag_embedding_dim: 4,
        beam_width: 3,
        max_decode_len: 6,
        ..QgConfig::default()
    };
    let corpus = [words(PARAGRAPH), words("what when who did the ?")];
    QgModel::new(cfg, Vocabulary::build(corpus.iter(), 30)).unwrap()
}

pub fn toy_filter() -> SpanScorer {
    let cfg = FilterConfig {
        hidden_size: 8,
        embedding_dim: 8,
        vocab_size: 50,
        max_seq_len: 48,
        dropout: 0.0,
        ..FilterConfig::default()
    };
    let ex = FilterExample { question: words("what ?"), paragraph: words(PARAGRAPH), answer: None };
    SpanScorer::for_examples(cfg, &[ex]).unwrap()
}

/// `threshold`: `None` runs without a filter.
pub fn app_with(qg: Option<QgModel>, threshold: Option<f64>, store: SessionStore) -> Router {
    let filter = threshold.map(|_| toy_filter());
    let mut engine = Engine::new(qg, filter, Arc::new(HeuristicAnnotator::new()));
    if let Some(v) = threshold {
        engine.threshold = v;
    }
    router(AppState { store, engine: Arc::new(engine), default_knobs: Knobs::default() })
}

pub fn app() -> Router {
    app_with(Some(toy_qg()), None, SessionStore::in_memory())
}

pub struct Reply {
    pub status: StatusCode,
    pub json: Value,
    pub text: String,
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Reply {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    Reply { status, json, text }
}

pub async fn create(app: &Router, text: &str) -> String {
    let r = call(app, "POST", "/v1/sessions", Some(serde_json::json!({ "text": text }))).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
    r.json["session_id"].as_str().unwrap().to_owned()
}

/// Character range of the first occurrence of `needle`.
pub fn span_of(text: &str, needle: &str) -> (usize, usize) {
    let byte = text.find(needle).unwrap();
    let start = text[..byte].chars().count();
    (start, start + needle.chars().count())
}

/// Every question id visible in a facet list.
pub fn question_ids(facets: &Value) -> Vec<String> {
    facets
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|f| f["members"].as_array().unwrap())
        .flat_map(|m| m["questions"].as_array().unwrap())
        .map(|q| q["id"].as_str().unwrap().to_owned())
        .collect()
}
