use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use qgen_core::{
    apply_edits, extract_candidates, review_paragraph, tokenize, validate_custom_span, AnswerSpan, CandidateKind,
    Knobs, ReviewFlag, SpanSource, TextEdit,
};
use qgen_model::filter::FilterVerdict;

use crate::engine::Engine;
use crate::error::ApiError;
use crate::export::{export_document, export_text};
use crate::session::{AnswerRecord, EditHistory, QuestionRecord, Session, SessionHandle, SessionStore, Version};
use crate::views::{facet_views, question_view, visible_facets, FacetView, KnobsBody, QuestionView};

pub struct AppState {
    pub store: SessionStore,
    pub engine: Arc<Engine>,
    pub default_knobs: Knobs,
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

/// `Json` whose rejections use the service error body.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Self(v)),
            Err(r) => Err(ApiError::new(StatusCode::BAD_REQUEST, "InvalidBody", r.body_text())),
        }
    }
}

pub fn router(state: AppState) -> Router {
    let v1 = Router::new()
        .route("/health", get(|| async { Json(serde_json::json!({ "status": "ok" })) }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/text", patch(edit_text))
        .route("/sessions/{id}/candidates", get(candidates))
        .route("/sessions/{id}/generate", post(generate))
        .route("/sessions/{id}/facets", get(facets))
        .route("/sessions/{id}/knobs", put(set_knobs))
        .route("/sessions/{id}/filtered", get(filtered))
        .route("/sessions/{id}/questions/{qid}", put(edit_question))
        .route("/sessions/{id}/questions/{qid}/history", get(question_history))
        .route("/sessions/{id}/questions/{qid}/attention", get(attention))
        .route("/sessions/{id}/answers/{aid}", put(edit_answer))
        .route("/sessions/{id}/answers/{aid}/history", get(answer_history))
        .route("/sessions/{id}/export", get(export));
    Router::new().nest("/v1", v1).with_state(Arc::new(state))
}

async fn session(state: &AppState, id: &str) -> ApiResult<SessionHandle> {
    state.store.get(id).await.map_err(ApiError::internal)?.ok_or_else(|| ApiError::not_found("session", id))
}

async fn save(state: &AppState, s: &mut Session) -> ApiResult<()> {
    s.touch();
    state.store.persist(s).await.map_err(ApiError::internal)
}

fn require_clean(s: &Session) -> ApiResult<()> {
    if s.flags.is_empty() {
        return Ok(());
    }
    Err(ApiError::new(StatusCode::CONFLICT, "UnresolvedFlags", "resolve the flagged content first")
        .with_details(serde_json::to_value(&s.flags).unwrap_or_default()))
}

fn views(s: &Session) -> ApiResult<Vec<FacetView>> {
    Ok(facet_views(s, &visible_facets(s)?))
}

#[derive(Deserialize)]
struct CreateBody {
    text: String,
}

#[derive(Serialize, Deserialize)]
pub struct CreatedSession {
    pub session_id: String,
    pub flags: Vec<ReviewFlag>,
}

async fn create_session(State(st): State<Shared>, ApiJson(body): ApiJson<CreateBody>) -> ApiResult<Response> {
    let flags = review_paragraph(&body.text)?;
    let paragraph = tokenize(&body.text)?;
    let s = Session::new(paragraph, flags.clone(), st.default_knobs);
    let id = s.id.clone();
    st.store.insert(s).await.map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(CreatedSession { session_id: id, flags })).into_response())
}

#[derive(Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub flags: Vec<ReviewFlag>,
    pub knobs: Knobs,
    pub facets: Vec<FacetView>,
    pub filtered_out: usize,
}

async fn get_session(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    Ok(Json(SessionView {
        id: s.id.clone(),
        text: s.paragraph.raw_text.clone(),
        tokens: s.paragraph.tokens.clone(),
        flags: s.flags.clone(),
        knobs: s.knobs,
        facets: views(&s)?,
        filtered_out: s.filtered.len(),
    }))
}

#[derive(Deserialize)]
struct EditSpec {
    start: usize,
    end: usize,
    #[serde(default)]
    replacement: String,
}

#[derive(Deserialize)]
struct EditsBody {
    edits: Vec<EditSpec>,
}

#[derive(Serialize, Deserialize)]
pub struct FlagsView {
    pub text: String,
    pub flags: Vec<ReviewFlag>,
}

async fn edit_text(
    State(st): State<Shared>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<EditsBody>,
) -> ApiResult<Json<FlagsView>> {
    let h = session(&st, &id).await?;
    let mut s = h.lock().await;
    let edits: Vec<TextEdit> = body.edits.into_iter().map(|e| TextEdit::new(e.start, e.end, e.replacement)).collect();
    let text = apply_edits(&s.paragraph.raw_text, &edits)?;
    let flags = review_paragraph(&text)?;
    s.paragraph = tokenize(&text)?;
    s.flags = flags.clone();
    s.clear_results();
    save(&st, &mut s).await?;
    Ok(Json(FlagsView { text, flags }))
}

async fn candidates(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<AnswerSpan>>> {
    let kind = match q.get("kind").map(String::as_str) {
        Some("named_entity") | None => CandidateKind::NamedEntity,
        Some("noun_phrase") => CandidateKind::NounPhrase,
        Some(other) => {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "UnknownKind", format!("unknown kind {other:?}")))
        }
    };
    let h = session(&st, &id).await?;
    let paragraph = {
        let s = h.lock().await;
        require_clean(&s)?;
        s.paragraph.clone()
    };
    let annotator = st.engine.annotator.clone();
    let spans = tokio::task::spawn_blocking(move || extract_candidates(&paragraph, kind, annotator.as_ref()))
        .await
        .map_err(ApiError::internal)??;
    Ok(Json(spans))
}

/// `[start, end]` or `{start, end, source?}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum SpanSpec {
    Pair(usize, usize),
    Object {
        start: usize,
        end: usize,
        #[serde(default)]
        source: Option<SpanSource>,
    },
}

impl SpanSpec {
    fn parts(&self) -> (usize, usize, Option<SpanSource>) {
        match *self {
            Self::Pair(start, end) => (start, end, None),
            Self::Object { start, end, source } => (start, end, source),
        }
    }
}

#[derive(Deserialize)]
struct GenerateBody {
    spans: Vec<SpanSpec>,
}

#[derive(Serialize, Deserialize)]
pub struct GenerateView {
    pub facets: Vec<FacetView>,
    pub filtered_out: usize,
}

/// Replaces the session's answers and questions with a fresh generation for
/// the given spans.
async fn generate(
    State(st): State<Shared>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<GenerateBody>,
) -> ApiResult<Json<GenerateView>> {
    let h = session(&st, &id).await?;
    let mut s = h.lock().await;
    require_clean(&s)?;
    let mut spans: Vec<AnswerSpan> = Vec::new();
    for spec in &body.spans {
        let (start, end, source) = spec.parts();
        let mut span = validate_custom_span(&s.paragraph, (start, end))?;
        if let Some(source) = source {
            span.source = source;
        }
        if !spans.iter().any(|x| x.char_range == span.char_range) {
            spans.push(span);
        }
    }
    let engine = st.engine.clone();
    let paragraph = s.paragraph.clone();
    let job = spans.clone();
    let outcome = tokio::task::spawn_blocking(move || engine.generate(&paragraph, &job))
        .await
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "ModelUnavailable", "no question generator is loaded"))??;

    s.clear_results();
    let mut next_q = 0;
    for (a, result) in outcome.into_iter().enumerate() {
        let answer_id = format!("a{a}");
        s.answers.push(AnswerRecord {
            id: answer_id.clone(),
            history: EditHistory::new(result.answer.surface.clone()),
            span: result.answer,
        });
        for (generated, verdict) in result.questions {
            let record = QuestionRecord {
                id: format!("q{next_q}"),
                answer_id: answer_id.clone(),
                history: EditHistory::new(generated.text()),
                generated,
                verdict,
            };
            next_q += 1;
            if verdict.is_none_or(|v| v.answerable) {
                s.questions.push(record);
            } else {
                s.filtered.push(record);
            }
        }
    }
    s.generated_at = Some(chrono::Utc::now());
    save(&st, &mut s).await?;
    Ok(Json(GenerateView { facets: views(&s)?, filtered_out: s.filtered.len() }))
}

async fn facets(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Vec<FacetView>>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    Ok(Json(views(&s)?))
}

/// Stores new knob values; stored results are never modified.
async fn set_knobs(
    State(st): State<Shared>,
    Path(id): Path<String>,
    ApiJson(body): ApiJson<KnobsBody>,
) -> ApiResult<Json<Vec<FacetView>>> {
    let knobs = Knobs::try_from(body)?;
    let h = session(&st, &id).await?;
    let mut s = h.lock().await;
    s.knobs = knobs;
    save(&st, &mut s).await?;
    Ok(Json(views(&s)?))
}

#[derive(Serialize, Deserialize)]
pub struct FilteredView {
    pub question: QuestionView,
    pub answer_id: String,
    pub verdict: Option<FilterVerdict>,
}

async fn filtered(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Vec<FilteredView>>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    Ok(Json(
        s.filtered
            .iter()
            .map(|q| FilteredView { question: question_view(q), answer_id: q.answer_id.clone(), verdict: q.verdict })
            .collect(),
    ))
}

#[derive(Deserialize)]
struct EditBody {
    text: String,
    #[serde(default)]
    note: Option<String>,
}

fn nonblank(text: &str) -> ApiResult<()> {
    if text.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "EmptyInput", "text must not be empty"));
    }
    Ok(())
}

async fn edit_question(
    State(st): State<Shared>,
    Path((id, qid)): Path<(String, String)>,
    ApiJson(body): ApiJson<EditBody>,
) -> ApiResult<Json<Vec<Version>>> {
    nonblank(&body.text)?;
    let h = session(&st, &id).await?;
    let mut s = h.lock().await;
    let q = s.question_mut(&qid).ok_or_else(|| ApiError::not_found("question", &qid))?;
    q.history.push(body.text, body.note);
    let versions = q.history.versions().to_vec();
    save(&st, &mut s).await?;
    Ok(Json(versions))
}

async fn question_history(
    State(st): State<Shared>,
    Path((id, qid)): Path<(String, String)>,
) -> ApiResult<Json<Vec<Version>>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    let q = s.question(&qid).ok_or_else(|| ApiError::not_found("question", &qid))?;
    Ok(Json(q.history.versions().to_vec()))
}

async fn edit_answer(
    State(st): State<Shared>,
    Path((id, aid)): Path<(String, String)>,
    ApiJson(body): ApiJson<EditBody>,
) -> ApiResult<Json<Vec<Version>>> {
    nonblank(&body.text)?;
    let h = session(&st, &id).await?;
    let mut s = h.lock().await;
    let a = s.answer_mut(&aid).ok_or_else(|| ApiError::not_found("answer", &aid))?;
    a.history.push(body.text, body.note);
    let versions = a.history.versions().to_vec();
    save(&st, &mut s).await?;
    Ok(Json(versions))
}

async fn answer_history(
    State(st): State<Shared>,
    Path((id, aid)): Path<(String, String)>,
) -> ApiResult<Json<Vec<Version>>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    let a = s.answers.iter().find(|a| a.id == aid).ok_or_else(|| ApiError::not_found("answer", &aid))?;
    Ok(Json(a.history.versions().to_vec()))
}

#[derive(Serialize, Deserialize)]
pub struct AttentionView {
    /// Row labels.
    pub question_tokens: Vec<String>,
    /// Column labels.
    pub paragraph_tokens: Vec<String>,
    /// `weights[row][column]`.
    pub weights: Vec<Vec<f64>>,
}

async fn attention(
    State(st): State<Shared>,
    Path((id, qid)): Path<(String, String)>,
) -> ApiResult<Json<AttentionView>> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    let q = s.question(&qid).ok_or_else(|| ApiError::not_found("question", &qid))?;
    Ok(Json(AttentionView {
        question_tokens: q.generated.tokens.clone(),
        paragraph_tokens: s.paragraph.tokens.clone(),
        weights: q.generated.attention.clone(),
    }))
}

async fn export(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let h = session(&st, &id).await?;
    let s = h.lock().await;
    let doc = export_document(&s, &visible_facets(&s)?);
    match q.get("format").map(String::as_str) {
        Some("json") | None => Ok(Json(doc).into_response()),
        Some("text") => Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], export_text(&doc)).into_response()),
        Some(other) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "UnknownFormat",
            format!("unknown export format {other:?}"),
        )),
    }
}
