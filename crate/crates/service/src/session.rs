use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use qgen_core::{AnswerSpan, Confidence, GeneratedQuestion, Knobs, Paragraph, ReviewFlag};
use qgen_model::filter::FilterVerdict;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Version {
    pub text: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Append-only list of versions; the first is the generated original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditHistory {
    versions: Vec<Version>,
}

impl EditHistory {
    pub fn new(original: String) -> Self {
        Self { versions: vec![Version { text: original, timestamp: Utc::now(), note: None }] }
    }

    pub fn push(&mut self, text: String, note: Option<String>) {
        self.versions.push(Version { text, timestamp: Utc::now(), note });
    }

    pub fn current(&self) -> &str {
        &self.versions.last().expect("history holds the original").text
    }

    pub fn versions(&self) -> &[Version] {
        &self.versions
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub answer_id: String,
    pub generated: GeneratedQuestion,
    pub history: EditHistory,
    pub verdict: Option<FilterVerdict>,
}

impl Confidence for QuestionRecord {
    fn intra_confidence(&self) -> f64 {
        self.generated.intra_confidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub id: String,
    pub span: AnswerSpan,
    pub history: EditHistory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub paragraph: Paragraph,
    pub flags: Vec<ReviewFlag>,
    pub answers: Vec<AnswerRecord>,
    /// Questions that passed the answerability filter.
    pub questions: Vec<QuestionRecord>,
    /// Questions removed by the answerability filter, with their verdicts.
    pub filtered: Vec<QuestionRecord>,
    pub knobs: Knobs,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    #[serde(default)]
    pub generated_at: Option<DateTime<Utc>>,
}

impl Session {
    pub fn new(paragraph: Paragraph, flags: Vec<ReviewFlag>, knobs: Knobs) -> Self {
        let now = Utc::now();
        Self {
            id: uuid::Uuid::new_v4().to_string(),
            paragraph,
            flags,
            answers: Vec::new(),
            questions: Vec::new(),
            filtered: Vec::new(),
            knobs,
            created_at: now,
            updated_at: now,
            generated_at: None,
        }
    }

    pub fn selected_spans(&self) -> impl Iterator<Item = &AnswerSpan> {
        self.answers.iter().map(|a| &a.span)
    }

    /// Drops every span and result; used whenever the text changes.
    pub fn clear_results(&mut self) {
        self.answers.clear();
        self.questions.clear();
        self.filtered.clear();
        self.generated_at = None;
    }

    pub fn touch(&mut self) {
        self.updated_at = Utc::now();
    }

    pub fn answer_mut(&mut self, id: &str) -> Option<&mut AnswerRecord> {
        self.answers.iter_mut().find(|a| a.id == id)
    }

    pub fn question(&self, id: &str) -> Option<&QuestionRecord> {
        self.questions.iter().chain(&self.filtered).find(|q| q.id == id)
    }

    pub fn question_mut(&mut self, id: &str) -> Option<&mut QuestionRecord> {
        self.questions.iter_mut().chain(self.filtered.iter_mut()).find(|q| q.id == id)
    }
}

pub type SessionHandle = Arc<Mutex<Session>>;

/// In-memory sessions, each behind its own lock, mirrored to one JSON file
/// per session when a directory is configured.
#[derive(Debug, Default)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

fn valid_id(id: &str) -> bool {
    uuid::Uuid::parse_str(id).is_ok()
}

impl SessionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn on_disk(dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir), sessions: RwLock::default() })
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.json")))
    }

    pub async fn insert(&self, session: Session) -> anyhow::Result<SessionHandle> {
        self.persist(&session).await?;
        let id = session.id.clone();
        let handle = Arc::new(Mutex::new(session));
        self.sessions.write().expect("session map lock").insert(id, handle.clone());
        Ok(handle)
    }

    /// Looks a session up in memory, then on disk.
    pub async fn get(&self, id: &str) -> anyhow::Result<Option<SessionHandle>> {
        if !valid_id(id) {
            return Ok(None);
        }
        if let Some(h) = self.sessions.read().expect("session map lock").get(id) {
            return Ok(Some(h.clone()));
        }
        let Some(path) = self.path(id) else { return Ok(None) };
        let bytes = match tokio::fs::read(&path).await {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let session: Session = serde_json::from_slice(&bytes)?;
        let mut map = self.sessions.write().expect("session map lock");
        Ok(Some(map.entry(id.to_owned()).or_insert_with(|| Arc::new(Mutex::new(session))).clone()))
    }

    /// Writes the session file atomically (temp file then rename).
    pub async fn persist(&self, session: &Session) -> anyhow::Result<()> {
        let Some(path) = self.path(&session.id) else { return Ok(()) };
        let tmp = path.with_extension("json.tmp");
        tokio::fs::write(&tmp, serde_json::to_vec(session)?).await?;
        tokio::fs::rename(&tmp, &path).await?;
        Ok(())
    }
}
