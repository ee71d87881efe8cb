//! Downloadable documents: JSON (see `schema/export.schema.json`) and plain
//! text.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use qgen_core::{QuestionFacet, SpanSource};

use crate::session::{EditHistory, QuestionRecord, Session};

pub const SCHEMA: &str = include_str!("../schema/export.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportVersion {
    pub text: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportAnswer {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub source: SpanSource,
    #[serde(default)]
    pub history: Vec<ExportVersion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportQuestion {
    pub text: String,
    pub intra_confidence: f64,
    pub beam_score: f64,
    pub history: Vec<ExportVersion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportMember {
    pub answer: ExportAnswer,
    pub questions: Vec<ExportQuestion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportFacet {
    pub stem: String,
    pub inter_confidence: f64,
    pub members: Vec<ExportMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportDocument {
    pub paragraph: String,
    pub generated_at: DateTime<Utc>,
    pub facets: Vec<ExportFacet>,
}

fn versions(h: &EditHistory) -> Vec<ExportVersion> {
    h.versions().iter().map(|v| ExportVersion { text: v.text.clone(), timestamp: v.timestamp }).collect()
}

pub fn export_document(session: &Session, facets: &[QuestionFacet<QuestionRecord>]) -> ExportDocument {
    let facets = facets
        .iter()
        .map(|f| ExportFacet {
            stem: f.stem.clone(),
            inter_confidence: f.inter_confidence,
            members: f
                .members
                .iter()
                .map(|m| {
                    let record = session.answers.iter().find(|a| a.id == m.questions[0].answer_id);
                    ExportMember {
                        answer: ExportAnswer {
                            text: record.map_or_else(|| m.answer.surface.clone(), |a| a.history.current().to_owned()),
                            start: m.answer.char_range.0,
                            end: m.answer.char_range.1,
                            source: m.answer.source,
                            history: record.map(|a| versions(&a.history)).unwrap_or_default(),
                        },
                        questions: m
                            .questions
                            .iter()
                            .map(|q| ExportQuestion {
                                text: q.history.current().to_owned(),
                                intra_confidence: q.generated.intra_confidence,
                                beam_score: q.generated.beam_score,
                                history: versions(&q.history),
                            })
                            .collect(),
                    }
                })
                .collect(),
        })
        .collect();
    ExportDocument {
        paragraph: session.paragraph.raw_text.clone(),
        generated_at: session.generated_at.unwrap_or(session.updated_at),
        facets,
    }
}

/// One `Q: ...\nA: ...\n\n` block per question.
pub fn export_text(doc: &ExportDocument) -> String {
    let mut out = String::new();
    for m in doc.facets.iter().flat_map(|f| &f.members) {
        for q in &m.questions {
            out.push_str(&format!("Q: {}\nA: {}\n\n", q.text, m.answer.text));
        }
    }
    out
}
