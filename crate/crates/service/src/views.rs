//! Response shapes and the faceted view over a session's results.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use qgen_core::{apply_knobs, group_by_stem, AnswerSpan, Knobs, QuestionFacet, SpanSource};

use crate::session::{QuestionRecord, Session};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerView {
    pub id: String,
    /// Current text (the latest edit, or the original surface).
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub token_range: (usize, usize),
    pub source: SpanSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionView {
    pub id: String,
    pub text: String,
    pub intra_confidence: f64,
    pub beam_score: f64,
    pub truncated: bool,
    pub edited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberView {
    pub answer: AnswerView,
    pub inter_confidence: f64,
    pub questions: Vec<QuestionView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetView {
    pub stem: String,
    pub inter_confidence: f64,
    pub members: Vec<MemberView>,
}

/// Groups every stored (unfiltered) question by answer stem.
pub fn all_facets(session: &Session) -> qgen_core::Result<Vec<QuestionFacet<QuestionRecord>>> {
    let mut by_answer: HashMap<&str, Vec<QuestionRecord>> = HashMap::new();
    for q in &session.questions {
        by_answer.entry(q.answer_id.as_str()).or_default().push(q.clone());
    }
    let grouped: Vec<(AnswerSpan, Vec<QuestionRecord>)> = session
        .answers
        .iter()
        .map(|a| (a.span.clone(), by_answer.remove(a.id.as_str()).unwrap_or_default()))
        .collect();
    group_by_stem(grouped)
}

/// The knob-filtered facets a user currently sees.
pub fn visible_facets(session: &Session) -> qgen_core::Result<Vec<QuestionFacet<QuestionRecord>>> {
    Ok(apply_knobs(&all_facets(session)?, session.knobs))
}

pub fn facet_views(session: &Session, facets: &[QuestionFacet<QuestionRecord>]) -> Vec<FacetView> {
    facets
        .iter()
        .map(|f| FacetView {
            stem: f.stem.clone(),
            inter_confidence: f.inter_confidence,
            members: f
                .members
                .iter()
                .map(|m| {
                    let answer_id = &m.questions[0].answer_id;
                    let text = session
                        .answers
                        .iter()
                        .find(|a| &a.id == answer_id)
                        .map_or_else(|| m.answer.surface.clone(), |a| a.history.current().to_owned());
                    MemberView {
                        answer: AnswerView {
                            id: answer_id.clone(),
                            text,
                            start: m.answer.char_range.0,
                            end: m.answer.char_range.1,
                            token_range: m.answer.token_range,
                            source: m.answer.source,
                        },
                        inter_confidence: m.inter_confidence,
                        questions: m.questions.iter().map(question_view).collect(),
                    }
                })
                .collect(),
        })
        .collect()
}

pub fn question_view(q: &QuestionRecord) -> QuestionView {
    QuestionView {
        id: q.id.clone(),
        text: q.history.current().to_owned(),
        intra_confidence: q.generated.intra_confidence,
        beam_score: q.generated.beam_score,
        truncated: q.generated.truncated,
        edited: q.history.versions().len() > 1,
    }
}

/// Knobs accepted by the API, validated into [`Knobs`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KnobsBody {
    pub intra: f64,
    pub inter: f64,
}

impl TryFrom<KnobsBody> for Knobs {
    type Error = qgen_core::Error;

    fn try_from(b: KnobsBody) -> qgen_core::Result<Self> {
        Knobs::new(b.intra, b.inter)
    }
}
