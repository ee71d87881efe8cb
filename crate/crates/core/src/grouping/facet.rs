use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{inter_confidence, stem_key};
use crate::answers::AnswerSpan;
use crate::question::GeneratedQuestion;
use crate::{Error, Result};

pub trait Confidence {
    fn intra_confidence(&self) -> f64;
}

impl Confidence for GeneratedQuestion {
    fn intra_confidence(&self) -> f64 {
        self.intra_confidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetMember<Q> {
    pub answer: AnswerSpan,
    pub inter_confidence: f64,
    /// Sorted by intra-question confidence, highest first.
    pub questions: Vec<Q>,
}

/// Answers sharing one stemmed surface form, with their questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionFacet<Q> {
    pub stem: String,
    /// Highest inter-question confidence among the members.
    pub inter_confidence: f64,
    pub members: Vec<FacetMember<Q>>,
}

impl<Q> QuestionFacet<Q> {
    fn first_offset(&self) -> usize {
        self.members.iter().map(|m| m.answer.char_range.0).min().unwrap_or(usize::MAX)
    }

    pub fn question_count(&self) -> usize {
        self.members.iter().map(|m| m.questions.len()).sum()
    }
}

/// Filter knob settings, both in `[0, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    pub intra: f64,
    pub inter: f64,
}

impl Knobs {
    pub fn new(intra: f64, inter: f64) -> Result<Self> {
        for v in [intra, inter] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidKnob(v));
            }
        }
        Ok(Self { intra, inter })
    }
}

fn desc(a: f64, b: f64) -> Ordering {
    b.total_cmp(&a)
}

fn sort_questions<Q: Confidence>(questions: &mut [Q]) {
    questions.sort_by(|a, b| desc(a.intra_confidence(), b.intra_confidence()));
}

fn sort_members<Q>(members: &mut [FacetMember<Q>]) {
    members.sort_by(|a, b| {
        desc(a.inter_confidence, b.inter_confidence).then(a.answer.char_range.cmp(&b.answer.char_range))
    });
}

fn sort_facets<Q>(facets: &mut [QuestionFacet<Q>]) {
    facets.sort_by(|a, b| {
        desc(a.inter_confidence, b.inter_confidence).then(a.first_offset().cmp(&b.first_offset()))
    });
}

/// Groups answers by [`stem_key`], computing inter-question confidences over
/// every answer that has at least one question. Answers without questions are
/// dropped.
pub fn group_by_stem<Q: Confidence>(results: Vec<(AnswerSpan, Vec<Q>)>) -> Result<Vec<QuestionFacet<Q>>> {
    let mut answers: Vec<(AnswerSpan, Vec<Q>)> = results.into_iter().filter(|(_, qs)| !qs.is_empty()).collect();
    if answers.is_empty() {
        return Ok(Vec::new());
    }
    let best: Vec<f64> = answers
        .iter()
        .map(|(_, qs)| qs.iter().map(Confidence::intra_confidence).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let inter = inter_confidence(&best)?;

    let mut facets: Vec<QuestionFacet<Q>> = Vec::new();
    for ((answer, mut questions), inter_confidence) in answers.drain(..).zip(inter) {
        if answer.surface.trim().is_empty() {
            return Err(Error::EmptyInput);
        }
        sort_questions(&mut questions);
        let stem = stem_key(&answer.surface);
        let member = FacetMember { answer, inter_confidence, questions };
        match facets.iter_mut().find(|f| f.stem == stem) {
            Some(f) => {
                f.inter_confidence = f.inter_confidence.max(inter_confidence);
                f.members.push(member);
            }
            None => facets.push(QuestionFacet { stem, inter_confidence, members: vec![member] }),
        }
    }
    for f in &mut facets {
        sort_members(&mut f.members);
    }
    sort_facets(&mut facets);
    Ok(facets)
}

/// Filtered view: drops questions below `knobs.intra`, answers below
/// `knobs.inter`, and anything left empty. Stored scores are not recomputed.
pub fn apply_knobs<Q: Confidence + Clone>(facets: &[QuestionFacet<Q>], knobs: Knobs) -> Vec<QuestionFacet<Q>> {
    let mut out: Vec<QuestionFacet<Q>> = facets
        .iter()
        .filter_map(|f| {
            let members: Vec<FacetMember<Q>> = f
                .members
                .iter()
                .filter(|m| m.inter_confidence >= knobs.inter)
                .filter_map(|m| {
                    let questions: Vec<Q> =
                        m.questions.iter().filter(|q| q.intra_confidence() >= knobs.intra).cloned().collect();
                    (!questions.is_empty()).then(|| FacetMember {
                        answer: m.answer.clone(),
                        inter_confidence: m.inter_confidence,
                        questions,
                    })
                })
                .collect();
            let inter = members.iter().map(|m| m.inter_confidence).fold(f64::NEG_INFINITY, f64::max);
            (!members.is_empty()).then(|| QuestionFacet { stem: f.stem.clone(), inter_confidence: inter, members })
        })
        .collect();
    sort_facets(&mut out);
    out
}
