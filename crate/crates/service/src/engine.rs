use std::sync::Arc;

use anyhow::Context;

use qgen_core::{AnswerSpan, Annotator, GeneratedQuestion, HeuristicAnnotator, HttpAnnotator, Paragraph};
use qgen_model::filter::{is_answerable, FilterVerdict, SpanScorer};
use qgen_model::qg::{generate_questions_with, BeamConfig, QgModel};
use qgen_model::Checkpoint;

use crate::config::ServiceConfig;

/// Loaded models and the annotator; shared read-only across requests.
pub struct Engine {
    pub qg: Option<QgModel>,
    pub filter: Option<SpanScorer>,
    /// Answerability threshold in effect.
    pub threshold: f64,
    pub annotator: Arc<dyn Annotator>,
    pub beam: Option<BeamConfig>,
}

/// Questions for one answer, each with the filter verdict when a filter is
/// loaded.
#[derive(Debug, Clone)]
pub struct AnswerQuestions {
    pub answer: AnswerSpan,
    pub questions: Vec<(GeneratedQuestion, Option<FilterVerdict>)>,
}

impl Engine {
    pub fn new(qg: Option<QgModel>, filter: Option<SpanScorer>, annotator: Arc<dyn Annotator>) -> Self {
        let threshold = filter.as_ref().map_or(f64::INFINITY, |f| f.threshold);
        let beam = qg.as_ref().map(QgModel::beam_config);
        Self { qg, filter, threshold, annotator, beam }
    }

    pub fn from_config(cfg: &ServiceConfig) -> anyhow::Result<Self> {
        let qg = cfg
            .qg_checkpoint
            .as_ref()
            .map(|p| {
                let ckpt = Checkpoint::load(p).with_context(|| format!("reading {}", p.display()))?;
                QgModel::from_checkpoint(&ckpt).with_context(|| format!("loading {}", p.display()))
            })
            .transpose()?;
        let filter = cfg
            .filter_checkpoint
            .as_ref()
            .map(|p| {
                let ckpt = Checkpoint::load(p).with_context(|| format!("reading {}", p.display()))?;
                SpanScorer::from_checkpoint(&ckpt).with_context(|| format!("loading {}", p.display()))
            })
            .transpose()?;
        let annotator: Arc<dyn Annotator> = match &cfg.annotator_url {
            Some(url) => Arc::new(HttpAnnotator::new(url)),
            None => Arc::new(HeuristicAnnotator::new()),
        };
        let mut engine = Self::new(qg, filter, annotator);
        if let Some(v) = cfg.threshold {
            engine.threshold = v;
        }
        if let (Some(width), Some(beam)) = (cfg.beam_width, engine.beam.as_mut()) {
            beam.width = width;
        }
        Ok(engine)
    }

    /// Generates questions per span and scores each with the filter.
    /// Returns `None` when no question generator is loaded.
    pub fn generate(&self, paragraph: &Paragraph, spans: &[AnswerSpan]) -> Option<qgen_model::Result<Vec<AnswerQuestions>>> {
        let qg = self.qg.as_ref()?;
        let beam = self.beam.clone().unwrap_or_else(|| qg.beam_config());
        Some((|| {
            let generated = generate_questions_with(qg, paragraph, spans, &beam)?;
            generated
                .into_iter()
                .map(|(answer, questions)| {
                    let questions = questions
                        .into_iter()
                        // an immediate end token leaves nothing to show
                        .filter(|q| !q.tokens.is_empty())
                        .map(|q| {
                            let verdict = match &self.filter {
                                Some(f) => Some(is_answerable(f.score(&q.tokens, &paragraph.tokens)?, self.threshold)),
                                None => None,
                            };
                            Ok((q, verdict))
                        })
                        .collect::<qgen_model::Result<Vec<_>>>()?;
                    Ok(AnswerQuestions { answer, questions })
                })
                .collect()
        })())
    }
}
