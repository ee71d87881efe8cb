use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use qgen_core::{tokenize, validate_custom_span, HeuristicAnnotator};
use qgen_model::filter::{FilterVerdict, SpanScorer};
use qgen_model::qg::{train, QgModel};
use qgen_model::squad::{filter_examples, load_squad, qg_examples};
use qgen_model::{Checkpoint, FilterConfig, QgConfig, Vocabulary};
use qgen_service::{app_state, router, Engine, ServiceConfig};

#[derive(Parser)]
#[command(name = "qgen", version, about = "Answer-aware question generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the question generator on a SQuAD-style file.
    TrainQg {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// 300-d text embeddings; loaded vectors stay frozen.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        validation: Option<PathBuf>,
    },
    /// Generate questions for answer offsets `start:end,...` in a text file.
    Generate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        answers: String,
        /// Optional answerability filter checkpoint.
        #[arg(long)]
        filter: Option<PathBuf>,
    },
    /// Train the answerability filter on a SQuAD-2.0-style file.
    TrainFilter {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Calibrate the threshold on this file after training.
        #[arg(long)]
        validation: Option<PathBuf>,
    },
    /// Fit the answerability threshold and print it.
    CalibrateThreshold {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        /// Store the fitted threshold back into the checkpoint.
        #[arg(long)]
        write: bool,
    },
    /// Run the REST service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::TrainQg { data, config, out, embeddings, validation } => {
            train_qg(data, config, out, embeddings, validation)
        }
        Command::Generate { ckpt, text, answers, filter } => generate(ckpt, text, &answers, filter),
        Command::TrainFilter { data, out, config, validation } => train_filter(data, out, config, validation),
        Command::CalibrateThreshold { ckpt, validation, write } => calibrate(ckpt, validation, write),
        Command::Serve { config, port } => serve(config, port),
    }
}

fn train_qg(
    data: PathBuf,
    config: Option<PathBuf>,
    out: PathBuf,
    embeddings: Option<PathBuf>,
    validation: Option<PathBuf>,
) -> Result<()> {
    let cfg = match config {
        Some(p) => QgConfig::load(&p).with_context(|| format!("reading {}", p.display()))?,
        None => QgConfig::default(),
    };
    let (train_set, skipped) = qg_examples(&load_squad(&data)?, cfg.max_source_len);
    log::info!("{} training examples ({skipped} skipped)", train_set.len());
    let valid_set = match validation {
        Some(p) => Some(qg_examples(&load_squad(&p)?, cfg.max_source_len).0),
        None => None,
    };
    let vocab = Vocabulary::build(train_set.iter().flat_map(|ex| [&ex.source.tokens, &ex.target]), cfg.vocab_size);
    let embeddings = embeddings.or_else(|| cfg.embeddings_path.as_ref().map(PathBuf::from));
    let mut model = QgModel::new(cfg, vocab)?;
    if let Some(p) = embeddings {
        let found = model.load_pretrained_embeddings(&p)?;
        log::info!("loaded {found} pretrained vectors from {}", p.display());
    }
    let report = train(&mut model, &train_set, valid_set.as_deref())?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: loss {loss:.4} lr {}", epoch + 1, report.learning_rates[epoch]);
    }
    model.to_checkpoint()?.save(&out)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct GeneratedOut {
    answer: String,
    start: usize,
    end: usize,
    questions: Vec<QuestionOut>,
}

#[derive(Serialize)]
struct QuestionOut {
    text: String,
    beam_score: f64,
    intra_confidence: f64,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<FilterVerdict>,
}

fn parse_offsets(list: &str) -> Result<Vec<(usize, usize)>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (s, e) = pair.trim().split_once(':').with_context(|| format!("expected start:end, got {pair:?}"))?;
            Ok((s.parse()?, e.parse()?))
        })
        .collect()
}

fn generate(ckpt: PathBuf, text: PathBuf, answers: &str, filter: Option<PathBuf>) -> Result<()> {
    let qg = QgModel::from_checkpoint(&Checkpoint::load(&ckpt)?)?;
    let filter = filter.map(|p| Checkpoint::load(&p).and_then(|c| SpanScorer::from_checkpoint(&c))).transpose()?;
    let raw = std::fs::read_to_string(&text).with_context(|| format!("reading {}", text.display()))?;
    let paragraph = tokenize(&raw)?;
    let offsets = parse_offsets(answers)?;
    if offsets.is_empty() {
        bail!("no answer offsets given");
    }
    let spans = offsets.into_iter().map(|r| validate_custom_span(&paragraph, r)).collect::<Result<Vec<_>, _>>()?;
    let engine = Engine::new(Some(qg), filter, Arc::new(HeuristicAnnotator::new()));
    let results = engine.generate(&paragraph, &spans).expect("model loaded")?;
    let out: Vec<GeneratedOut> = results
        .into_iter()
        .map(|r| GeneratedOut {
            answer: r.answer.surface.clone(),
            start: r.answer.char_range.0,
            end: r.answer.char_range.1,
            questions: r
                .questions
                .into_iter()
                .map(|(q, verdict)| QuestionOut {
                    text: q.text(),
                    beam_score: q.beam_score,
                    intra_confidence: q.intra_confidence,
                    truncated: q.truncated,
                    verdict,
                })
                .collect(),
        })
        .collect();
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn train_filter(data: PathBuf, out: PathBuf, config: Option<PathBuf>, validation: Option<PathBuf>) -> Result<()> {
    let cfg = match config {
        Some(p) => FilterConfig::load(&p)?,
        None => FilterConfig::default(),
    };
    let max_paragraph = cfg.max_seq_len;
    let (train_set, skipped) = filter_examples(&load_squad(&data)?, max_paragraph);
    log::info!("{} training examples ({skipped} skipped)", train_set.len());
    let mut scorer = SpanScorer::for_examples(cfg, &train_set)?;
    let report = scorer.finetune(&train_set)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        log::info!("epoch {}: loss {loss:.4}", epoch + 1);
    }
    let valid = match validation {
        Some(p) => filter_examples(&load_squad(&p)?, max_paragraph).0,
        None => train_set,
    };
    let cal = scorer.calibrate(&valid)?;
    log::info!("threshold {} (accuracy {:.4})", cal.threshold, cal.accuracy);
    scorer.to_checkpoint()?.save(&out)?;
    println!("{}", out.display());
    Ok(())
}

fn calibrate(ckpt: PathBuf, validation: PathBuf, write: bool) -> Result<()> {
    let mut scorer = SpanScorer::from_checkpoint(&Checkpoint::load(&ckpt)?)?;
    let (valid, _) = filter_examples(&load_squad(&validation)?, scorer.config.max_seq_len);
    let cal = scorer.calibrate(&valid)?;
    if cal.degenerate {
        log::warn!("validation set has a single label; threshold is unbounded");
    }
    log::info!("accuracy {:.4}", cal.accuracy);
    if write {
        scorer.to_checkpoint()?.save(&ckpt)?;
    }
    println!("{}", cal.threshold);
    Ok(())
}

fn serve(config: Option<PathBuf>, port: Option<u16>) -> Result<()> {
    let mut cfg = ServiceConfig::load(config.as_deref())?;
    if let Some(p) = port {
        cfg.port = p;
    }
    let state = app_state(&cfg)?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((cfg.host.as_str(), cfg.port)).await?;
        log::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::parse_offsets;

    #[test]
    fn offsets_parse() {
        assert_eq!(parse_offsets("0:4, 10:12").unwrap(), [(0, 4), (10, 12)]);
        assert!(parse_offsets("3-4").is_err());
    }
}
