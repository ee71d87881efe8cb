//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

#[path = "../common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use qgen_core::{
    decode_bio, encode_bio, group_by_stem, inter_confidence, intra_confidence, review_paragraph, stem_key, tokenize,
    AnswerSpan, Confidence, FlagKind, SpanSource,
};
use qgen_model::filter::{calibrate_threshold, score_hidden, threshold_accuracy, SpanScorer};
use qgen_model::qg::{beam_search, token_accuracy, train, BeamConfig, QgModel, StepModel};
use qgen_model::synthetic::{answerability_task, copy_task};
use qgen_model::vocab::{BOS, EOS, PAD};
use qgen_model::{sparsemax, sparsemax_backward, FilterConfig, QgConfig, Vocabulary};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn within(t: Instant, limit: Duration) -> Outcome {
    let e = t.elapsed();
    if e > limit {
        return Err(format!("took {e:.2?}, limit {limit:?}"));
    }
    Ok(format!("{e:.2?}"))
}

// ---------------------------------------------------------------- sparsemax

/// Projection onto the simplex by enumerating candidate supports and keeping
/// the feasible point closest to `z`.
fn projection_oracle(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (support.iter().map(|&i| z[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let p: Vec<f64> = (0..n).map(|i| if mask & (1 << i) != 0 { z[i] - tau } else { 0.0 }).collect();
        if p.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let dist: f64 = p.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, p));
        }
    }
    best.expect("the full support is always feasible").1
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sparsemax_oracle() -> Outcome {
    let t = Instant::now();
    let worked: [(&[f64], &[f64]); 3] =
        [(&[0.0, 0.0], &[0.5, 0.5]), (&[3.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), (&[0.5, 0.1], &[0.7, 0.3])];
    for (z, want) in worked {
        let got = sparsemax(z).map_err(|e| e.to_string())?;
        ensure!(linf(&got, want) <= 1e-6, "{z:?} -> {got:?}, expected {want:?}");
        ensure!(linf(&projection_oracle(z), want) <= 1e-6, "oracle disagrees on {z:?}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let scale = [0.1, 1.0, 5.0][rng.gen_range(0..3)];
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
        let err = linf(&sparsemax(&z).map_err(|e| e.to_string())?, &projection_oracle(&z));
        worst = worst.max(err);
        ensure!(err <= 1e-6, "L-inf {err:e} on {z:?}");
    }
    let time = within(t, Duration::from_secs(10))?;
    Ok(format!("1000 vectors + 3 worked cases, worst L-inf {worst:.1e}, {time}"))
}

fn sparsemax_gradient() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let support = |p: &[f64]| p.iter().map(|&v| v > 0.0).collect::<Vec<_>>();
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 100 {
        let n = rng.gen_range(2..=8);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = sparsemax(&z).unwrap();
        let base = support(&p);
        let f = |v: &[f64]| sparsemax(v).unwrap().iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let mut numeric = Vec::with_capacity(n);
        let mut stable = true;
        for i in 0..n {
            let (mut up, mut down) = (z.clone(), z.clone());
            up[i] += h;
            down[i] -= h;
            stable &= support(&sparsemax(&up).unwrap()) == base && support(&sparsemax(&down).unwrap()) == base;
            numeric.push((f(&up) - f(&down)) / (2.0 * h));
        }
        if !stable {
            continue;
        }
        let analytic = sparsemax_backward(&p, &g).unwrap();
        for (a, b) in analytic.iter().zip(&numeric) {
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
            worst = worst.max(rel);
            ensure!(rel <= 1e-3, "relative error {rel:e} at z={z:?}");
        }
        checked += 1;
    }
    let time = within(t, Duration::from_secs(10))?;
    Ok(format!("100 support-stable points, worst relative error {worst:.1e}, {time}"))
}

// ---------------------------------------------------------------- generator

fn copy_training() -> Outcome {
    let cfg = QgConfig {
        embedding_dim: 16,
        encoder_layers: 1,
        hidden_size: 32,
        dropout: 0.0,
        learning_rate: 1.0,
        epochs: 8,
        batch_size: 16,
        vocab_size: 50,
        embeddings_frozen: false,
        tag_embedding_dim: 8,
        max_decode_len: 8,
        ..QgConfig::default()
    };
    let train_set = copy_task(500, 11);
    let test_set = copy_task(100, 12);
    let vocab = Vocabulary::build(train_set.iter().flat_map(|ex| [&ex.source.tokens, &ex.target]), 50);
    let t = Instant::now();
    let mut model = QgModel::new(cfg, vocab).map_err(|e| e.to_string())?;
    train(&mut model, &train_set, None).map_err(|e| e.to_string())?;
    let acc = token_accuracy(&model, &test_set).map_err(|e| e.to_string())?;
    let time = within(t, Duration::from_secs(300))?;
    ensure!(acc >= 0.9, "token accuracy {acc:.3}");

    let beam = model.beam_config();
    let mut oov = 0;
    for ex in &test_set {
        let encoded = model.encode(&ex.source).map_err(|e| e.to_string())?;
        let best = model.beam_search(&encoded, &beam).map_err(|e| e.to_string())?.remove(0);
        oov += best
            .tokens
            .iter()
            .filter(|tok| model.vocab.get(tok).is_none() && ex.target.contains(tok) && ex.source.tokens.contains(tok))
            .count();
    }
    ensure!(oov > 0, "no out-of-vocabulary token was copied");
    Ok(format!("token accuracy {acc:.3}, {oov} out-of-vocabulary copies, {time}"))
}

/// Next-token distribution is a fixed pseudo-random function of the history.
struct RandomTree {
    seed: u64,
    tokens: Vec<usize>,
    size: usize,
}

impl RandomTree {
    fn probs(&self, history: &[usize]) -> Vec<f64> {
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for &t in history {
            h = h.wrapping_mul(0x100_0000_01b3).wrapping_add(t as u64 + 7);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let w: Vec<f64> = self.tokens.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        let mut p = vec![0.0; self.size];
        for (&t, w) in self.tokens.iter().zip(w) {
            p[t] = w / total;
        }
        p
    }
}

impl StepModel for RandomTree {
    type State = Vec<usize>;

    fn initial(&self) -> Vec<usize> {
        Vec::new()
    }

    fn step(&self, history: &Vec<usize>, prev: usize) -> qgen_model::Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
        let mut next = history.clone();
        if prev != BOS {
            next.push(prev);
        }
        let p = self.probs(&next);
        Ok((next, p, vec![1.0]))
    }
}

/// Best finished sequence over every sequence of at most `max_len` steps,
/// the end step included.
fn enumerate(tree: &RandomTree, max_len: usize) -> (Vec<usize>, f64) {
    fn walk(tree: &RandomTree, prefix: &mut Vec<usize>, score: f64, max_len: usize, best: &mut (Vec<usize>, f64)) {
        let p = tree.probs(prefix);
        let done = score + p[EOS].ln();
        if done > best.1 {
            *best = (prefix.clone(), done);
        }
        if prefix.len() + 1 >= max_len {
            return;
        }
        for &t in &tree.tokens {
            if t != EOS {
                prefix.push(t);
                walk(tree, prefix, score + p[t].ln(), max_len, best);
                prefix.pop();
            }
        }
    }
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    walk(tree, &mut Vec::new(), 0.0, max_len, &mut best);
    best
}

fn beam_oracle() -> Outcome {
    for seed in 0..50u64 {
        let vocab = 2 + (seed as usize % 3);
        let max_len = 1 + (seed as usize % 4);
        let tokens: Vec<usize> = std::iter::once(EOS).chain(4..4 + vocab - 1).collect();
        let tree = RandomTree { seed, tokens, size: 4 + vocab };
        let width = vocab.pow(max_len as u32);
        let found = beam_search(&tree, &BeamConfig::new(width, max_len)).map_err(|e| e.to_string())?;
        let (tokens, score) = enumerate(&tree, max_len);
        ensure!(found[0].finished, "seed {seed}: unfinished");
        ensure!(found[0].tokens == tokens, "seed {seed}: {:?} vs {tokens:?}", found[0].tokens);
        ensure!(found[0].score == score, "seed {seed}: score {} vs {score}", found[0].score);
        ensure!(
            found.iter().all(|h| !h.tokens.contains(&PAD) && !h.tokens.contains(&BOS)),
            "seed {seed}: reserved token emitted"
        );
    }
    Ok("50 parameterizations, vocab 2-4, length 1-4, exact".into())
}

// ---------------------------------------------------------------- grouping

fn confidence_formulas() -> Outcome {
    let half = intra_confidence(0.0).map_err(|e| e.to_string())?;
    let three_quarters = intra_confidence(3f64.ln()).map_err(|e| e.to_string())?;
    ensure!((half - 0.5).abs() <= 1e-12, "intra(0) = {half}");
    ensure!((three_quarters - 0.75).abs() <= 1e-12, "intra(ln 3) = {three_quarters}");
    let inter = inter_confidence(&[0.2, 0.9, 0.5]).map_err(|e| e.to_string())?;
    ensure!(inter[0] == 0.0 && inter[1] == 1.0, "endpoints {inter:?}");
    ensure!((inter[2] - 3.0 / 7.0).abs() <= 1e-12, "interior {}", inter[2]);
    let flat = inter_confidence(&[0.4, 0.4, 0.4]).map_err(|e| e.to_string())?;
    ensure!(flat == [1.0, 1.0, 1.0], "degenerate {flat:?}");
    Ok("intra(0)=0.5, intra(ln 3)=0.75, inter endpoints 0/1, degenerate all 1".into())
}

struct Scored(f64);

impl Confidence for Scored {
    fn intra_confidence(&self) -> f64 {
        self.0
    }
}

fn faceting() -> Outcome {
    let p = tokenize("The switching network uses two switches .").map_err(|e| e.to_string())?;
    let a = AnswerSpan::from_tokens(&p, 1, 1, SpanSource::Custom).map_err(|e| e.to_string())?;
    let b = AnswerSpan::from_tokens(&p, 5, 5, SpanSource::Custom).map_err(|e| e.to_string())?;
    ensure!(a.surface == "switching" && b.surface == "switches", "spans {a:?} {b:?}");
    let facets = group_by_stem(vec![(a, vec![Scored(0.7)]), (b, vec![Scored(0.4)])]).map_err(|e| e.to_string())?;
    ensure!(facets.len() == 1, "{} facets", facets.len());
    ensure!(facets[0].stem == "switch", "stem {:?}", facets[0].stem);
    ensure!(facets[0].members.len() == 2, "{} members", facets[0].members.len());
    ensure!(stem_key("switching") == "switch" && stem_key("switches") == "switch", "stem keys differ");
    Ok("\"switching\" and \"switches\" share facet \"switch\"".into())
}

// ---------------------------------------------------------------- filter

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scans every allowed `(i, j)` and keeps the first maximum.
fn brute_force(hidden: &[Vec<f64>], s: &[f64], e: &[f64], para: std::ops::Range<usize>, cap: usize) -> (f64, f64, Option<(usize, usize)>) {
    let null = dot(s, &hidden[0]) + dot(e, &hidden[0]);
    let mut best = (f64::NEG_INFINITY, None);
    for i in para.clone() {
        for j in para.clone() {
            if j < i || j - i >= cap {
                continue;
            }
            let v = dot(s, &hidden[i]) + dot(e, &hidden[j]);
            if best.1.is_none() || v > best.0 {
                best = (v, Some((i, j)));
            }
        }
    }
    (null, best.0, best.1)
}

fn filter_score_oracle() -> Outcome {
    let hidden = vec![vec![1.0, 1.0], vec![2.0, 0.0], vec![0.0, 2.0]];
    let w = score_hidden(&hidden, &[1.0, 0.0], &[0.0, 1.0], 1..3, 30).map_err(|e| e.to_string())?;
    ensure!(w.s_null == 2.0 && w.s_best == 4.0 && w.best_span == Some((1, 2)), "worked example {w:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..500 {
        let len = rng.gen_range(2..=8);
        let h = rng.gen_range(1..=4);
        let hidden: Vec<Vec<f64>> = (0..len).map(|_| (0..h).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let s: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let start = rng.gen_range(1..len);
        let para = start..rng.gen_range(start + 1..=len);
        let cap = rng.gen_range(1..=8);
        let got = score_hidden(&hidden, &s, &e, para.clone(), cap).map_err(|e| e.to_string())?;
        let want = brute_force(&hidden, &s, &e, para, cap);
        ensure!((got.s_null, got.s_best, got.best_span) == want, "case {case}: {got:?} vs {want:?}");
    }

    // the same through a model's own hidden states
    let scorer = SpanScorer::for_examples(
        FilterConfig { hidden_size: 4, embedding_dim: 4, vocab_size: 40, max_seq_len: 8, dropout: 0.0, ..FilterConfig::default() },
        &answerability_task(4, 5),
    )
    .map_err(|e| e.to_string())?;
    let q: Vec<String> = ["where", "?"].map(String::from).into();
    let p: Vec<String> = ["a", "b", "c", "d"].map(String::from).into();
    let packed = scorer.pack(&q, &p).map_err(|e| e.to_string())?;
    let hidden = scorer.hidden(&packed).map_err(|e| e.to_string())?;
    let got = scorer.score_packed(&packed).map_err(|e| e.to_string())?;
    let want = brute_force(&hidden, scorer.start_vector(), scorer.end_vector(), packed.paragraph_range(), scorer.config.max_span_len);
    ensure!((got.s_null, got.s_best, got.best_span) == want, "model scores {got:?} vs {want:?}");
    Ok("worked example + 500 random tensors + model hidden states, exact".into())
}

fn calibration_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut degenerate) = (0, 0);
    for set in 0.. {
        if checked == 100 {
            break;
        }
        let n = rng.gen_range(1..=30);
        let coarse = set % 2 == 0;
        let samples: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let d = if coarse { rng.gen_range(-3..=3) as f64 } else { rng.gen_range(-5.0..5.0) };
                (d, rng.gen_bool(0.5))
            })
            .collect();
        let cal = calibrate_threshold(&samples).map_err(|e| e.to_string())?;
        let answerable = samples.iter().filter(|s| s.1).count();
        if answerable == 0 || answerable == n {
            // single-class sets take the documented degenerate path instead
            ensure!(cal.degenerate && cal.threshold == f64::INFINITY, "set {set}: single class not flagged");
            degenerate += 1;
            continue;
        }
        ensure!(!cal.degenerate, "set {set}: two classes flagged degenerate");
        // accuracy only changes at sample values, so these cover every outcome
        let sweep = samples
            .iter()
            .map(|s| s.0)
            .chain([f64::NEG_INFINITY, f64::INFINITY])
            .map(|v| threshold_accuracy(&samples, v))
            .fold(0.0, f64::max);
        let got = threshold_accuracy(&samples, cal.threshold);
        ensure!(got == sweep, "set {set}: accuracy {got} at {} vs sweep {sweep}", cal.threshold);
        ensure!(cal.accuracy == got, "set {set}: reported {} vs {got}", cal.accuracy);
        checked += 1;
    }
    Ok(format!("100 two-class sets match the exhaustive sweep; {degenerate} single-class sets flagged degenerate"))
}

fn filter_learnability() -> Outcome {
    let cfg = FilterConfig {
        hidden_size: 32,
        embedding_dim: 16,
        max_seq_len: 32,
        dropout: 0.0,
        epochs: 10,
        learning_rate: 1e-2,
        vocab_size: 200,
        ..FilterConfig::default()
    };
    let train_set = answerability_task(200, 1);
    let validation = answerability_task(100, 2);
    let t = Instant::now();
    let mut model = SpanScorer::for_examples(cfg, &train_set).map_err(|e| e.to_string())?;
    model.finetune(&train_set).map_err(|e| e.to_string())?;
    let cal = model.calibrate(&validation).map_err(|e| e.to_string())?;
    let time = within(t, Duration::from_secs(120))?;
    ensure!(cal.accuracy >= 0.9, "validation accuracy {:.3}", cal.accuracy);
    Ok(format!("validation accuracy {:.3} at V = {:.3}, {time}", cal.accuracy, cal.threshold))
}

// ---------------------------------------------------------------- text

fn bio_round_trip() -> Outcome {
    let p = tokenize("In 1869 Mohandas Gandhi was born in Porbandar , a coastal town on the Kathiawar peninsula of British India .")
        .map_err(|e| e.to_string())?;
    ensure!(p.len() == 20, "{} tokens", p.len());
    let mut n = 0;
    for first in 0..20 {
        for last in first..20 {
            let span = AnswerSpan::from_tokens(&p, first, last, SpanSource::Custom).map_err(|e| e.to_string())?;
            let back = decode_bio(&encode_bio(&p, &span).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure!(back == (first, last), "({first}, {last}) -> {back:?}");
            n += 1;
        }
    }
    Ok(format!("{n} spans"))
}

#[derive(serde::Deserialize)]
struct ReviewCase {
    text: String,
    flags: Vec<ReviewExpected>,
}

#[derive(serde::Deserialize)]
struct ReviewExpected {
    kind: FlagKind,
    start: usize,
    end: usize,
}

fn review_recall() -> Outcome {
    let cases: Vec<ReviewCase> =
        serde_json::from_str(include_str!("../../../core/tests/fixtures/review_cases.json")).map_err(|e| e.to_string())?;
    ensure!(cases.len() == 50, "{} strings", cases.len());
    let (mut total, mut hit) = (0, 0);
    for c in &cases {
        let flags = review_paragraph(&c.text).map_err(|e| e.to_string())?;
        for want in &c.flags {
            total += 1;
            hit += usize::from(flags.iter().any(|f| f.kind == want.kind && f.char_range == (want.start, want.end)));
        }
    }
    ensure!(hit == total, "{hit}/{total} annotated spans flagged exactly");
    Ok(format!("{hit}/{total} annotated spans over 50 strings"))
}

fn config_defaults() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("empty.toml");
    std::fs::write(&path, "").map_err(|e| e.to_string())?;
    let q = QgConfig::load(&path).map_err(|e| e.to_string())?;
    ensure!(q == QgConfig::default(), "empty file differs from the defaults");
    let got = (q.encoder_layers, q.decoder_layers, q.hidden_size, q.embedding_dim, q.epochs, q.batch_size);
    ensure!(got == (2, 1, 600, 300, 20, 64), "generator defaults {got:?}");
    ensure!(q.dropout == 0.3 && q.learning_rate == 0.1, "dropout {} lr {}", q.dropout, q.learning_rate);
    let f = FilterConfig::load(&path).map_err(|e| e.to_string())?;
    ensure!(f.epochs == 3 && f.learning_rate == 3e-5 && f.batch_size == 12, "filter defaults {f:?}");
    Ok("generator 2/1 layers, 600 hidden, 300-d, dropout 0.3, lr 0.1, 20 epochs, batch 64; filter 3 epochs, 3e-5, batch 12".into())
}

// ---------------------------------------------------------------- service

fn api_contract() -> Outcome {
    use axum::http::StatusCode;
    use common::*;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ckpt = dir.path().join("qg.ckpt");
    toy_qg().to_checkpoint().and_then(|c| c.save(&ckpt)).map_err(|e| e.to_string())?;
    let cfg = qgen_service::ServiceConfig {
        qg_checkpoint: Some(ckpt),
        session_dir: Some(dir.path().join("sessions")),
        ..Default::default()
    };
    let state = qgen_service::app_state(&cfg).map_err(|e| e.to_string())?;
    let app = qgen_service::router(state);
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async move {
        let text = "Edison switched on the first switch in 1869. See https://example.com for more.";
        let r = call(&app, "POST", "/v1/sessions", Some(json!({ "text": text }))).await;
        ensure!(r.status == StatusCode::CREATED, "create: {}", r.status);
        let id = r.json["session_id"].as_str().unwrap_or_default().to_owned();
        ensure!(r.json["flags"].as_array().map(Vec::len) == Some(1), "review flags {}", r.json["flags"]);
        let base = format!("/v1/sessions/{id}");

        let r = call(&app, "GET", &format!("{base}/candidates?kind=named_entity"), None).await;
        ensure!(r.status == StatusCode::CONFLICT, "candidates before review: {}", r.status);
        let (s, e) = span_of(text, " See https://example.com for more.");
        let edit = json!({ "edits": [{ "start": s, "end": e, "replacement": "" }] });
        let r = call(&app, "PATCH", &format!("{base}/text"), Some(edit)).await;
        ensure!(r.status == StatusCode::OK && r.json["flags"] == json!([]), "review edit: {}", r.text);

        let r = call(&app, "GET", &format!("{base}/candidates?kind=named_entity"), None).await;
        ensure!(r.status == StatusCode::OK, "candidates: {}", r.text);
        let mut spans: Vec<(u64, u64)> = r.json.as_array().unwrap().iter().map(|a| {
            (a["char_range"][0].as_u64().unwrap(), a["char_range"][1].as_u64().unwrap())
        }).collect();
        let clean = "Edison switched on the first switch in 1869.";
        let year = span_of(clean, "1869");
        spans.push((year.0 as u64, year.1 as u64));
        let r = call(&app, "POST", &format!("{base}/generate"), Some(json!({ "spans": spans }))).await;
        ensure!(r.status == StatusCode::OK, "generate: {}", r.text);
        let all = question_ids(&r.json["facets"]);
        ensure!(!all.is_empty(), "no questions generated");

        let r = call(&app, "PUT", &format!("{base}/knobs"), Some(json!({ "intra": 1.0, "inter": 1.0 }))).await;
        ensure!(question_ids(&r.json).is_empty(), "knobs at 1 still show questions");
        let r = call(&app, "PUT", &format!("{base}/knobs"), Some(json!({ "intra": 0.0, "inter": 0.0 }))).await;
        ensure!(question_ids(&r.json) == all, "knob round trip lost questions");

        let r = call(&app, "PUT", &format!("{base}/questions/{}", all[0]), Some(json!({ "text": "When was it built ?" }))).await;
        ensure!(r.json.as_array().map(Vec::len) == Some(2), "edit history {}", r.text);

        let r = call(&app, "GET", &format!("{base}/export?format=json"), None).await;
        let schema: serde_json::Value = serde_json::from_str(qgen_service::export::SCHEMA).unwrap();
        ensure!(jsonschema::is_valid(&schema, &r.json), "export does not validate");
        let doc: qgen_service::export::ExportDocument = serde_json::from_value(r.json).map_err(|e| e.to_string())?;
        let exported = doc.facets.iter().flat_map(|f| &f.members).flat_map(|m| &m.questions).count();
        ensure!(exported == all.len(), "export holds {exported} of {} questions", all.len());
        let r = call(&app, "GET", &format!("{base}/export?format=text"), None).await;
        ensure!(r.text.matches("Q: ").count() == all.len(), "text export blocks");

        let edit = json!({ "edits": [{ "start": 0, "end": 6, "replacement": "Tesla" }] });
        call(&app, "PATCH", &format!("{base}/text"), Some(edit)).await;
        let r = call(&app, "GET", &format!("{base}/facets"), None).await;
        ensure!(r.json == json!([]), "text edit left results behind");
        Ok(format!("lifecycle over {} questions, schema valid, knobs non-destructive, edits invalidate", all.len()))
    })
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("sparsemax matches simplex projection oracle", sparsemax_oracle),
        ("sparsemax gradient check", sparsemax_gradient),
        ("copy-task training", copy_training),
        ("beam search matches exhaustive search", beam_oracle),
        ("confidence formulas", confidence_formulas),
        ("filter scoring matches brute force", filter_score_oracle),
        ("threshold calibration optimality", calibration_optimality),
        ("filter learnability", filter_learnability),
        ("BIO round trip", bio_round_trip),
        ("stem faceting", faceting),
        ("review recall", review_recall),
        ("config defaults", config_defaults),
        ("API contract", api_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
