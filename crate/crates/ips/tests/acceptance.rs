//! Acceptance suite: one PASS/FAIL line per criterion.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use ips::commands::{build_heatmap, cmd_generate, cmd_heatmap};
use ips::heatmap::read_csv;
use ips_core::metrics::distinct_n;
use ips_core::scoring::{
    degeneration_penalty, ips_penalty, ips_score, isotropic_value, proximal_value,
    response_representation,
};
use ips_core::strategies::{beam_search, nucleus_ids, DecodeRng};
use ips_core::{
    encode_context, generate, Backend, DialogueContext, GenerationResult, HiddenVector,
    PenaltyForm, Strategy, StrategyConfig, Tokenizer, TokenId,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > limit {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

// Independent reference arithmetic: explicit loops over raw slices.

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    dot / (na.sqrt() * nb.sqrt())
}

fn mean_vec(rows: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![0.0; rows[0].len()];
    for r in rows {
        for k in 0..out.len() {
            out[k] += r[k];
        }
    }
    out.iter().map(|x| x / rows.len() as f64).collect()
}

fn oracle_p(cand: &[f64], history: &[Vec<f64>]) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    history.iter().map(|h| cos(cand, h)).sum::<f64>() / history.len() as f64
}

fn oracle_i(rep: &[f64], utts: &[Vec<f64>]) -> f64 {
    utts.iter().map(|u| cos(rep, u)).sum::<f64>() / utts.len() as f64
}

fn oracle_score(prob: f64, cand: &[f64], history: &[Vec<f64>], utts: &[Vec<f64>], cfg: &StrategyConfig) -> f64 {
    let mut rows: Vec<&[f64]> = history.iter().map(Vec::as_slice).collect();
    rows.push(cand);
    let p = oracle_p(cand, history);
    let i = oracle_i(&mean_vec(&rows), utts);
    let pen = match cfg.penalty_form {
        PenaltyForm::Difference => p - i,
        PenaltyForm::Beta => (1.0 - cfg.beta) * p - cfg.beta * i,
    };
    cfg.alpha * prob + (1.0 - cfg.alpha) * pen
}

fn oracle_ranked(probs: &[f64]) -> Vec<TokenId> {
    let mut ids: Vec<TokenId> = (0..probs.len() as TokenId).collect();
    for i in 1..ids.len() {
        let mut j = i;
        while j > 0 && {
            let (a, b) = (ids[j - 1], ids[j]);
            probs[b as usize] > probs[a as usize]
        } {
            ids.swap(j - 1, j);
            j -= 1;
        }
    }
    ids
}

fn hv(v: &[f64]) -> HiddenVector {
    HiddenVector::new(v.to_vec())
}

fn random_vec(rng: &mut DecodeRng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.uniform() * 2.0 - 1.0).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            return v;
        }
    }
}

fn random_dist(rng: &mut DecodeRng, v: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..v)
        .map(|_| {
            let x = rng.uniform();
            if x < 0.1 { 0.0 } else { x * x * x }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return vec![1.0 / v as f64; v];
    }
    raw.iter().map(|x| x / total).collect()
}

fn tiny_suite() -> Vec<(Box<dyn Backend>, Vec<DialogueContext>)> {
    (0..5u64)
        .map(|s| {
            let b: Box<dyn Backend> = Box::new(tiny(100 + s, 24));
            (b, random_contexts(200 + s, 4, 24))
        })
        .collect()
}

fn c1_greedy_degeneration() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let check = |backend: &dyn Backend, ctx: &DialogueContext, max: usize, v: usize| -> Result<(), String> {
        let mut ips = small_cfg(Strategy::Ips, v, max);
        ips.alpha = 1.0;
        ips.bootstrap_n = 0;
        let greedy = StrategyConfig { strategy: Strategy::Greedy, ..ips.clone() };
        let a = generate(backend, ctx, &ips).map_err(|e| e.to_string())?;
        let b = generate(backend, ctx, &greedy).map_err(|e| e.to_string())?;
        ensure!(a.tokens == b.tokens, "ips {:?} != greedy {:?}", a.tokens, b.tokens);
        Ok(())
    };
    for (backend, contexts) in tiny_suite() {
        for ctx in &contexts {
            check(backend.as_ref(), ctx, 16, 24)?;
            runs += 1;
        }
    }
    ensure!(runs >= 20, "only {runs} tiny fixtures");
    let mut scripted = 0;
    for fx in scripted_fixtures() {
        for ctx in &fx.contexts {
            check(&fx.backend, ctx, fx.max_new_tokens, fx.backend.info().vocab_size)
                .map_err(|e| format!("{}: {e}", fx.name))?;
            scripted += 1;
        }
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("{runs} tiny + {scripted} scripted runs identical in {took:.2?}"))
}

fn c2_scoring_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = DecodeRng::new(2);
    let mut worst = 0.0f64;
    let mut track = |name: &str, got: f64, want: f64| -> Result<(), String> {
        let err = (got - want).abs();
        worst = worst.max(err);
        ensure!(err <= 1e-9, "{name}: {got} vs oracle {want}");
        Ok(())
    };
    for case in 0..1000 {
        let d = 1 + (rng.uniform() * 8.0) as usize;
        let t = (rng.uniform() * 11.0) as usize;
        let n = 1 + (rng.uniform() * 4.0) as usize;
        let history: Vec<Vec<f64>> = (0..t).map(|_| random_vec(&mut rng, d)).collect();
        let utts: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut rng, d)).collect();
        let cand = random_vec(&mut rng, d);
        let prob = rng.uniform();
        let cfg = StrategyConfig {
            alpha: rng.uniform(),
            beta: rng.uniform(),
            penalty_form: if case % 2 == 0 { PenaltyForm::Difference } else { PenaltyForm::Beta },
            ..Default::default()
        };
        let h: Vec<HiddenVector> = history.iter().map(|v| hv(v)).collect();
        let u: Vec<HiddenVector> = utts.iter().map(|v| hv(v)).collect();
        let c = hv(&cand);
        let e = |r: ips_core::Result<f64>| r.map_err(|e| e.to_string());

        let p = e(proximal_value(&c, &h))?;
        track("proximal_value", p, oracle_p(&cand, &history))?;

        let rep = response_representation(&h, Some(&c)).map_err(|e| e.to_string())?;
        let mut rows: Vec<&[f64]> = history.iter().map(Vec::as_slice).collect();
        rows.push(&cand);
        let want_rep = mean_vec(&rows);
        for k in 0..d {
            track("response_representation", rep[k], want_rep[k])?;
        }

        let i = e(isotropic_value(&rep, &u))?;
        track("isotropic_value", i, oracle_i(&want_rep, &utts))?;

        track("ips_score", ips_score(prob, p, i, &cfg), oracle_score(prob, &cand, &history, &utts, &cfg))?;

        let mut prefix = history.clone();
        prefix.extend(utts.iter().cloned());
        let prefix_h: Vec<HiddenVector> = prefix.iter().map(|v| hv(v)).collect();
        let want_deg = prefix.iter().map(|x| cos(&cand, x)).fold(f64::NEG_INFINITY, f64::max);
        track("degeneration_penalty", e(degeneration_penalty(&c, &prefix_h))?, want_deg)?;
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("1000 inputs, max |err| {worst:.1e} in {took:.2?}"))
}

/// States needed to rescore one generation from scratch.
struct Replay {
    contexts_tokens: Vec<TokenId>,
    utts: Vec<Vec<f64>>,
}

impl Replay {
    fn new(backend: &dyn Backend, ctx: &DialogueContext) -> Self {
        let enc = encode_context(ctx, backend.info().eou_token_id).unwrap();
        let all = backend.forward(&enc.tokens, true).unwrap().hidden_all.unwrap();
        Self {
            utts: enc.eou_positions.iter().map(|&p| all[p].to_vec()).collect(),
            contexts_tokens: enc.tokens,
        }
    }

    fn prefix(&self, generated: &[TokenId]) -> Vec<TokenId> {
        self.contexts_tokens.iter().chain(generated).copied().collect()
    }
}

fn check_ips_steps(backend: &dyn Backend, ctx: &DialogueContext, cfg: &StrategyConfig, result: &GenerationResult) -> Result<usize, String> {
    let replay = Replay::new(backend, ctx);
    let hidden_of = |seq: &[TokenId]| backend.forward(&replay.prefix(seq), false).unwrap().hidden_last.to_vec();
    let mut checked = 0;
    for (t, step) in result.per_step.iter().enumerate() {
        if step.score.is_none() {
            ensure!(t < cfg.bootstrap_n, "step {t} has no score after bootstrap");
            continue;
        }
        let gen = &result.tokens[..t];
        let probs = backend.forward(&replay.prefix(gen), false).unwrap().probs;
        let top: Vec<TokenId> = oracle_ranked(&probs).into_iter().take(cfg.m).collect();
        ensure!(top.contains(&step.token), "step {t}: token {} outside top-{} {top:?}", step.token, cfg.m);
        let history: Vec<Vec<f64>> = (1..=t).map(|j| hidden_of(&gen[..j])).collect();
        let mut best: Option<(f64, TokenId)> = None;
        let mut scores = BTreeMap::new();
        for &c in &top {
            let mut seq = gen.to_vec();
            seq.push(c);
            let s = oracle_score(probs[c as usize], &hidden_of(&seq), &history, &replay.utts, cfg);
            scores.insert(c, s);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, c));
            }
        }
        let chosen = scores[&step.token];
        ensure!(
            scores.values().all(|&s| s <= chosen),
            "step {t}: chose {} (score {chosen}) but oracle best is {:?}",
            step.token,
            best
        );
        checked += 1;
    }
    Ok(checked)
}

fn c3_containment() -> Outcome {
    let start = Instant::now();
    let mut steps = 0;
    for (backend, contexts) in tiny_suite() {
        for (i, ctx) in contexts.iter().enumerate() {
            for seed in 0..2 {
                let cfg = StrategyConfig {
                    seed,
                    max_new_tokens: 12,
                    penalty_form: if i % 2 == 0 { PenaltyForm::Difference } else { PenaltyForm::Beta },
                    ..small_cfg(Strategy::Ips, 24, 12)
                };
                let r = generate(backend.as_ref(), ctx, &cfg).map_err(|e| e.to_string())?;
                steps += check_ips_steps(backend.as_ref(), ctx, &cfg, &r)?;
            }
        }
    }
    for fx in scripted_fixtures() {
        let v = fx.backend.info().vocab_size;
        let cfg = if fx.name == "directional" {
            directional_cfg(Strategy::Ips)
        } else {
            greedy_bootstrap(StrategyConfig { bootstrap_n: 1, ..small_cfg(Strategy::Ips, v, fx.max_new_tokens) })
        };
        for ctx in &fx.contexts {
            let r = generate(&fx.backend, ctx, &cfg).map_err(|e| e.to_string())?;
            steps += check_ips_steps(&fx.backend, ctx, &cfg, &r).map_err(|e| format!("{}: {e}", fx.name))?;
        }
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!("{steps} IPS steps contained and maximal in {took:.2?}"))
}

fn c4_bootstrap() -> Outcome {
    let backend = tiny(7, 32);
    let contexts = random_contexts(77, 3, 32);
    let mut groups_checked = 0;
    for ctx in &contexts {
        let cfg = StrategyConfig { max_new_tokens: 8, ..Default::default() };
        ensure!(cfg.bootstrap_n == 2 && cfg.bootstrap_k == 7, "defaults changed");
        let replay = Replay::new(&backend, ctx);
        let mut groups: BTreeMap<Vec<TokenId>, Vec<GenerationResult>> = BTreeMap::new();
        for seed in 0..120 {
            let r = generate(&backend, ctx, &StrategyConfig { seed, ..cfg.clone() }).map_err(|e| e.to_string())?;
            let boot = r.tokens.len().min(2);
            for t in 0..boot {
                let probs = backend.forward(&replay.prefix(&r.tokens[..t]), false).unwrap().probs;
                let top7: Vec<TokenId> = oracle_ranked(&probs).into_iter().take(7).collect();
                ensure!(top7.contains(&r.tokens[t]), "seed {seed} step {}: {} outside top-7", t + 1, r.tokens[t]);
            }
            groups.entry(r.tokens[..boot].to_vec()).or_default().push(r);
        }
        for runs in groups.values().filter(|g| g.len() > 1) {
            let first = &runs[0];
            for other in &runs[1..] {
                ensure!(other.tokens == first.tokens, "tokens differ after a shared bootstrap: {:?} vs {:?}", first.tokens, other.tokens);
                for (a, b) in first.per_step.iter().zip(&other.per_step).skip(2) {
                    let bits = |x: Option<f64>| x.map(f64::to_bits);
                    ensure!(
                        a.prob.to_bits() == b.prob.to_bits()
                            && bits(a.score) == bits(b.score)
                            && bits(a.p_value) == bits(b.p_value)
                            && bits(a.i_value) == bits(b.i_value),
                        "trace bits differ after a shared bootstrap"
                    );
                }
            }
            groups_checked += 1;
        }
    }
    ensure!(groups_checked > 0, "no two seeds shared a bootstrap prefix");
    Ok(format!("{groups_checked} shared-bootstrap groups bit-identical from step 3"))
}

fn exhaustive_best(backend: &dyn Backend, prefix: &mut Vec<TokenId>, depth: usize, lp: f64, eou: TokenId, seq: &mut Vec<TokenId>, best: &mut Option<(f64, Vec<TokenId>)>) {
    let probs = backend.forward(prefix, false).unwrap().probs;
    for (t, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let t = t as TokenId;
        let next = lp + p.ln();
        seq.push(t);
        if t == eou || depth == 1 {
            let better = match best {
                None => true,
                Some((b, s)) => next > *b || (next == *b && *seq < *s),
            };
            if better {
                *best = Some((next, seq.clone()));
            }
        } else {
            prefix.push(t);
            exhaustive_best(backend, prefix, depth - 1, next, eou, seq, best);
            prefix.pop();
        }
        seq.pop();
    }
}

fn c5_beam_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for seed in 0..8 {
        let fx = recorded_fixture(500 + seed, 4, 3, 3);
        for ctx in &fx.contexts {
            let enc = encode_context(ctx, EOU).unwrap();
            let got = beam_search(&fx.backend, &enc, 64, 3).map_err(|e| e.to_string())?;
            let mut best = None;
            exhaustive_best(&fx.backend, &mut enc.tokens.clone(), 3, 0.0, EOU, &mut Vec::new(), &mut best);
            let (lp, want) = best.unwrap();
            ensure!(got.tokens == want, "{}: beam {:?} vs optimum {want:?} (log-prob {lp})", fx.name, got.tokens);
            cases += 1;
        }
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("{cases} fixtures match enumeration in {took:.2?}"))
}

fn c6_nucleus() -> Outcome {
    let mut rng = DecodeRng::new(6);
    for case in 0..1000 {
        let v = 1 + (rng.uniform() * 20.0) as usize;
        let probs = random_dist(&mut rng, v);
        let p = if case % 10 == 0 { 1.0 } else { 0.01 + 0.99 * rng.uniform() };
        let ranked = oracle_ranked(&probs);
        let mut size = v;
        for k in 1..=v {
            let mass: f64 = ranked[..k].iter().fold(0.0, |acc, &t| acc + probs[t as usize]);
            if mass >= p {
                size = k;
                break;
            }
        }
        let got = nucleus_ids(&probs, p);
        ensure!(got == ranked[..size], "case {case}: {got:?} vs {:?} (p={p})", &ranked[..size]);
    }
    Ok("1000 distributions match enumeration".into())
}

fn c7_distinct() -> Outcome {
    let mut rng = DecodeRng::new(7);
    for case in 0..100 {
        let count = (rng.uniform() * 8.0) as usize;
        let vocab = 2 + (rng.uniform() * 6.0) as u32;
        let corpus: Vec<Vec<TokenId>> = (0..count)
            .map(|_| (0..(rng.uniform() * 12.0) as usize).map(|_| (rng.uniform() * vocab as f64) as TokenId).collect())
            .collect();
        for n in [1, 2, 4] {
            let mut set = HashSet::new();
            let mut total = 0usize;
            for r in &corpus {
                for start in 0..r.len().saturating_sub(n - 1) {
                    if start + n <= r.len() {
                        set.insert(r[start..start + n].to_vec());
                        total += 1;
                    }
                }
            }
            let want = if total == 0 { 0.0 } else { set.len() as f64 / total as f64 };
            let got = distinct_n(&corpus, n);
            ensure!(got == want, "corpus {case} n={n}: {got} vs {want}");
        }
    }
    Ok("100 corpora, n = 1, 2, 4 exact".into())
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

fn c8_beta_equivalence() -> Outcome {
    let mut rng = DecodeRng::new(8);
    for case in 0..200 {
        let alpha = 0.05 + 0.9 * rng.uniform();
        let diff = StrategyConfig { alpha, penalty_form: PenaltyForm::Difference, ..Default::default() };
        let beta = StrategyConfig { alpha, beta: 0.5, penalty_form: PenaltyForm::Beta, ..Default::default() };
        let norm = alpha / (alpha + (1.0 - alpha) / 2.0);
        let diff_norm = StrategyConfig { alpha: norm, ..diff.clone() };
        let m = 2 + (rng.uniform() * 8.0) as usize;
        let cands: Vec<(f64, f64, f64)> = (0..m)
            .map(|_| (rng.uniform(), rng.uniform() * 2.0 - 1.0, rng.uniform() * 2.0 - 1.0))
            .collect();
        for &(_, p, i) in &cands {
            ensure!(
                ips_penalty(p, i, &beta) == ips_penalty(p, i, &diff) / 2.0,
                "case {case}: beta penalty is not half the difference penalty"
            );
        }
        let beta_scores: Vec<f64> = cands.iter().map(|&(pr, p, i)| ips_score(pr, p, i, &beta)).collect();
        let diff_scores: Vec<f64> = cands.iter().map(|&(pr, p, i)| ips_score(pr, p, i, &diff_norm)).collect();
        ensure!(argmax(&beta_scores) == argmax(&diff_scores), "case {case}: argmax differs");
    }
    Ok("200 candidate sets: half penalties, same argmax".into())
}

fn c9_directional() -> Outcome {
    let cfg = directional_cfg(Strategy::Ips);
    let a = ips_score(0.35, 1.0, 0.0, &cfg);
    let b = ips_score(0.45, 0.0, 1.0, &cfg);
    ensure!(a > b, "score(A) {a} <= score(B) {b} at p/i = (1,0) vs (0,1)");

    let fx = directional_fixture();
    let ctx = &fx.contexts[0];
    let ips = generate(&fx.backend, ctx, &cfg).map_err(|e| e.to_string())?;
    let greedy = generate(&fx.backend, ctx, &directional_cfg(Strategy::Greedy)).map_err(|e| e.to_string())?;
    ensure!(ips.tokens == [DIR_G, DIR_A], "IPS produced {:?}", ips.tokens);
    ensure!(greedy.tokens == [DIR_G, DIR_B], "greedy produced {:?}", greedy.tokens);
    let step = &ips.per_step[1];
    let cand = |t| step.candidates.iter().find(|c| c.token == t).unwrap();
    let (ca, cb) = (cand(DIR_A), cand(DIR_B));
    ensure!(ca.p_value == Some(1.0) && ca.i_value == Some(0.0), "A has p={:?} i={:?}", ca.p_value, ca.i_value);
    ensure!(cb.p_value == Some(0.0), "B has p={:?}", cb.p_value);
    Ok(format!(
        "scores A {a:.2} > B {b:.2}; fixture: IPS picks A (p=1, i=0), greedy picks B (p=0, i={:.4})",
        cb.i_value.unwrap()
    ))
}

fn c10_heatmap() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let backend = tiny(10, 24);
    let input = write_records(dir.path(), &random_contexts(1010, 3, 24));
    let cfg = StrategyConfig { strategy: Strategy::Greedy, max_new_tokens: 10, ..small_cfg(Strategy::Greedy, 24, 10) };
    let mut cells = 0;
    for id in ["r0", "r1", "r2"] {
        let mut buf = Vec::new();
        cmd_heatmap(&input, &backend, &Tokenizer::Passthrough, &cfg, id, &mut buf).map_err(|e| e.to_string())?;
        let (labels, parsed) = read_csv(&buf[..]).map_err(|e| e.to_string())?;
        let map = build_heatmap(&input, &backend, &Tokenizer::Passthrough, &cfg, id).map_err(|e| e.to_string())?;
        ensure!(labels == map.labels, "labels differ");
        let l = labels.len();
        for i in 0..l {
            ensure!((parsed[i][i] - 1.0).abs() <= 1e-9, "{id}: diagonal {i} is {}", parsed[i][i]);
            ensure!((map.matrix[i][i] - 1.0).abs() <= 1e-9, "{id}: computed diagonal {i} is {}", map.matrix[i][i]);
            for j in 0..l {
                ensure!(parsed[i][j] == parsed[j][i], "{id}: CSV not symmetric at ({i},{j})");
                ensure!(map.matrix[i][j] == map.matrix[j][i], "{id}: matrix not symmetric at ({i},{j})");
                ensure!((parsed[i][j] - map.matrix[i][j]).abs() <= 1e-6, "{id}: ({i},{j}) round-trip error");
                cells += 1;
            }
        }
    }
    Ok(format!("3 heatmaps, {cells} cells symmetric and within 1e-6"))
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let backend = tiny(11, 24);
    let input = write_records(dir.path(), &random_contexts(1111, 6, 24));
    let mut lines = 0;
    for strategy in Strategy::ALL {
        let cfg = StrategyConfig { seed: 42, ..small_cfg(strategy, 24, 12) };
        let run = || -> Result<String, String> {
            let mut buf = Vec::new();
            cmd_generate(&input, &backend, &Tokenizer::Passthrough, &cfg, &mut buf).map_err(|e| e.to_string())?;
            String::from_utf8(buf).map_err(|e| e.to_string())
        };
        let (a, b) = (strip_elapsed(&run()?), strip_elapsed(&run()?));
        ensure!(a == b, "{} output differs between runs", strategy.name());
        lines += a.lines().count();
    }
    Ok(format!("{} strategies, {lines} lines byte-identical", Strategy::ALL.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("greedy degeneration", c1_greedy_degeneration),
        ("scoring oracles", c2_scoring_oracles),
        ("candidate containment", c3_containment),
        ("bootstrap contract", c4_bootstrap),
        ("beam vs exhaustive", c5_beam_exhaustive),
        ("nucleus minimality", c6_nucleus),
        ("distinct-n oracle", c7_distinct),
        ("beta-form equivalence", c8_beta_equivalence),
        ("directional behavior", c9_directional),
        ("heatmap round trip", c10_heatmap),
        ("end-to-end determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {why}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
