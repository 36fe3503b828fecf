#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ips_core::strategies::DecodeRng;
use ips_core::{
    encode_context, BackendInfo, BootstrapStrategy, DialogueContext, HiddenVector, ScriptedBackend,
    StepOutput, Strategy, StrategyConfig, TinyTransformer, TokenId,
};

pub const EOU: TokenId = 2;

pub fn tiny(seed: u64, vocab_size: usize) -> TinyTransformer {
    TinyTransformer::new(seed, vocab_size, 16, 2, 2).unwrap()
}

pub fn random_context(rng: &mut DecodeRng, vocab_size: usize, max_utterances: usize, max_len: usize) -> DialogueContext {
    let draw = |rng: &mut DecodeRng, n: usize| (rng.uniform() * n as f64) as usize;
    let n = 1 + draw(rng, max_utterances);
    let utterances = (0..n)
        .map(|_| {
            let len = 1 + draw(rng, max_len);
            (0..len)
                .map(|_| loop {
                    let t = draw(rng, vocab_size) as TokenId;
                    if t != EOU {
                        break t;
                    }
                })
                .collect()
        })
        .collect();
    DialogueContext::new(utterances).unwrap()
}

pub fn random_contexts(seed: u64, count: usize, vocab_size: usize) -> Vec<DialogueContext> {
    let mut rng = DecodeRng::new(seed);
    (0..count).map(|_| random_context(&mut rng, vocab_size, 3, 4)).collect()
}

/// IPS config scaled to a small vocabulary.
pub fn small_cfg(strategy: Strategy, vocab_size: usize, max_new_tokens: usize) -> StrategyConfig {
    let k = vocab_size.min(StrategyConfig::default().m);
    StrategyConfig {
        strategy,
        m: k,
        bootstrap_k: vocab_size.min(7),
        contrastive_k: k,
        beam_width: vocab_size.min(4),
        max_new_tokens,
        ..Default::default()
    }
}

/// Greedy-bootstrapped config for fixtures that cannot absorb sampling.
pub fn greedy_bootstrap(mut cfg: StrategyConfig) -> StrategyConfig {
    cfg.bootstrap_strategy = BootstrapStrategy::Greedy;
    cfg
}

pub struct ScriptedFixture {
    pub name: String,
    pub backend: ScriptedBackend,
    pub contexts: Vec<DialogueContext>,
    pub max_new_tokens: usize,
}

/// Tiny-transformer outputs recorded over every continuation of up to
/// `depth` tokens of each context.
pub fn recorded_fixture(seed: u64, vocab_size: usize, contexts: usize, depth: usize) -> ScriptedFixture {
    let source = tiny(seed, vocab_size);
    let contexts = random_contexts(seed ^ 0x5eed, contexts, vocab_size);
    let prefixes = contexts.iter().flat_map(|c| {
        let enc = encode_context(c, EOU).unwrap();
        ips_core::backend::prefix_tree(&enc.tokens, vocab_size, depth)
    });
    ScriptedFixture {
        name: format!("recorded seed={seed} V={vocab_size}"),
        backend: ScriptedBackend::record(&source, prefixes).unwrap(),
        contexts,
        max_new_tokens: depth,
    }
}

fn dist(vocab_size: usize, probs: &[(TokenId, f64)]) -> Vec<f64> {
    let assigned: f64 = probs.iter().map(|(_, p)| p).sum();
    let fill = (1.0 - assigned) / (vocab_size - probs.len()) as f64;
    let mut d = vec![fill; vocab_size];
    for &(t, p) in probs {
        d[t as usize] = p;
    }
    d
}

fn out(probs: Vec<f64>, last: [f64; 3], all: Option<Vec<[f64; 3]>>) -> StepOutput {
    StepOutput {
        probs,
        hidden_last: HiddenVector::new(last.to_vec()),
        hidden_all: all.map(|rows| rows.into_iter().map(|r| HiddenVector::new(r.to_vec())).collect()),
    }
}

pub const DIR_G: TokenId = 4;
pub const DIR_A: TokenId = 5;
pub const DIR_B: TokenId = 1;

/// Context `[3]`, one generated token G with state (1,0,0), utterance state
/// (0,1,0). Next-step candidates: A with state (1,0,0) and probability 0.35,
/// B with state (0,3,0) and probability 0.45. A repeats the response
/// direction and is orthogonal to the context; B is orthogonal to the
/// response and points at the context.
pub fn directional_fixture() -> ScriptedFixture {
    let v = 6;
    let mut table = BTreeMap::new();
    table.insert(
        vec![3, EOU],
        out(dist(v, &[(DIR_G, 0.9)]), [0.0, 1.0, 0.0], Some(vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])),
    );
    table.insert(
        vec![3, EOU, DIR_G],
        out(dist(v, &[(DIR_A, 0.35), (DIR_B, 0.45)]), [1.0, 0.0, 0.0], None),
    );
    for (tok, h) in [(DIR_A, [1.0, 0.0, 0.0]), (DIR_B, [0.0, 3.0, 0.0])] {
        table.insert(vec![3, EOU, DIR_G, tok], out(dist(v, &[(EOU, 0.9)]), h, None));
    }
    // Filler for the continuations the scenario does not care about.
    for prefix in ips_core::backend::prefix_tree(&[3, EOU], v, 2) {
        let last = *prefix.last().unwrap() as f64;
        table
            .entry(prefix)
            .or_insert_with(|| out(dist(v, &[(EOU, 0.5)]), [1.0, last, 1.0], None));
    }
    let info = BackendInfo {
        vocab_size: v,
        hidden_dim: 3,
        eou_token_id: EOU,
    };
    ScriptedFixture {
        name: "directional".into(),
        backend: ScriptedBackend::new(table, info).unwrap(),
        contexts: vec![DialogueContext::new(vec![vec![3]]).unwrap()],
        max_new_tokens: 2,
    }
}

pub fn directional_cfg(strategy: Strategy) -> StrategyConfig {
    StrategyConfig {
        strategy,
        alpha: 0.6,
        m: 2,
        bootstrap_n: 1,
        bootstrap_strategy: BootstrapStrategy::Greedy,
        bootstrap_k: 2,
        contrastive_k: 2,
        beam_width: 2,
        max_new_tokens: 2,
        ..Default::default()
    }
}

pub fn scripted_fixtures() -> Vec<ScriptedFixture> {
    let mut all: Vec<ScriptedFixture> = [(1, 5), (2, 5), (3, 6), (4, 4)]
        .into_iter()
        .map(|(seed, v)| recorded_fixture(seed, v, 3, 3))
        .collect();
    all.push(directional_fixture());
    all
}

pub fn context_json(ctx: &DialogueContext) -> String {
    serde_json::to_string(ctx.utterances()).unwrap()
}

/// Writes contexts as JSONL records `r0`, `r1`, ...
pub fn write_records(dir: &Path, contexts: &[DialogueContext]) -> PathBuf {
    let path = dir.join("records.jsonl");
    let body: String = contexts
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{{\"id\":\"r{i}\",\"context_tokens\":{}}}\n", context_json(c)))
        .collect();
    std::fs::write(&path, body).unwrap();
    path
}

pub fn write_table(dir: &Path, backend: &ScriptedBackend) -> PathBuf {
    let path = dir.join("table.json");
    std::fs::write(&path, serde_json::to_string(&backend.to_table()).unwrap()).unwrap();
    path
}

/// Drops the `elapsed_s` field from every generate output line.
pub fn strip_elapsed(output: &str) -> String {
    output
        .lines()
        .map(|l| {
            let start = l.find(",\"elapsed_s\":").expect("elapsed_s present");
            let end = start + l[start + 1..].find(",\"").expect("field after elapsed_s") + 1;
            format!("{}{}\n", &l[..start], &l[end..])
        })
        .collect()
}
