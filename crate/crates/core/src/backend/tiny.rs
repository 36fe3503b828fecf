//! A small causal transformer language model with seeded random weights.
//!
//! Pre-norm blocks (multi-head causal self-attention, then a GELU MLP of
//! width `4 * d`), sinusoidal positions, a final layer norm, and an output
//! projection. All arithmetic goes through
//! `libm` so outputs are bit-identical across platforms.
//!
//! A full forward is computed position by position through a key/value
//! cache. Candidate batches reuse the prefix cache and run the same
//! per-position step, so they match sequential forwards exactly.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_candidates, check_prefix, softmax, Backend, BackendInfo, StepOutput};
use crate::error::{Error, Result};
use crate::types::{HiddenVector, TokenId};

/// End-of-utterance id used by every tiny transformer.
pub const TINY_EOU: TokenId = 2;

const LN_EPS: f64 = 1e-5;
/// Standard deviation of the logits for a unit-variance final state.
const LOGIT_SCALE: f64 = 2.5;

/// Row-major `rows x cols` matrix applied as `x * W`.
#[derive(Debug, Clone)]
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Self {
        // uniform(-a, a) has standard deviation a / sqrt(3)
        let a = std * libm::sqrt(3.0);
        let data = (0..rows * cols).map(|_| rng.random_range(-a..a)).collect();
        Self { rows, cols, data }
    }

    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(self.row(r)) {
                *o += xr * w;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Block {
    wq: Matrix,
    wk: Matrix,
    wv: Matrix,
    wo: Matrix,
    w_up: Matrix,
    b_up: Vec<f64>,
    w_down: Matrix,
    b_down: Vec<f64>,
}

/// Per-layer keys and values of the positions processed so far.
/// One layer's key and value rows for a single position.
type LayerKv = (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, Default)]
struct KvCache {
    keys: Vec<Vec<Vec<f64>>>,
    values: Vec<Vec<Vec<f64>>>,
}

impl KvCache {
    fn new(layers: usize) -> Self {
        Self {
            keys: vec![Vec::new(); layers],
            values: vec![Vec::new(); layers],
        }
    }

    fn len(&self) -> usize {
        self.keys.first().map_or(0, Vec::len)
    }

    fn commit(&mut self, kv: Vec<(Vec<f64>, Vec<f64>)>) {
        for (layer, (k, v)) in kv.into_iter().enumerate() {
            self.keys[layer].push(k);
            self.values[layer].push(v);
        }
    }
}

#[derive(Debug, Clone)]
pub struct TinyTransformer {
    info: BackendInfo,
    heads: usize,
    embedding: Matrix,
    blocks: Vec<Block>,
    unembedding: Matrix,
}

impl TinyTransformer {
    pub fn new(
        seed: u64,
        vocab_size: usize,
        hidden_dim: usize,
        layers: usize,
        heads: usize,
    ) -> Result<Self> {
        if heads == 0 || hidden_dim == 0 || !hidden_dim.is_multiple_of(heads) {
            return Err(Error::Argument(alloc::format!(
                "hidden_dim {hidden_dim} is not divisible by {heads} heads"
            )));
        }
        if vocab_size <= TINY_EOU as usize {
            return Err(Error::Argument(alloc::format!(
                "vocab_size must exceed the EOU id {TINY_EOU}"
            )));
        }
        let info = BackendInfo {
            vocab_size,
            hidden_dim,
            eou_token_id: TINY_EOU,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = hidden_dim;
        let std = 1.0 / libm::sqrt(d as f64);
        let embedding = Matrix::random(&mut rng, vocab_size, d, 1.0);
        let blocks = (0..layers)
            .map(|_| Block {
                wq: Matrix::random(&mut rng, d, d, std),
                wk: Matrix::random(&mut rng, d, d, std),
                wv: Matrix::random(&mut rng, d, d, std),
                wo: Matrix::random(&mut rng, d, d, std),
                w_up: Matrix::random(&mut rng, d, 4 * d, std),
                b_up: Matrix::random(&mut rng, 1, 4 * d, 0.1).data,
                w_down: Matrix::random(&mut rng, 4 * d, d, 0.5 * std),
                b_down: Matrix::random(&mut rng, 1, d, 0.1).data,
            })
            .collect();
        let unembedding = Matrix::random(&mut rng, d, vocab_size, LOGIT_SCALE * std);
        Ok(Self {
            info,
            heads,
            embedding,
            blocks,
            unembedding,
        })
    }

    /// Processes one token at `cache.len()` without mutating the cache.
    /// Returns the final-layer hidden state and the new per-layer key/value.
    fn step(&self, cache: &KvCache, token: TokenId) -> (Vec<f64>, Vec<LayerKv>) {
        let d = self.info.hidden_dim;
        let pos = cache.len();
        let mut x: Vec<f64> = self
            .embedding
            .row(token as usize)
            .iter()
            .zip(positional(pos, d))
            .map(|(e, p)| e + p)
            .collect();
        let mut new_kv = Vec::with_capacity(self.blocks.len());
        for (layer, block) in self.blocks.iter().enumerate() {
            let h = layer_norm(&x);
            let q = block.wq.apply(&h);
            let k = block.wk.apply(&h);
            let v = block.wv.apply(&h);
            let attn = self.attend(&q, &k, &v, &cache.keys[layer], &cache.values[layer]);
            for (xi, a) in x.iter_mut().zip(block.wo.apply(&attn)) {
                *xi += a;
            }
            let h = layer_norm(&x);
            let mut up = block.w_up.apply(&h);
            for (u, b) in up.iter_mut().zip(&block.b_up) {
                *u = gelu(*u + b);
            }
            for ((xi, m), b) in x.iter_mut().zip(block.w_down.apply(&up)).zip(&block.b_down) {
                *xi += m + b;
            }
            new_kv.push((k, v));
        }
        (layer_norm(&x), new_kv)
    }

    fn attend(
        &self,
        q: &[f64],
        k: &[f64],
        v: &[f64],
        past_k: &[Vec<f64>],
        past_v: &[Vec<f64>],
    ) -> Vec<f64> {
        let d = q.len();
        let hd = d / self.heads;
        let scale = 1.0 / libm::sqrt(hd as f64);
        let mut out = vec![0.0; d];
        for head in 0..self.heads {
            let r = head * hd..(head + 1) * hd;
            let keys = past_k.iter().map(Vec::as_slice).chain(core::iter::once(k));
            let scores: Vec<f64> = keys
                .map(|key| dot(&q[r.clone()], &key[r.clone()]) * scale)
                .collect();
            let weights = softmax(&scores);
            let values = past_v.iter().map(Vec::as_slice).chain(core::iter::once(v));
            for (w, val) in weights.iter().zip(values) {
                for (o, x) in out[r.clone()].iter_mut().zip(&val[r.clone()]) {
                    *o += w * x;
                }
            }
        }
        out
    }

    fn probs(&self, hidden: &[f64]) -> Vec<f64> {
        softmax(&self.unembedding.apply(hidden))
    }

    /// Runs the prefix through the model, returning the filled cache and the
    /// hidden state at every position.
    fn prefill(&self, prefix: &[TokenId]) -> (KvCache, Vec<Vec<f64>>) {
        let mut cache = KvCache::new(self.blocks.len());
        let mut hiddens = Vec::with_capacity(prefix.len());
        for &t in prefix {
            let (h, kv) = self.step(&cache, t);
            cache.commit(kv);
            hiddens.push(h);
        }
        (cache, hiddens)
    }
}

impl Backend for TinyTransformer {
    fn info(&self) -> BackendInfo {
        self.info
    }

    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput> {
        check_prefix(&self.info, prefix)?;
        let (_, hiddens) = self.prefill(prefix);
        let last = hiddens.last().cloned().unwrap_or_default();
        Ok(StepOutput {
            probs: self.probs(&last),
            hidden_last: HiddenVector::new(last),
            hidden_all: want_all_hidden
                .then(|| hiddens.into_iter().map(HiddenVector::new).collect()),
        })
    }

    fn forward_candidates(
        &self,
        prefix: &[TokenId],
        candidates: &[TokenId],
    ) -> Result<Vec<HiddenVector>> {
        check_candidates(&self.info, prefix, candidates)?;
        let (cache, _) = self.prefill(prefix);
        Ok(candidates
            .iter()
            .map(|&c| HiddenVector::new(self.step(&cache, c).0))
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn layer_norm(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv = 1.0 / libm::sqrt(var + LN_EPS);
    x.iter().map(|v| (v - mean) * inv).collect()
}

fn gelu(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
    0.5 * x * (1.0 + libm::tanh(C * (x + 0.044_715 * x * x * x)))
}

fn positional(pos: usize, d: usize) -> impl Iterator<Item = f64> {
    (0..d).map(move |i| {
        let freq = libm::pow(10_000.0, -((i / 2 * 2) as f64) / d as f64);
        let angle = pos as f64 * freq;
        if i % 2 == 0 {
            libm::sin(angle)
        } else {
            libm::cos(angle)
        }
    })
}
