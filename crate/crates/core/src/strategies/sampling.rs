//! Single-distribution decoding rules: greedy, top-k and nucleus.
//!
//! Orderings by probability always break ties toward the lower token id.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::rng::DecodeRng;
use crate::error::{Error, Result};
use crate::types::TokenId;

fn by_prob_desc(probs: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        probs[b]
            .partial_cmp(&probs[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    }
}

/// Token ids sorted by descending probability.
pub fn ranked_ids(probs: &[f64]) -> Vec<TokenId> {
    let mut ids: Vec<usize> = (0..probs.len()).collect();
    ids.sort_by(by_prob_desc(probs));
    ids.into_iter().map(|i| i as TokenId).collect()
}

/// The `k` most probable ids, most probable first.
pub fn top_k_ids(probs: &[f64], k: usize) -> Vec<TokenId> {
    let mut ids = ranked_ids(probs);
    ids.truncate(k);
    ids
}

/// Smallest most-probable-first prefix whose mass reaches `p`. When rounding
/// keeps the total below `p`, every id is returned.
pub fn nucleus_ids(probs: &[f64], p: f64) -> Vec<TokenId> {
    let ranked = ranked_ids(probs);
    let mut mass = 0.0;
    for (n, &id) in ranked.iter().enumerate() {
        mass += probs[id as usize];
        if mass >= p {
            return ranked[..=n].to_vec();
        }
    }
    ranked
}

/// Argmax, lowest id on ties.
pub fn greedy_step(probs: &[f64]) -> TokenId {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best as TokenId
}

/// Draws from `ids` with weights `probs[id]`, renormalized over the set.
pub fn sample_from(ids: &[TokenId], probs: &[f64], rng: &mut DecodeRng) -> TokenId {
    let total: f64 = ids.iter().map(|&i| probs[i as usize]).sum();
    let target = rng.uniform() * total;
    let mut cum = 0.0;
    let mut last_positive = ids[0];
    for &id in ids {
        let w = probs[id as usize];
        cum += w;
        if w > 0.0 {
            last_positive = id;
        }
        if target < cum {
            return id;
        }
    }
    last_positive
}

pub fn topk_step(probs: &[f64], k: usize, rng: &mut DecodeRng) -> Result<TokenId> {
    if k == 0 || k > probs.len() {
        return Err(Error::Range("k"));
    }
    Ok(sample_from(&top_k_ids(probs, k), probs, rng))
}

pub fn nucleus_step(probs: &[f64], p: f64, rng: &mut DecodeRng) -> Result<TokenId> {
    if !(p > 0.0 && p <= 1.0) || probs.is_empty() {
        return Err(Error::Range("p"));
    }
    Ok(sample_from(&nucleus_ids(probs, p), probs, rng))
}
