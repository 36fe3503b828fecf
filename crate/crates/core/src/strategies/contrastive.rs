//! Contrastive search baseline: among the top-k tokens pick the one
//! maximizing `(1 - alpha) * prob - alpha * max_j cos(h_candidate, h_j)`
//! over every prefix position `j` (context and generated tokens).

use alloc::vec::Vec;

use super::sampling::top_k_ids;
use crate::backend::Backend;
use crate::encoding::EncodedContext;
use crate::error::{Error, Result};
use crate::scoring::{contrastive_score, degeneration_penalty};
use crate::types::{CandidateScore, GenerationState, HiddenVector, StepRecord, TokenId};

pub(crate) fn contrastive_select<B: Backend + ?Sized>(
    backend: &B,
    prefix: &[TokenId],
    probs: &[f64],
    prefix_hiddens: &[HiddenVector],
    k: usize,
    alpha: f64,
) -> Result<(TokenId, StepRecord, HiddenVector)> {
    let candidates = top_k_ids(probs, k);
    let hiddens = backend.forward_candidates(prefix, &candidates)?;
    let mut scored = Vec::with_capacity(candidates.len());
    let mut best = 0;
    for (idx, (&token, hidden)) in candidates.iter().zip(&hiddens).enumerate() {
        let prob = probs[token as usize];
        let penalty = degeneration_penalty(hidden, prefix_hiddens)?;
        let score = contrastive_score(prob, penalty, alpha);
        scored.push(CandidateScore {
            token,
            prob,
            p_value: None,
            i_value: None,
            degeneration: Some(penalty),
            score,
        });
        let b: &CandidateScore = &scored[best];
        if score > b.score || (score == b.score && token < b.token) {
            best = idx;
        }
    }
    let chosen = &scored[best];
    let record = StepRecord {
        token: chosen.token,
        prob: chosen.prob,
        p_value: None,
        i_value: None,
        score: Some(chosen.score),
        candidates: scored.clone(),
    };
    let hidden = hiddens.into_iter().nth(best).expect("candidate index in range");
    Ok((record.token, record, hidden))
}

/// One contrastive-search step after `enc` and the tokens in `state`.
pub fn contrastive_step<B: Backend + ?Sized>(
    backend: &B,
    state: &GenerationState,
    enc: &EncodedContext,
    k: usize,
    alpha_cs: f64,
) -> Result<(TokenId, StepRecord)> {
    let prefix: Vec<TokenId> = enc.tokens.iter().chain(state.generated()).copied().collect();
    let out = backend.forward(&prefix, true)?;
    let all = out
        .hidden_all
        .ok_or_else(|| Error::Protocol("backend omitted hidden_all".into()))?;
    let (token, record, _) = contrastive_select(backend, &prefix, &out.probs, &all, k, alpha_cs)?;
    Ok((token, record))
}
