//! Isotropic and proximal search.
//!
//! At each step the top-`m` tokens of the model distribution are scored by
//! `alpha * prob + (1 - alpha) * penalty(p_value, i_value)`, where
//! `p_value` is the mean cosine between the candidate's hidden state and the
//! response tokens generated so far, and `i_value` is the mean cosine
//! between the response representation and the context utterance
//! representations. Unless `strict_isotropy` is set, the response
//! representation includes the candidate itself.

use alloc::vec::Vec;

use super::sampling::top_k_ids;
use crate::backend::Backend;
use crate::config::StrategyConfig;
use crate::encoding::EncodedContext;
use crate::error::Result;
use crate::scoring::{fold_in, ips_score, isotropic_value, proximal_value};
use crate::types::{CandidateScore, GenerationState, HiddenVector, StepRecord, TokenId};

/// One IPS decision given the distribution `probs` after `prefix`.
/// Returns the chosen token, its trace and its hidden state.
pub(crate) fn ips_select<B: Backend + ?Sized>(
    backend: &B,
    prefix: &[TokenId],
    probs: &[f64],
    state: &GenerationState,
    cfg: &StrategyConfig,
) -> Result<(TokenId, StepRecord, HiddenVector)> {
    let candidates = top_k_ids(probs, cfg.m);
    let hiddens = backend.forward_candidates(prefix, &candidates)?;
    let strict_i = if cfg.strict_isotropy {
        Some(if state.step() == 0 {
            0.0
        } else {
            isotropic_value(state.response_rep(), state.utterance_reps())?
        })
    } else {
        None
    };

    let mut scored = Vec::with_capacity(candidates.len());
    let mut best = 0;
    for (idx, (&token, hidden)) in candidates.iter().zip(&hiddens).enumerate() {
        let prob = probs[token as usize];
        let p_value = proximal_value(hidden, state.generated_hiddens())?;
        let i_value = match strict_i {
            Some(i) => i,
            None => {
                let rep = fold_in(state.hidden_sum(), hidden, state.step() + 1)?;
                isotropic_value(&rep, state.utterance_reps())?
            }
        };
        let score = ips_score(prob, p_value, i_value, cfg);
        scored.push(CandidateScore {
            token,
            prob,
            p_value: Some(p_value),
            i_value: Some(i_value),
            degeneration: None,
            score,
        });
        let b: &CandidateScore = &scored[best];
        if score > b.score || (score == b.score && token < b.token) {
            best = idx;
        }
    }

    let chosen = scored[best].clone();
    let record = StepRecord {
        token: chosen.token,
        prob: chosen.prob,
        p_value: chosen.p_value,
        i_value: chosen.i_value,
        score: Some(chosen.score),
        candidates: scored,
    };
    let hidden = hiddens.into_iter().nth(best).expect("candidate index in range");
    Ok((chosen.token, record, hidden))
}

/// One IPS step after `enc` and the tokens already in `state`.
pub fn ips_step<B: Backend + ?Sized>(
    backend: &B,
    state: &GenerationState,
    enc: &EncodedContext,
    cfg: &StrategyConfig,
) -> Result<(TokenId, StepRecord)> {
    let prefix: Vec<TokenId> = enc.tokens.iter().chain(state.generated()).copied().collect();
    let out = backend.forward(&prefix, false)?;
    let (token, record, _) = ips_select(backend, &prefix, &out.probs, state, cfg)?;
    Ok((token, record))
}
