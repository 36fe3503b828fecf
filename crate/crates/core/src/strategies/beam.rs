use alloc::vec::Vec;
use core::cmp::Ordering;

use super::sampling::top_k_ids;
use crate::backend::Backend;
use crate::encoding::EncodedContext;
use crate::error::{Error, Result};
use crate::types::{GenerationResult, StepRecord, StopReason, TokenId};

#[derive(Debug, Clone)]
struct Hypothesis {
    tokens: Vec<TokenId>,
    probs: Vec<f64>,
    log_prob: f64,
    finished: bool,
}

impl Hypothesis {
    /// Higher log-probability first, then the lexicographically smaller sequence.
    fn rank(&self, other: &Self) -> Ordering {
        other
            .log_prob
            .partial_cmp(&self.log_prob)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.tokens.cmp(&other.tokens))
    }
}

/// Beam search over summed log-probabilities.
///
/// Hypotheses ending in EOU are frozen but keep competing for beam slots.
/// Search ends when every beam is frozen or `max_new_tokens` is reached;
/// the result is the best hypothesis in the final beam, finished or not.
pub fn beam_search<B: Backend + ?Sized>(
    backend: &B,
    enc: &EncodedContext,
    width: usize,
    max_new_tokens: usize,
) -> Result<GenerationResult> {
    if width == 0 {
        return Err(Error::Range("beam_width"));
    }
    let eou = backend.info().eou_token_id;
    let mut beams = alloc::vec![Hypothesis {
        tokens: Vec::new(),
        probs: Vec::new(),
        log_prob: 0.0,
        finished: false,
    }];
    let mut prefix = enc.tokens.clone();

    for _ in 0..max_new_tokens {
        if beams.iter().all(|b| b.finished) {
            break;
        }
        let mut pool = Vec::with_capacity(beams.len() * width);
        for beam in beams {
            if beam.finished {
                pool.push(beam);
                continue;
            }
            prefix.truncate(enc.tokens.len());
            prefix.extend_from_slice(&beam.tokens);
            let out = backend.forward(&prefix, false)?;
            for id in top_k_ids(&out.probs, width) {
                let p = out.probs[id as usize];
                if p <= 0.0 {
                    continue;
                }
                let mut next = beam.clone();
                next.tokens.push(id);
                next.probs.push(p);
                next.log_prob += libm::log(p);
                next.finished = id == eou;
                pool.push(next);
            }
        }
        pool.sort_by(Hypothesis::rank);
        pool.truncate(width);
        beams = pool;
    }

    let best = beams.into_iter().next().expect("beam is never empty");
    let mut cumulative = 0.0;
    let per_step = best
        .tokens
        .iter()
        .zip(&best.probs)
        .map(|(&t, &p)| {
            cumulative += libm::log(p);
            StepRecord {
                score: Some(cumulative),
                ..StepRecord::plain(t, p)
            }
        })
        .collect();
    Ok(GenerationResult {
        stop_reason: if best.finished {
            StopReason::Eou
        } else {
            StopReason::MaxLen
        },
        tokens: best.tokens,
        text: None,
        per_step,
        elapsed: 0.0,
    })
}
