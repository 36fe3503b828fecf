//! Diversity metrics and hidden-state diagnostics of generated responses.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::encoding::EncodedContext;
use crate::error::{Error, Result};
use crate::scoring::{cosine, isotropic_value, response_representation};
use crate::types::{GenerationResult, HiddenVector, TokenId};

/// Corpus-level distinct-n: unique n-grams over total n-grams, pooled
/// across all responses. Zero when there are no n-grams.
pub fn distinct_n(responses: &[Vec<TokenId>], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut unique = BTreeSet::new();
    let mut total = 0usize;
    for r in responses {
        for gram in r.windows(n) {
            unique.insert(gram);
            total += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        unique.len() as f64 / total as f64
    }
}

/// Pairwise cosine matrix; symmetric by construction.
pub fn similarity_heatmap(hiddens: &[HiddenVector]) -> Result<Vec<Vec<f64>>> {
    let n = hiddens.len();
    let mut m = alloc::vec![alloc::vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = cosine(&hiddens[i], &hiddens[i])?;
        for j in i + 1..n {
            let c = cosine(&hiddens[i], &hiddens[j])?;
            m[i][j] = c;
            m[j][i] = c;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub p_value: Option<f64>,
    pub i_value: Option<f64>,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Mean cosine over unordered pairs of response token states; 1 for a
    /// single token.
    pub mean_intra_response_cosine: f64,
    /// Mean cosine between the mean response state and each utterance
    /// representation.
    pub mean_context_cosine: f64,
    pub per_step_trace: Vec<TraceEntry>,
}

/// `hiddens` are the states of the response's content tokens (EOU removed).
pub fn diagnostics(
    result: &GenerationResult,
    hiddens: &[HiddenVector],
    utterance_reps: &[HiddenVector],
) -> Result<Diagnostics> {
    if hiddens.is_empty() {
        return Err(Error::Argument("response has no content tokens".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..hiddens.len() {
        for j in i + 1..hiddens.len() {
            total += cosine(&hiddens[i], &hiddens[j])?;
            pairs += 1;
        }
    }
    let mean_intra_response_cosine = if pairs == 0 { 1.0 } else { total / pairs as f64 };
    let rep = response_representation(hiddens, None)?;
    Ok(Diagnostics {
        mean_intra_response_cosine,
        mean_context_cosine: isotropic_value(&rep, utterance_reps)?,
        per_step_trace: result
            .per_step
            .iter()
            .map(|r| TraceEntry {
                p_value: r.p_value,
                i_value: r.i_value,
                score: r.score,
            })
            .collect(),
    })
}

/// Hidden states of a full context + response sequence.
#[derive(Debug, Clone)]
pub struct SequenceStates {
    /// Context tokens followed by response tokens.
    pub tokens: Vec<TokenId>,
    pub hiddens: Vec<HiddenVector>,
    pub context_len: usize,
    pub eou: TokenId,
    pub eou_positions: Vec<usize>,
}

impl SequenceStates {
    /// Hidden states at the context EOU positions.
    pub fn utterance_reps(&self) -> Vec<HiddenVector> {
        self.eou_positions.iter().map(|&p| self.hiddens[p].clone()).collect()
    }

    /// Positions of non-EOU tokens, context first.
    pub fn content_positions(&self) -> Vec<usize> {
        (0..self.tokens.len())
            .filter(|&p| self.tokens[p] != self.eou)
            .collect()
    }

    /// States of the response's non-EOU tokens.
    pub fn response_hiddens(&self) -> Vec<HiddenVector> {
        self.content_positions()
            .into_iter()
            .filter(|&p| p >= self.context_len)
            .map(|p| self.hiddens[p].clone())
            .collect()
    }
}

/// Runs one forward over context and response to collect every position's
/// hidden state.
pub fn sequence_states<B: Backend + ?Sized>(
    backend: &B,
    enc: &EncodedContext,
    response: &[TokenId],
) -> Result<SequenceStates> {
    let tokens: Vec<TokenId> = enc.tokens.iter().chain(response).copied().collect();
    let out = backend.forward(&tokens, true)?;
    let hiddens = out
        .hidden_all
        .ok_or_else(|| Error::Protocol("backend omitted hidden_all".into()))?;
    if hiddens.len() != tokens.len() {
        return Err(Error::Protocol("hidden_all length differs from input".into()));
    }
    Ok(SequenceStates {
        tokens,
        hiddens,
        context_len: enc.tokens.len(),
        eou: enc.eou,
        eou_positions: enc.eou_positions.clone(),
    })
}
