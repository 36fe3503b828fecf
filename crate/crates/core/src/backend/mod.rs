//! Model backends: anything that maps a token prefix to a next-token
//! distribution and final-layer hidden states.

mod scripted;
mod tiny;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{HiddenVector, TokenId};

pub use scripted::{prefix_tree, ScriptedBackend, ScriptedEntry, ScriptedTable};
pub use tiny::{TinyTransformer, TINY_EOU};

/// Tolerance on `probs` summing to one.
pub const PROB_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub vocab_size: usize,
    pub hidden_dim: usize,
    pub eou_token_id: TokenId,
}

impl BackendInfo {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::Validation("vocab_size must be at least 2".into()));
        }
        if self.hidden_dim < 1 {
            return Err(Error::Validation("hidden_dim must be at least 1".into()));
        }
        if self.eou_token_id as usize >= self.vocab_size {
            return Err(Error::Validation(format!(
                "eou_token_id {} outside vocabulary of size {}",
                self.eou_token_id, self.vocab_size
            )));
        }
        Ok(())
    }

    pub fn check_tokens(&self, tokens: &[TokenId]) -> Result<()> {
        match tokens.iter().find(|&&t| t as usize >= self.vocab_size) {
            Some(&token) => Err(Error::Vocab {
                token,
                vocab_size: self.vocab_size,
            }),
            None => Ok(()),
        }
    }
}

/// One forward pass result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutput {
    pub probs: Vec<f64>,
    pub hidden_last: HiddenVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_all: Option<Vec<HiddenVector>>,
}

impl StepOutput {
    /// Checks shape and normalization against `info` for an input prefix of
    /// `prefix_len` tokens.
    pub fn validate(&self, info: &BackendInfo, prefix_len: usize) -> Result<()> {
        if self.probs.len() != info.vocab_size {
            return Err(Error::Validation(format!(
                "probs has length {}, vocabulary is {}",
                self.probs.len(),
                info.vocab_size
            )));
        }
        if self.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Validation("probs must be finite and non-negative".into()));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Validation(format!("probs sum to {sum}, not 1")));
        }
        self.hidden_last.check(info.hidden_dim)?;
        if let Some(all) = &self.hidden_all {
            if all.len() != prefix_len {
                return Err(Error::Validation(format!(
                    "hidden_all has {} rows for a prefix of {} tokens",
                    all.len(),
                    prefix_len
                )));
            }
            for h in all {
                h.check(info.hidden_dim)?;
            }
        }
        Ok(())
    }
}

/// A language model seen through the decoder's eyes.
///
/// Implementations must be deterministic: the same prefix always yields the
/// same output. The hidden state at position `i` must depend only on tokens
/// `0..=i`, so `forward(p, true).hidden_all[i]` equals
/// `forward(&p[..=i], false).hidden_last`.
pub trait Backend: Send + Sync {
    fn info(&self) -> BackendInfo;

    /// Next-token distribution after `prefix`, plus the final-layer state at
    /// the last position and, when requested, at every position.
    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput>;

    /// Hidden state of each candidate token appended to `prefix`.
    ///
    /// Element `i` equals `forward(prefix ++ [candidates[i]], false).hidden_last`.
    /// The default issues one forward per candidate.
    fn forward_candidates(
        &self,
        prefix: &[TokenId],
        candidates: &[TokenId],
    ) -> Result<Vec<HiddenVector>> {
        check_candidates(&self.info(), prefix, candidates)?;
        let mut extended = Vec::with_capacity(prefix.len() + 1);
        extended.extend_from_slice(prefix);
        candidates
            .iter()
            .map(|&c| {
                extended.push(c);
                let out = self.forward(&extended, false);
                extended.pop();
                out.map(|o| o.hidden_last)
            })
            .collect()
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn info(&self) -> BackendInfo {
        (**self).info()
    }

    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput> {
        (**self).forward(prefix, want_all_hidden)
    }

    fn forward_candidates(
        &self,
        prefix: &[TokenId],
        candidates: &[TokenId],
    ) -> Result<Vec<HiddenVector>> {
        (**self).forward_candidates(prefix, candidates)
    }
}

impl<B: Backend + ?Sized> Backend for alloc::boxed::Box<B> {
    fn info(&self) -> BackendInfo {
        (**self).info()
    }

    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput> {
        (**self).forward(prefix, want_all_hidden)
    }

    fn forward_candidates(
        &self,
        prefix: &[TokenId],
        candidates: &[TokenId],
    ) -> Result<Vec<HiddenVector>> {
        (**self).forward_candidates(prefix, candidates)
    }
}

/// Common precondition of `forward`.
pub fn check_prefix(info: &BackendInfo, prefix: &[TokenId]) -> Result<()> {
    if prefix.is_empty() {
        return Err(Error::Argument("prefix must be non-empty".into()));
    }
    info.check_tokens(prefix)
}

/// Common precondition of `forward_candidates`.
pub fn check_candidates(
    info: &BackendInfo,
    prefix: &[TokenId],
    candidates: &[TokenId],
) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::Argument("candidate list must be non-empty".into()));
    }
    check_prefix(info, prefix)?;
    info.check_tokens(candidates)
}

/// Softmax with max subtraction; the output sums to one up to rounding.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| libm::exp(l - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
