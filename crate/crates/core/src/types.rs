//! Domain types shared by every decoder.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index into a backend vocabulary.
pub type TokenId = u32;

/// A hidden state vector produced by a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HiddenVector(Vec<f64>);

impl HiddenVector {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(alloc::vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Checks that the vector has exactly `dim` finite components.
    pub fn check(&self, dim: usize) -> Result<()> {
        if self.0.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: self.0.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::Validation("hidden vector has non-finite components".into()));
        }
        Ok(())
    }
}

impl Deref for HiddenVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for HiddenVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A dialogue history of one or more non-empty utterances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueContext {
    utterances: Vec<Vec<TokenId>>,
}

impl DialogueContext {
    pub fn new(utterances: Vec<Vec<TokenId>>) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::Argument("dialogue context needs at least one utterance".into()));
        }
        if let Some(i) = utterances.iter().position(Vec::is_empty) {
            return Err(Error::Argument(alloc::format!("utterance {i} is empty")));
        }
        Ok(Self { utterances })
    }

    pub fn utterances(&self) -> &[Vec<TokenId>] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }
}

/// Mutable decoding state for one response.
///
/// `response_rep` is the mean of `generated_hiddens`. It is derived from a
/// running component-wise sum, so it always equals the from-scratch mean
/// computed in insertion order.
#[derive(Debug, Clone)]
pub struct GenerationState {
    generated: Vec<TokenId>,
    generated_hiddens: Vec<HiddenVector>,
    hidden_sum: Vec<f64>,
    response_rep: HiddenVector,
    utterance_reps: Vec<HiddenVector>,
}

impl GenerationState {
    pub fn new(utterance_reps: Vec<HiddenVector>, hidden_dim: usize) -> Self {
        Self {
            generated: Vec::new(),
            generated_hiddens: Vec::new(),
            hidden_sum: alloc::vec![0.0; hidden_dim],
            response_rep: HiddenVector::zeros(hidden_dim),
            utterance_reps,
        }
    }

    pub fn push(&mut self, token: TokenId, hidden: HiddenVector) -> Result<()> {
        hidden.check(self.hidden_sum.len())?;
        for (s, h) in self.hidden_sum.iter_mut().zip(hidden.iter()) {
            *s += h;
        }
        self.generated.push(token);
        self.generated_hiddens.push(hidden);
        let t = self.generated.len() as f64;
        self.response_rep = HiddenVector::new(self.hidden_sum.iter().map(|s| s / t).collect());
        Ok(())
    }

    pub fn step(&self) -> usize {
        self.generated.len()
    }

    pub fn generated(&self) -> &[TokenId] {
        &self.generated
    }

    pub fn generated_hiddens(&self) -> &[HiddenVector] {
        &self.generated_hiddens
    }

    /// Component-wise sum of the generated hiddens.
    pub fn hidden_sum(&self) -> &[f64] {
        &self.hidden_sum
    }

    /// Mean of the generated hiddens; all zeros before the first push.
    pub fn response_rep(&self) -> &HiddenVector {
        &self.response_rep
    }

    pub fn utterance_reps(&self) -> &[HiddenVector] {
        &self.utterance_reps
    }
}

/// Why generation stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Eou,
    MaxLen,
}

/// Score breakdown for one candidate at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub token: TokenId,
    pub prob: f64,
    pub p_value: Option<f64>,
    pub i_value: Option<f64>,
    /// Contrastive-search degeneration penalty.
    pub degeneration: Option<f64>,
    pub score: f64,
}

/// Trace of one decoding step.
///
/// `score` is the selection criterion of the rule that chose the token: the
/// IPS or contrastive score, the cumulative log-probability for beam search,
/// and absent for greedy and sampling steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub token: TokenId,
    pub prob: f64,
    pub p_value: Option<f64>,
    pub i_value: Option<f64>,
    pub score: Option<f64>,
    pub candidates: Vec<CandidateScore>,
}

impl StepRecord {
    pub fn plain(token: TokenId, prob: f64) -> Self {
        Self {
            token,
            prob,
            p_value: None,
            i_value: None,
            score: None,
            candidates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub tokens: Vec<TokenId>,
    pub text: Option<String>,
    pub per_step: Vec<StepRecord>,
    pub stop_reason: StopReason,
    /// Wall-clock seconds; always 0 without the `std` feature.
    pub elapsed: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn context_rejects_empty() {
        assert!(DialogueContext::new(vec![]).is_err());
        assert!(DialogueContext::new(vec![vec![1], vec![]]).is_err());
        assert_eq!(DialogueContext::new(vec![vec![1]]).unwrap().len(), 1);
    }

    #[test]
    fn push_rejects_wrong_dimension() {
        let mut st = GenerationState::new(vec![], 2);
        assert_eq!(
            st.push(3, HiddenVector::new(vec![1.0])),
            Err(Error::Dimension { expected: 2, found: 1 })
        );
        assert_eq!(st.step(), 0);
    }

    proptest! {
        #[test]
        fn running_mean_matches_recomputation(
            rows in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 4), 1..40)
        ) {
            let mut st = GenerationState::new(vec![], 4);
            for (i, r) in rows.iter().enumerate() {
                st.push(i as TokenId, HiddenVector::new(r.clone())).unwrap();
                let n = (i + 1) as f64;
                for c in 0..4 {
                    let mean = rows[..=i].iter().map(|r| r[c]).sum::<f64>() / n;
                    prop_assert!((st.response_rep()[c] - mean).abs() <= 1e-9);
                }
                prop_assert_eq!(st.step(), st.generated_hiddens().len());
            }
        }
    }
}
