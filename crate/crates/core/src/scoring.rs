//! Candidate scoring: cosine similarity, the running response
//! representation, proximal and isotropic values, the IPS objective and the
//! contrastive-search degeneration penalty.

use alloc::vec::Vec;

use crate::config::{PenaltyForm, StrategyConfig};
use crate::error::{Error, Result};
use crate::types::HiddenVector;

/// Norms at or below this are treated as degenerate.
pub const MIN_NORM: f64 = 1e-12;

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Cosine similarity, clamped into `[-1, 1]`.
pub fn cosine(a: &HiddenVector, b: &HiddenVector) -> Result<f64> {
    check_dims(a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na <= MIN_NORM || nb <= MIN_NORM {
        return Err(Error::DegenerateVector);
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean of `generated_hiddens`, with `candidate` appended when given.
pub fn response_representation(
    generated_hiddens: &[HiddenVector],
    candidate: Option<&HiddenVector>,
) -> Result<HiddenVector> {
    let mut vectors = generated_hiddens.iter().chain(candidate);
    let first = vectors
        .next()
        .ok_or_else(|| Error::Argument("nothing to average".into()))?;
    let mut sum = first.to_vec();
    let mut count = 1usize;
    for v in vectors {
        check_dims(&sum, v)?;
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x;
        }
        count += 1;
    }
    Ok(mean_from_sum(&sum, count))
}

/// `(sum + candidate) / count`; the fold-in step of the running mean.
pub(crate) fn fold_in(sum: &[f64], candidate: &HiddenVector, count: usize) -> Result<HiddenVector> {
    check_dims(sum, candidate)?;
    let folded: Vec<f64> = sum.iter().zip(candidate.iter()).map(|(s, c)| s + c).collect();
    Ok(mean_from_sum(&folded, count))
}

fn mean_from_sum(sum: &[f64], count: usize) -> HiddenVector {
    let n = count as f64;
    HiddenVector::new(sum.iter().map(|s| s / n).collect())
}

/// Mean cosine between the candidate and each generated token; 0 when
/// nothing has been generated yet.
pub fn proximal_value(
    candidate_hidden: &HiddenVector,
    generated_hiddens: &[HiddenVector],
) -> Result<f64> {
    if generated_hiddens.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for h in generated_hiddens {
        total += cosine(candidate_hidden, h)?;
    }
    Ok(total / generated_hiddens.len() as f64)
}

/// Mean cosine between the response representation and each context
/// utterance representation.
pub fn isotropic_value(response_rep: &HiddenVector, utterance_reps: &[HiddenVector]) -> Result<f64> {
    if utterance_reps.is_empty() {
        return Err(Error::Argument("no utterance representations".into()));
    }
    let mut total = 0.0;
    for u in utterance_reps {
        total += cosine(response_rep, u)?;
    }
    Ok(total / utterance_reps.len() as f64)
}

/// The isotropic/proximal penalty term under the configured form.
pub fn ips_penalty(p_value: f64, i_value: f64, cfg: &StrategyConfig) -> f64 {
    match cfg.penalty_form {
        PenaltyForm::Difference => p_value - i_value,
        PenaltyForm::Beta => (1.0 - cfg.beta) * p_value - cfg.beta * i_value,
    }
}

/// `alpha * prob + (1 - alpha) * penalty`.
pub fn ips_score(prob: f64, p_value: f64, i_value: f64, cfg: &StrategyConfig) -> f64 {
    cfg.alpha * prob + (1.0 - cfg.alpha) * ips_penalty(p_value, i_value, cfg)
}

/// Largest cosine between the candidate and any prefix token.
pub fn degeneration_penalty(
    candidate_hidden: &HiddenVector,
    prefix_hiddens: &[HiddenVector],
) -> Result<f64> {
    if prefix_hiddens.is_empty() {
        return Err(Error::Argument("empty prefix".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for h in prefix_hiddens {
        best = best.max(cosine(candidate_hidden, h)?);
    }
    Ok(best)
}

/// Contrastive-search objective `(1 - alpha) * prob - alpha * penalty`.
pub fn contrastive_score(prob: f64, penalty: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * prob - alpha * penalty
}
