//! Decoder configuration and its validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Beam,
    Topk,
    Nucleus,
    Contrastive,
    Ips,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Greedy,
        Strategy::Beam,
        Strategy::Topk,
        Strategy::Nucleus,
        Strategy::Contrastive,
        Strategy::Ips,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Beam => "beam",
            Strategy::Topk => "topk",
            Strategy::Nucleus => "nucleus",
            Strategy::Contrastive => "contrastive",
            Strategy::Ips => "ips",
        }
    }

    /// Whether the strategy consumes random draws.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Strategy::Topk | Strategy::Nucleus | Strategy::Ips)
    }
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Argument(alloc::format!("unknown strategy `{s}`")))
    }
}

/// How the proximal and isotropic values are combined into a penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyForm {
    /// `p_value - i_value`, written `eq5` in configs.
    #[serde(rename = "eq5")]
    Difference,
    /// `(1 - beta) * p_value - beta * i_value`
    Beta,
}

impl core::str::FromStr for PenaltyForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq5" => Ok(PenaltyForm::Difference),
            "beta" => Ok(PenaltyForm::Beta),
            _ => Err(Error::Argument(alloc::format!("unknown penalty form `{s}`"))),
        }
    }
}

/// Rule used for the first `bootstrap_n` steps of IPS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapStrategy {
    Topk,
    Nucleus,
    Greedy,
}

impl core::str::FromStr for BootstrapStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topk" => Ok(BootstrapStrategy::Topk),
            "nucleus" => Ok(BootstrapStrategy::Nucleus),
            "greedy" => Ok(BootstrapStrategy::Greedy),
            _ => Err(Error::Argument(alloc::format!("unknown bootstrap strategy `{s}`"))),
        }
    }
}

/// Full decoder configuration.
///
/// `bootstrap_k` and `bootstrap_p` double as the `k` and `p` of the plain
/// top-k and nucleus strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    /// Weight of model confidence against the isotropic/proximal penalty.
    pub alpha: f64,
    pub beta: f64,
    pub penalty_form: PenaltyForm,
    /// Size of the IPS candidate set.
    pub m: usize,
    pub bootstrap_n: usize,
    pub bootstrap_strategy: BootstrapStrategy,
    pub bootstrap_k: usize,
    pub bootstrap_p: f64,
    pub beam_width: usize,
    pub max_new_tokens: usize,
    pub seed: u64,
    /// Candidate set size of the contrastive baseline.
    pub contrastive_k: usize,
    /// Degeneration penalty weight of the contrastive baseline.
    pub contrastive_alpha: f64,
    /// Compute the isotropic value from the already generated tokens only,
    /// without folding the candidate into the response representation.
    pub strict_isotropy: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Ips,
            alpha: 0.6,
            beta: 0.5,
            penalty_form: PenaltyForm::Difference,
            m: 6,
            bootstrap_n: 2,
            bootstrap_strategy: BootstrapStrategy::Topk,
            bootstrap_k: 7,
            bootstrap_p: 0.9,
            beam_width: 4,
            max_new_tokens: 64,
            seed: 0,
            contrastive_k: 6,
            contrastive_alpha: 0.6,
            strict_isotropy: false,
        }
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Returns `cfg` unchanged when every bound holds for a vocabulary of
/// `vocab_size` tokens, otherwise names the first offending field.
pub fn validate_config(cfg: StrategyConfig, vocab_size: usize) -> Result<StrategyConfig> {
    let checks: [(&'static str, bool); 10] = [
        ("alpha", unit(cfg.alpha)),
        ("beta", unit(cfg.beta)),
        ("m", cfg.m >= 1 && cfg.m <= vocab_size),
        ("bootstrap_k", cfg.bootstrap_k >= 1 && cfg.bootstrap_k <= vocab_size),
        ("bootstrap_p", cfg.bootstrap_p > 0.0 && cfg.bootstrap_p <= 1.0),
        ("beam_width", cfg.beam_width >= 1),
        ("max_new_tokens", cfg.max_new_tokens >= 1),
        (
            "contrastive_k",
            cfg.contrastive_k >= 1 && cfg.contrastive_k <= vocab_size,
        ),
        ("contrastive_alpha", unit(cfg.contrastive_alpha)),
        ("vocab_size", vocab_size >= 2),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((field, _)) => Err(Error::Range(field)),
        None => Ok(cfg),
    }
}
