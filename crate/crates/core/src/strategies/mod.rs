//! Decoding strategies and the shared generation loop.

mod beam;
mod contrastive;
mod ips;
mod rng;
mod sampling;

use alloc::vec::Vec;

pub use beam::beam_search;
pub use contrastive::contrastive_step;
pub use ips::ips_step;
pub use rng::DecodeRng;
pub use sampling::{
    greedy_step, nucleus_ids, nucleus_step, ranked_ids, sample_from, top_k_ids, topk_step,
};

use crate::backend::Backend;
use crate::config::{validate_config, BootstrapStrategy, Strategy, StrategyConfig};
use crate::encoding::{encode_context, utterance_representations};
use crate::error::{Error, Result};
use crate::types::{
    DialogueContext, GenerationResult, GenerationState, StepRecord, StopReason, TokenId,
};

/// Generates a response to `ctx` with the configured strategy.
///
/// IPS decodes its first `bootstrap_n` tokens with the bootstrap rule and
/// every later token by isotropic and proximal search. Generation stops after
/// the first EOU token or `max_new_tokens` tokens.
pub fn generate<B: Backend + ?Sized>(
    backend: &B,
    ctx: &DialogueContext,
    cfg: &StrategyConfig,
) -> Result<GenerationResult> {
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let info = backend.info();
    let cfg = validate_config(cfg.clone(), info.vocab_size)?;
    let enc = encode_context(ctx, info.eou_token_id)?;

    let result = if cfg.strategy == Strategy::Beam {
        beam_search(backend, &enc, cfg.beam_width, cfg.max_new_tokens)?
    } else {
        let utterance_reps = if cfg.strategy == Strategy::Ips {
            utterance_representations(&enc, backend)?
        } else {
            Vec::new()
        };
        let mut state = GenerationState::new(utterance_reps, info.hidden_dim);
        let mut rng = DecodeRng::new(cfg.seed);
        let mut prefix = enc.tokens.clone();
        let mut tokens = Vec::new();
        let mut per_step = Vec::new();
        // A token chosen without a hidden state gets it from the next forward,
        // whose last position is that token.
        let mut pending = None;
        let mut stop_reason = StopReason::MaxLen;

        for t in 0..cfg.max_new_tokens {
            let want_all = cfg.strategy == Strategy::Contrastive;
            let out = backend.forward(&prefix, want_all)?;
            if let Some(tok) = pending.take() {
                state.push(tok, out.hidden_last.clone())?;
            }
            let probs = &out.probs;
            let plain = |id: TokenId| (id, StepRecord::plain(id, probs[id as usize]), None);
            let (token, record, hidden) = match cfg.strategy {
                Strategy::Greedy => plain(greedy_step(probs)),
                Strategy::Topk => plain(topk_step(probs, cfg.bootstrap_k, &mut rng)?),
                Strategy::Nucleus => plain(nucleus_step(probs, cfg.bootstrap_p, &mut rng)?),
                Strategy::Contrastive => {
                    let all = out
                        .hidden_all
                        .as_deref()
                        .ok_or_else(|| Error::Protocol("backend omitted hidden_all".into()))?;
                    let (tok, rec, h) = contrastive::contrastive_select(
                        backend,
                        &prefix,
                        probs,
                        all,
                        cfg.contrastive_k,
                        cfg.contrastive_alpha,
                    )?;
                    (tok, rec, Some(h))
                }
                Strategy::Ips if t < cfg.bootstrap_n => {
                    let id = match cfg.bootstrap_strategy {
                        BootstrapStrategy::Topk => topk_step(probs, cfg.bootstrap_k, &mut rng)?,
                        BootstrapStrategy::Nucleus => {
                            nucleus_step(probs, cfg.bootstrap_p, &mut rng)?
                        }
                        BootstrapStrategy::Greedy => greedy_step(probs),
                    };
                    plain(id)
                }
                Strategy::Ips => {
                    let (tok, rec, h) = ips::ips_select(backend, &prefix, probs, &state, &cfg)?;
                    (tok, rec, Some(h))
                }
                Strategy::Beam => unreachable!("handled above"),
            };

            tokens.push(token);
            per_step.push(record);
            prefix.push(token);
            match hidden {
                Some(h) => state.push(token, h)?,
                None => pending = Some(token),
            }
            if token == info.eou_token_id {
                stop_reason = StopReason::Eou;
                break;
            }
        }
        GenerationResult {
            tokens,
            text: None,
            per_step,
            stop_reason,
            elapsed: 0.0,
        }
    };

    #[cfg(feature = "std")]
    let result = GenerationResult {
        elapsed: started.elapsed().as_secs_f64(),
        ..result
    };
    Ok(result)
}
