//! Decoding engine for dialogue response generation.
//!
//! Implements isotropic and proximal search (IPS) next to greedy, beam,
//! top-k, nucleus and contrastive decoding, over an abstract [`Backend`]
//! that supplies next-token probabilities and hidden states. The crate is
//! `no_std` (with `alloc`) when the default `std` feature is disabled; the
//! only std-dependent behavior is wall-clock timing of generation runs.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod backend;
pub mod config;
pub mod encoding;
mod error;
pub mod metrics;
pub mod scoring;
pub mod strategies;
pub mod types;

pub use backend::{Backend, BackendInfo, ScriptedBackend, ScriptedTable, StepOutput, TinyTransformer};
pub use config::{validate_config, BootstrapStrategy, PenaltyForm, Strategy, StrategyConfig};
pub use encoding::{encode_context, utterance_representations, EncodedContext, Tokenizer};
pub use error::{Error, Result};
pub use strategies::generate;
pub use types::{
    CandidateScore, DialogueContext, GenerationResult, GenerationState, HiddenVector, StepRecord,
    StopReason, TokenId,
};
