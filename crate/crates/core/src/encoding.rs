//! Serializing a dialogue context into one token sequence with an
//! end-of-utterance marker after every utterance, and reading utterance
//! representations off the marker positions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::types::{DialogueContext, HiddenVector, TokenId};

/// `u_1 EOU u_2 EOU ... u_N EOU`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedContext {
    pub tokens: Vec<TokenId>,
    pub eou_positions: Vec<usize>,
    pub eou: TokenId,
}

impl EncodedContext {
    pub fn n_utterances(&self) -> usize {
        self.eou_positions.len()
    }

    /// Splits the sequence back into its utterances.
    pub fn utterances(&self) -> Vec<Vec<TokenId>> {
        let mut start = 0;
        self.eou_positions
            .iter()
            .map(|&p| {
                let u = self.tokens[start..p].to_vec();
                start = p + 1;
                u
            })
            .collect()
    }
}

pub fn encode_context(ctx: &DialogueContext, eou: TokenId) -> Result<EncodedContext> {
    let total = ctx.utterances().iter().map(|u| u.len() + 1).sum();
    let mut tokens = Vec::with_capacity(total);
    let mut eou_positions = Vec::with_capacity(ctx.len());
    for (i, u) in ctx.utterances().iter().enumerate() {
        if u.contains(&eou) {
            return Err(Error::Argument(format!(
                "utterance {i} contains the EOU token {eou}"
            )));
        }
        tokens.extend_from_slice(u);
        eou_positions.push(tokens.len());
        tokens.push(eou);
    }
    Ok(EncodedContext {
        tokens,
        eou_positions,
        eou,
    })
}

/// Final-layer hidden states at each EOU position, from one forward pass.
pub fn utterance_representations<B: Backend + ?Sized>(
    enc: &EncodedContext,
    backend: &B,
) -> Result<Vec<HiddenVector>> {
    let out = backend.forward(&enc.tokens, true)?;
    let all = out
        .hidden_all
        .ok_or_else(|| Error::Protocol("backend omitted hidden_all".into()))?;
    enc.eou_positions
        .iter()
        .map(|&p| {
            all.get(p).cloned().ok_or_else(|| {
                Error::Protocol(format!("hidden_all has no row for position {p}"))
            })
        })
        .collect()
}

pub const UNK_WORD: &str = "[UNK]";
pub const EOU_WORD: &str = "[EOU]";

/// Maps text to token ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tokenizer {
    /// Input is already token ids; no text form.
    Passthrough,
    /// Splits on whitespace; unknown words map to the `[UNK]` id.
    Whitespace {
        vocab: BTreeMap<String, TokenId>,
        words: Vec<String>,
        unk: TokenId,
    },
}

impl Tokenizer {
    /// Builds a whitespace tokenizer where `words[i]` has id `i`. The list
    /// must contain `[UNK]`.
    pub fn whitespace(words: Vec<String>) -> Result<Self> {
        let mut vocab = BTreeMap::new();
        for (id, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Argument(format!("invalid vocabulary entry {id}: {w:?}")));
            }
            if vocab.insert(w.clone(), id as TokenId).is_some() {
                return Err(Error::Argument(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        let unk = *vocab
            .get(UNK_WORD)
            .ok_or_else(|| Error::Argument(format!("vocabulary lacks {UNK_WORD}")))?;
        Ok(Tokenizer::Whitespace { vocab, words, unk })
    }

    /// Id of the `[EOU]` word, if the vocabulary has one.
    pub fn eou(&self) -> Option<TokenId> {
        match self {
            Tokenizer::Passthrough => None,
            Tokenizer::Whitespace { vocab, .. } => vocab.get(EOU_WORD).copied(),
        }
    }

    pub fn encode(&self, text: &str) -> Result<Vec<TokenId>> {
        match self {
            Tokenizer::Passthrough => Err(Error::Argument(
                "passthrough tokenizer only accepts token ids".into(),
            )),
            Tokenizer::Whitespace { vocab, unk, .. } => Ok(text
                .split_whitespace()
                .map(|w| vocab.get(w).copied().unwrap_or(*unk))
                .collect()),
        }
    }

    /// Joins the words of `tokens`, dropping `skip`. `None` in passthrough mode.
    pub fn decode(&self, tokens: &[TokenId], skip: TokenId) -> Option<String> {
        match self {
            Tokenizer::Passthrough => None,
            Tokenizer::Whitespace { words, .. } => Some(
                tokens
                    .iter()
                    .filter(|&&t| t != skip)
                    .map(|&t| {
                        words
                            .get(t as usize)
                            .cloned()
                            .unwrap_or_else(|| UNK_WORD.to_string())
                    })
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
        }
    }

    /// Display label of a single token.
    pub fn label(&self, token: TokenId) -> String {
        match self {
            Tokenizer::Whitespace { words, .. } if (token as usize) < words.len() => {
                words[token as usize].clone()
            }
            _ => token.to_string(),
        }
    }
}
