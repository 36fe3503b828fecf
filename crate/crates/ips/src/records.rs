//! Dialogue records read from JSONL input.

use std::path::Path;

use ips_core::{BackendInfo, DialogueContext, TokenId, Tokenizer};
use serde::Deserialize;

use crate::error::CliError;

/// One dialogue: either pre-tokenized utterances or raw text utterances
/// (the latter needs a whitespace vocabulary).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct DialogueRecord {
    pub id: String,
    #[serde(default)]
    pub context_tokens: Option<Vec<Vec<TokenId>>>,
    #[serde(default)]
    pub context: Option<Vec<String>>,
    #[serde(default)]
    pub reference: Option<Vec<TokenId>>,
}

/// A record with its 1-based line number.
#[derive(Debug, Clone)]
pub struct NumberedRecord {
    pub line: usize,
    pub record: DialogueRecord,
}

/// Parses every non-blank line of `path`.
pub fn read_records(path: &Path) -> Result<Vec<NumberedRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let record: DialogueRecord = serde_json::from_str(raw).map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(NumberedRecord { line: i + 1, record });
    }
    Ok(out)
}

impl DialogueRecord {
    /// Token-level dialogue context, checked against the backend vocabulary.
    pub fn to_context(&self, tokenizer: &Tokenizer, info: &BackendInfo) -> Result<DialogueContext, String> {
        let utterances = match (&self.context_tokens, &self.context) {
            (Some(tokens), None) => tokens.clone(),
            (None, Some(text)) => text
                .iter()
                .map(|u| tokenizer.encode(u))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?,
            (Some(_), Some(_)) => {
                return Err("record has both `context_tokens` and `context`".into())
            }
            (None, None) => return Err("record has neither `context_tokens` nor `context`".into()),
        };
        for u in &utterances {
            info.check_tokens(u).map_err(|e| e.to_string())?;
            if u.contains(&info.eou_token_id) {
                return Err(format!("utterance contains the EOU token {}", info.eou_token_id));
            }
        }
        DialogueContext::new(utterances).map_err(|e| e.to_string())
    }
}

impl NumberedRecord {
    pub fn context(
        &self,
        path: &Path,
        tokenizer: &Tokenizer,
        info: &BackendInfo,
    ) -> Result<DialogueContext, CliError> {
        self.record
            .to_context(tokenizer, info)
            .map_err(|message| CliError::Input {
                path: path.to_path_buf(),
                line: self.line,
                message,
            })
    }
}
