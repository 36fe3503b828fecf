#![allow(dead_code)]

use std::collections::BTreeMap;

use ips_core::{BackendInfo, HiddenVector, ScriptedBackend, StepOutput, TokenId};

pub fn hv(v: &[f64]) -> HiddenVector {
    HiddenVector::new(v.to_vec())
}

/// Builds scripted tables entry by entry.
pub struct TableBuilder {
    info: BackendInfo,
    table: BTreeMap<Vec<TokenId>, StepOutput>,
}

impl TableBuilder {
    pub fn new(vocab_size: usize, hidden_dim: usize, eou: TokenId) -> Self {
        Self {
            info: BackendInfo {
                vocab_size,
                hidden_dim,
                eou_token_id: eou,
            },
            table: BTreeMap::new(),
        }
    }

    /// Entry whose distribution puts `probs` on the listed tokens and spreads
    /// the remainder uniformly.
    pub fn entry(
        mut self,
        prefix: &[TokenId],
        probs: &[(TokenId, f64)],
        hidden_last: &[f64],
        hidden_all: Option<Vec<Vec<f64>>>,
    ) -> Self {
        let v = self.info.vocab_size;
        let assigned: f64 = probs.iter().map(|(_, p)| p).sum();
        let rest = v - probs.len();
        let fill = if rest == 0 { 0.0 } else { (1.0 - assigned) / rest as f64 };
        let mut dist = vec![fill; v];
        for &(t, p) in probs {
            dist[t as usize] = p;
        }
        self.table.insert(
            prefix.to_vec(),
            StepOutput {
                probs: dist,
                hidden_last: hv(hidden_last),
                hidden_all: hidden_all.map(|rows| rows.iter().map(|r| hv(r)).collect()),
            },
        );
        self
    }

    pub fn build(self) -> ScriptedBackend {
        ScriptedBackend::new(self.table, self.info).unwrap()
    }
}
