use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_prefix, Backend, BackendInfo, StepOutput};
use crate::error::{Error, Result};
use crate::types::{HiddenVector, TokenId};

/// One row of a scripted table, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEntry {
    pub prefix: Vec<TokenId>,
    pub probs: Vec<f64>,
    pub hidden_last: HiddenVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_all: Option<Vec<HiddenVector>>,
}

/// Serialized form of a scripted backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTable {
    pub info: BackendInfo,
    pub entries: Vec<ScriptedEntry>,
}

/// `base` followed by every token sequence of length `0..=depth`, shortest first.
pub fn prefix_tree(base: &[TokenId], vocab_size: usize, depth: usize) -> Vec<Vec<TokenId>> {
    let mut frontier = alloc::vec![base.to_vec()];
    let mut all = frontier.clone();
    for _ in 0..depth {
        frontier = frontier
            .iter()
            .flat_map(|p| {
                (0..vocab_size as TokenId).map(move |t| {
                    let mut next = p.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

/// Table-driven backend: every forward is an exact lookup by prefix.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    info: BackendInfo,
    table: BTreeMap<Vec<TokenId>, StepOutput>,
}

impl ScriptedBackend {
    pub fn new(table: BTreeMap<Vec<TokenId>, StepOutput>, info: BackendInfo) -> Result<Self> {
        info.validate()?;
        for (prefix, out) in &table {
            check_prefix(&info, prefix)
                .and_then(|_| out.validate(&info, prefix.len()))
                .map_err(|e| Error::Validation(format!("entry {prefix:?}: {e}")))?;
        }
        Ok(Self { info, table })
    }

    pub fn from_table(table: ScriptedTable) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in table.entries {
            let out = StepOutput {
                probs: e.probs,
                hidden_last: e.hidden_last,
                hidden_all: e.hidden_all,
            };
            if map.insert(e.prefix.clone(), out).is_some() {
                return Err(Error::Validation(format!("duplicate entry {:?}", e.prefix)));
            }
        }
        Self::new(map, table.info)
    }

    /// Captures `source`'s output (including every position's hidden state)
    /// for each prefix.
    pub fn record<B, I>(source: &B, prefixes: I) -> Result<Self>
    where
        B: Backend + ?Sized,
        I: IntoIterator<Item = Vec<TokenId>>,
    {
        let mut table = BTreeMap::new();
        for prefix in prefixes {
            let out = source.forward(&prefix, true)?;
            table.insert(prefix, out);
        }
        Self::new(table, source.info())
    }

    /// Like [`record`](Self::record) over `base` extended by every token
    /// sequence of length `0..=depth`.
    pub fn record_tree<B: Backend + ?Sized>(source: &B, base: &[TokenId], depth: usize) -> Result<Self> {
        Self::record(source, prefix_tree(base, source.info().vocab_size, depth))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn to_table(&self) -> ScriptedTable {
        ScriptedTable {
            info: self.info,
            entries: self
                .table
                .iter()
                .map(|(prefix, out)| ScriptedEntry {
                    prefix: prefix.clone(),
                    probs: out.probs.clone(),
                    hidden_last: out.hidden_last.clone(),
                    hidden_all: out.hidden_all.clone(),
                })
                .collect(),
        }
    }
}

impl Backend for ScriptedBackend {
    fn info(&self) -> BackendInfo {
        self.info
    }

    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput> {
        check_prefix(&self.info, prefix)?;
        let entry = self
            .table
            .get(prefix)
            .ok_or_else(|| Error::MissingEntry(prefix.to_vec()))?;
        let hidden_all = if want_all_hidden {
            Some(entry.hidden_all.clone().ok_or_else(|| {
                Error::Validation(format!("entry {prefix:?} has no hidden_all"))
            })?)
        } else {
            None
        };
        Ok(StepOutput {
            probs: entry.probs.clone(),
            hidden_last: entry.hidden_last.clone(),
            hidden_all,
        })
    }
}
