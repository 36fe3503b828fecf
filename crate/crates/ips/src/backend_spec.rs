use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use ips_core::{Backend, ScriptedBackend, ScriptedTable, TinyTransformer};

use crate::error::CliError;
use crate::remote::RemoteBackend;

/// Which backend to run against:
/// `scripted:<path>`, `tiny:<seed>,<V>,<d>,<L>,<H>` or `remote:<url>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Scripted(PathBuf),
    Tiny {
        seed: u64,
        vocab_size: usize,
        hidden_dim: usize,
        layers: usize,
        heads: usize,
    },
    Remote(String),
}

impl FromStr for BackendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("backend spec `{s}` lacks a `kind:` prefix"))?;
        match kind {
            "scripted" if !rest.is_empty() => Ok(BackendSpec::Scripted(rest.into())),
            "remote" if !rest.is_empty() => Ok(BackendSpec::Remote(rest.to_string())),
            "tiny" => {
                let parts = rest
                    .split(',')
                    .map(|p| p.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| format!("tiny backend spec `{rest}`: {e}"))?;
                match parts[..] {
                    [seed, v, d, l, h] => Ok(BackendSpec::Tiny {
                        seed,
                        vocab_size: v as usize,
                        hidden_dim: d as usize,
                        layers: l as usize,
                        heads: h as usize,
                    }),
                    _ => Err(format!(
                        "tiny backend spec needs <seed>,<V>,<d>,<L>,<H>, got `{rest}`"
                    )),
                }
            }
            _ => Err(format!("unknown backend spec `{s}`")),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Scripted(p) => write!(f, "scripted:{}", p.display()),
            BackendSpec::Tiny {
                seed,
                vocab_size,
                hidden_dim,
                layers,
                heads,
            } => write!(f, "tiny:{seed},{vocab_size},{hidden_dim},{layers},{heads}"),
            BackendSpec::Remote(url) => write!(f, "remote:{url}"),
        }
    }
}

impl BackendSpec {
    pub fn open(&self, timeout: Duration) -> Result<Box<dyn Backend>, CliError> {
        Ok(match self {
            BackendSpec::Scripted(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Backend(format!("reading {}: {e}", path.display()))
                })?;
                let table: ScriptedTable = serde_json::from_str(&text).map_err(|e| {
                    CliError::Backend(format!("parsing {}: {e}", path.display()))
                })?;
                Box::new(ScriptedBackend::from_table(table).map_err(CliError::backend)?)
            }
            BackendSpec::Tiny {
                seed,
                vocab_size,
                hidden_dim,
                layers,
                heads,
            } => Box::new(
                TinyTransformer::new(*seed, *vocab_size, *hidden_dim, *layers, *heads)
                    .map_err(CliError::backend)?,
            ),
            BackendSpec::Remote(url) => {
                Box::new(RemoteBackend::connect(url, timeout).map_err(CliError::backend)?)
            }
        })
    }
}
