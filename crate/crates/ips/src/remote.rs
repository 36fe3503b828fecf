//! HTTP client for a model served over the JSON wire protocol.
//!
//! ```text
//! GET  /info          -> {"vocab_size", "hidden_dim", "eou_token_id"}
//! POST /forward       {"tokens", "return_hidden": "last"|"all"}
//!                     -> {"probs"|"logits", "hidden_last", "hidden_all"?}
//! POST /forward_batch {"prefix", "candidates"} -> {"hidden"}
//! ```

use std::time::Duration;

use ips_core::backend::{check_candidates, check_prefix, softmax};
use ips_core::{Backend, BackendInfo, Error, HiddenVector, Result, StepOutput, TokenId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnHidden {
    Last,
    All,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardRequest {
    pub tokens: Vec<TokenId>,
    pub return_hidden: ReturnHidden,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ForwardResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_last: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_all: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardBatchRequest {
    pub prefix: Vec<TokenId>,
    pub candidates: Vec<TokenId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardBatchResponse {
    pub hidden: Vec<Vec<f64>>,
}

impl ForwardResponse {
    /// Converts a wire response into a validated [`StepOutput`].
    pub fn into_step_output(
        self,
        info: &BackendInfo,
        prefix_len: usize,
        want_all_hidden: bool,
    ) -> Result<StepOutput> {
        let probs = match (self.probs, self.logits) {
            (Some(p), _) => p,
            (None, Some(l)) => {
                if l.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Protocol("non-finite logits".into()));
                }
                softmax(&l)
            }
            (None, None) => return Err(Error::Protocol("missing field `probs`".into())),
        };
        let hidden_last = self
            .hidden_last
            .ok_or_else(|| Error::Protocol("missing field `hidden_last`".into()))?;
        let hidden_all = if want_all_hidden {
            let rows = self
                .hidden_all
                .ok_or_else(|| Error::Protocol("missing field `hidden_all`".into()))?;
            Some(rows.into_iter().map(HiddenVector::new).collect())
        } else {
            None
        };
        let out = StepOutput {
            probs,
            hidden_last: HiddenVector::new(hidden_last),
            hidden_all,
        };
        out.validate(info, prefix_len).map_err(protocol)?;
        Ok(out)
    }
}

fn protocol(e: Error) -> Error {
    match e {
        Error::Protocol(_) => e,
        other => Error::Protocol(other.to_string()),
    }
}

fn transport(e: ureq::Error) -> Error {
    match e {
        ureq::Error::Timeout(_) => Error::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => Error::Timeout,
        ureq::Error::StatusCode(code) => Error::Protocol(format!("server answered HTTP {code}")),
        other => Error::Transport(other.to_string()),
    }
}

/// Backend whose forwards run on a remote server.
#[derive(Debug)]
pub struct RemoteBackend {
    agent: ureq::Agent,
    base: String,
    info: BackendInfo,
}

impl RemoteBackend {
    /// Connects and fetches `/info`. `timeout` bounds every request.
    pub fn connect(endpoint_url: &str, timeout: Duration) -> Result<Self> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        let base = endpoint_url.trim_end_matches('/').to_string();
        let mut backend = Self {
            agent,
            base,
            info: BackendInfo {
                vocab_size: 0,
                hidden_dim: 0,
                eou_token_id: 0,
            },
        };
        let info: BackendInfo = backend.get("/info")?;
        info.validate().map_err(protocol)?;
        backend.info = info;
        Ok(backend)
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let body = self
            .agent
            .get(format!("{}{path}", self.base))
            .call()
            .map_err(transport)?
            .into_body()
            .read_to_string()
            .map_err(transport)?;
        parse(&body)
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let body = self
            .agent
            .post(format!("{}{path}", self.base))
            .send_json(body)
            .map_err(transport)?
            .into_body()
            .read_to_string()
            .map_err(transport)?;
        parse(&body)
    }
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T> {
    serde_json::from_str(body).map_err(|e| Error::Protocol(format!("bad response body: {e}")))
}

impl Backend for RemoteBackend {
    fn info(&self) -> BackendInfo {
        self.info
    }

    fn forward(&self, prefix: &[TokenId], want_all_hidden: bool) -> Result<StepOutput> {
        check_prefix(&self.info, prefix)?;
        let req = ForwardRequest {
            tokens: prefix.to_vec(),
            return_hidden: if want_all_hidden {
                ReturnHidden::All
            } else {
                ReturnHidden::Last
            },
        };
        let resp: ForwardResponse = self.post("/forward", &req)?;
        resp.into_step_output(&self.info, prefix.len(), want_all_hidden)
    }

    fn forward_candidates(
        &self,
        prefix: &[TokenId],
        candidates: &[TokenId],
    ) -> Result<Vec<HiddenVector>> {
        check_candidates(&self.info, prefix, candidates)?;
        let req = ForwardBatchRequest {
            prefix: prefix.to_vec(),
            candidates: candidates.to_vec(),
        };
        let resp: ForwardBatchResponse = self.post("/forward_batch", &req)?;
        if resp.hidden.len() != candidates.len() {
            return Err(Error::Protocol(format!(
                "expected {} hidden rows, got {}",
                candidates.len(),
                resp.hidden.len()
            )));
        }
        resp.hidden
            .into_iter()
            .map(|row| {
                let h = HiddenVector::new(row);
                h.check(self.info.hidden_dim).map_err(protocol)?;
                Ok(h)
            })
            .collect()
    }
}
