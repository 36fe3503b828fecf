//! Serialization helpers for stable, golden-file friendly output.

use ips_core::{GenerationResult, StopReason, TokenId};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A real serialized with exactly six fractional digits; non-finite values
/// become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed6(pub f64);

impl Fixed6 {
    pub fn text(self) -> String {
        format!("{:.6}", self.0)
    }
}

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(self.text())
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

fn fixed(x: Option<f64>) -> Option<Fixed6> {
    x.map(Fixed6)
}

#[derive(Debug, Serialize)]
pub struct TraceLine {
    pub token: TokenId,
    pub prob: Fixed6,
    pub p_value: Option<Fixed6>,
    pub i_value: Option<Fixed6>,
    pub score: Option<Fixed6>,
}

/// One line of `generate` output.
#[derive(Debug, Serialize)]
pub struct GenerationLine<'a> {
    pub id: &'a str,
    pub strategy: &'a str,
    pub tokens: &'a [TokenId],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<&'a str>,
    pub stop_reason: StopReason,
    pub elapsed_s: Fixed6,
    pub trace: Vec<TraceLine>,
}

impl<'a> GenerationLine<'a> {
    pub fn new(id: &'a str, strategy: &'a str, result: &'a GenerationResult) -> Self {
        Self {
            id,
            strategy,
            tokens: &result.tokens,
            text: result.text.as_deref(),
            stop_reason: result.stop_reason,
            elapsed_s: Fixed6(result.elapsed),
            trace: result
                .per_step
                .iter()
                .map(|r| TraceLine {
                    token: r.token,
                    prob: Fixed6(r.prob),
                    p_value: fixed(r.p_value),
                    i_value: fixed(r.i_value),
                    score: fixed(r.score),
                })
                .collect(),
        }
    }
}
