//! Machine-readable records of checked claims.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ivl::Interval;
use crate::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Established in interval arithmetic.
    Verified,
    /// Holds numerically in float mode; not evidence.
    Observed,
    Failed,
    /// Undecided at the resolution used.
    Indeterminate,
}

impl Verdict {
    /// `Verified` in interval mode, `Observed` in float mode, else `Failed`.
    pub fn from_check(ok: bool, mode: Mode) -> Self {
        match (ok, mode) {
            (true, Mode::Interval) => Verdict::Verified,
            (true, Mode::Float) => Verdict::Observed,
            (false, _) => Verdict::Failed,
        }
    }

    pub fn passed(self) -> bool {
        matches!(self, Verdict::Verified | Verdict::Observed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim_id: String,
    /// Human-readable statement of the claim.
    pub anchor: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub verdict: Verdict,
    pub bound: Option<Interval>,
    /// Slack by which the claim holds (positive when it holds).
    pub margin: Option<f64>,
    pub mode: Mode,
    pub wall_time_ms: u64,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Certificate {
    pub fn new(claim_id: &str, anchor: &str, mode: Mode) -> Self {
        Certificate {
            claim_id: claim_id.to_string(),
            anchor: anchor.to_string(),
            parameters: BTreeMap::new(),
            verdict: Verdict::Indeterminate,
            bound: None,
            margin: None,
            mode,
            wall_time_ms: 0,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            detail: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn with_bound(mut self, b: Interval) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn with_margin(mut self, m: f64) -> Self {
        self.margin = Some(m);
        self
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn decide(mut self, ok: bool) -> Self {
        self.verdict = Verdict::from_check(ok, self.mode);
        self
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        // interval evidence is required for a verified verdict
        self.verdict = if v == Verdict::Verified && self.mode == Mode::Float { Verdict::Observed } else { v };
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_millis() as u64;
        self
    }
}

/// Exit status for a batch: 0 all passed, 2 any failed, 3 undecided only.
pub fn exit_code(certs: &[Certificate]) -> i32 {
    if certs.iter().any(|c| c.verdict == Verdict::Failed) {
        2
    } else if certs.iter().any(|c| c.verdict == Verdict::Indeterminate) {
        3
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_mode_never_verifies() {
        let c = Certificate::new("x", "x", Mode::Float).decide(true);
        assert_eq!(c.verdict, Verdict::Observed);
        let c = Certificate::new("x", "x", Mode::Float).with_verdict(Verdict::Verified);
        assert_eq!(c.verdict, Verdict::Observed);
        let c = Certificate::new("x", "x", Mode::Interval).decide(true);
        assert_eq!(c.verdict, Verdict::Verified);
    }

    #[test]
    fn exit_codes() {
        let ok = Certificate::new("a", "a", Mode::Interval).decide(true);
        let bad = Certificate::new("b", "b", Mode::Interval).decide(false);
        let und = Certificate::new("c", "c", Mode::Interval);
        assert_eq!(exit_code(&[ok.clone()]), 0);
        assert_eq!(exit_code(&[ok.clone(), und.clone()]), 3);
        assert_eq!(exit_code(&[ok, und, bad]), 2);
    }
}
