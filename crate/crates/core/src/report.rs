//! Verification reports emitted by the command line tool.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::scalar::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

/// Ordered list of check outcomes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, name: impl Into<String>, ok: bool, witness: impl FnOnce() -> Value) {
        let witness = (!ok).then(witness);
        self.0.push(Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            witness,
        });
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.record(name, true, || Value::Null);
    }

    pub fn fail(&mut self, name: impl Into<String>, witness: Value) {
        self.record(name, false, || witness);
    }

    pub fn skip(&mut self, name: impl Into<String>, reason: &str) {
        self.0.push(Check {
            name: name.into(),
            status: Status::Skipped,
            witness: Some(Value::String(reason.to_owned())),
        });
    }

    /// Records an aggregate over many trials, keeping the first failure.
    pub fn tally(&mut self, tally: Tally) {
        let ok = tally.failures == 0;
        let Tally {
            name,
            trials,
            failures,
            first,
        } = tally;
        self.record(name, ok, || {
            serde_json::json!({ "trials": trials, "failures": failures, "first": first })
        });
    }

    pub fn any_failed(&self) -> bool {
        self.0.iter().any(|c| c.status == Status::Fail)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Pass/fail counter for repeated checks.
#[derive(Clone, Debug)]
pub struct Tally {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub first: Option<Value>,
}

impl Tally {
    pub fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            trials: 0,
            failures: 0,
            first: None,
        }
    }

    pub fn observe(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(witness());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub tol_sum: String,
    pub tol_metric: String,
    pub max_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &str, bytes: &[u8]) -> Self {
        InputDigest {
            path: path.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    pub status: Status,
    pub summary: Summary,
    pub checks: Vec<Check>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(
        command: &str,
        config: RunConfig,
        inputs: Vec<InputDigest>,
        checks: Checks,
        result: Value,
    ) -> Self {
        let count = |s| checks.0.iter().filter(|c| c.status == s).count();
        let summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            skipped: count(Status::Skipped),
        };
        VerificationReport {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            config,
            inputs,
            status: if summary.fail > 0 {
                Status::Fail
            } else {
                Status::Pass
            },
            summary,
            checks: checks.0,
            result,
            timing_ms: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Fail => 1,
            _ => 0,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            mode: Mode::Exact,
            seed: 1,
            tol_sum: "0".into(),
            tol_metric: "0".into(),
            max_dim: 8,
            epsilon: None,
        }
    }

    #[test]
    fn status_follows_checks() {
        let mut c = Checks::new();
        c.pass("a");
        c.skip("b", "not applicable");
        let r = VerificationReport::new("x", config(), vec![], c.clone(), Value::Null);
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.exit_code(), 0);
        c.fail("c", Value::String("w".into()));
        let r = VerificationReport::new("x", config(), vec![], c, Value::Null);
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.summary.skipped, 1);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn digests_are_hex_sha256() {
        let d = InputDigest::of("f", b"");
        assert_eq!(
            d.sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn tallies_keep_first_witness() {
        let mut t = Tally::new("t");
        t.observe(true, || Value::Null);
        t.observe(false, || Value::from(1));
        t.observe(false, || Value::from(2));
        let mut c = Checks::new();
        c.tally(t);
        assert_eq!(c.0[0].witness.as_ref().unwrap()["first"], 1);
        assert_eq!(c.0[0].witness.as_ref().unwrap()["failures"], 2);
    }
}
