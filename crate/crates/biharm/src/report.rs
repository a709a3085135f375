//! Named residual checks with tolerances and serializable verdicts.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }

    /// A check that passes when the residual verdict agrees with an
    /// expectation: negative controls pass by exceeding the tolerance.
    pub fn comparison(name: &str, max_residual: f64, tolerance: f64, expect_within: bool) -> Self {
        Self {
            name: name.to_string(),
            max_residual,
            tolerance,
            pass: (max_residual <= tolerance) == expect_within,
        }
    }

    /// A check that records a boolean expectation instead of a residual.
    pub fn verdict(name: &str, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            max_residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub seed: u64,
    pub samples: usize,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub case: String,
    pub checks: Vec<Check>,
    pub meta: Meta,
}

impl VerificationReport {
    pub fn new(case: &str, meta: Meta) -> Self {
        Self {
            case: case.to_string(),
            checks: Vec::new(),
            meta,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
