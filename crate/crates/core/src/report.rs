//! Structured validation reports: named checks with pass flags and residuals.

use serde::{Deserialize, Serialize};

/// Outcome of one named validation check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Numerical residual behind the decision, when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// A list of validation checks; passes iff every check passes.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn push(&mut self, name: &str, passed: bool, residual: Option<f64>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            residual,
        });
    }

    /// True iff every recorded check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The failed checks by name.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Largest recorded residual, 0.0 when none exist.
    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_fail_and_residual_tracking() {
        let mut r = ValidationReport::default();
        r.push("a", true, Some(1e-12));
        assert!(r.passed());
        r.push("b", false, Some(0.5));
        assert!(!r.passed());
        assert_eq!(r.failures(), vec!["b"]);
        assert_eq!(r.max_residual(), 0.5);
    }
}
