//! Scaled numerical tolerance used by every comparison in the crate.

use crate::error::{CalcError, Result};
use serde::{Deserialize, Serialize};

/// Comparison tolerance with relative scaling.
///
/// A comparison at data magnitude `s` uses the threshold `eps * max(1, s)`,
/// so the tolerance is absolute for unit-scale data and relative for large
/// data. The same rule is applied to eigenvalue clustering, rank decisions
/// and zero tests, keeping every threshold in the crate consistent.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerance {
    eps: f64,
}

impl Tolerance {
    /// Creates a tolerance; `eps` must be finite and strictly positive.
    pub fn new(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(CalcError::Invalid(format!(
                "tolerance eps must be finite and > 0, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    /// The raw epsilon.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Threshold for comparisons at data magnitude `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.eps * scale.max(1.0)
    }
}

impl Default for Tolerance {
    /// The default working tolerance, `eps = 1e-9`.
    fn default() -> Self {
        Self { eps: 1e-9 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_eps_and_scaling() {
        let tol = Tolerance::default();
        assert_eq!(tol.eps(), 1e-9);
        assert_eq!(tol.threshold(0.5), 1e-9);
        assert_eq!(tol.threshold(1024.0), 1e-9 * 1024.0);
    }

    #[test]
    fn rejects_nonpositive_eps() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(-1e-9).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
    }
}
