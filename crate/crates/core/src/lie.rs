//! Real Lie algebras represented by trace-free anti-hermitian matrices.
//!
//! A basis element ∂_i acts on Mat(N) as the hermitian derivation
//! A -> [Dhat_i, A]. Trace-free anti-hermitian generators embed the algebra
//! into su(N); faithfulness is real-linear independence of the generators.

use crate::error::{CalcError, Result};
use crate::matrix::{commutator, ComplexMatrix, C64};
use crate::report::ValidationReport;
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};

/// A real Lie algebra given by structure constants on a chosen basis:
/// `[∂_i, ∂_j] = Σ_k c[i][j][k] ∂_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    pub structure_constants: Vec<Vec<Vec<f64>>>,
}

impl LieAlgebraSpec {
    /// The abelian algebra of the given dimension (all structure constants zero).
    pub fn abelian(dim: usize) -> Self {
        Self {
            dim,
            structure_constants: vec![vec![vec![0.0; dim]; dim]; dim],
        }
    }

    /// Structure constant `c_{ij}^k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure_constants[i][j][k]
    }

    pub fn max_abs_constant(&self) -> f64 {
        self.structure_constants
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// True iff all structure constants vanish within tolerance.
    pub fn is_abelian(&self, tol: &Tolerance) -> bool {
        self.max_abs_constant() <= tol.threshold(0.0)
    }

    /// Checks array shape (hard error), then antisymmetry and the Jacobi
    /// identity within tolerance (report entries).
    pub fn validate(&self, tol: &Tolerance) -> Result<ValidationReport> {
        let n = self.dim;
        if n == 0 {
            return Err(CalcError::Shape("Lie algebra dimension must be nonzero".into()));
        }
        let shape_ok = self.structure_constants.len() == n
            && self
                .structure_constants
                .iter()
                .all(|a| a.len() == n && a.iter().all(|b| b.len() == n));
        if !shape_ok {
            return Err(CalcError::Shape(format!(
                "structure constants must form an {n}x{n}x{n} array"
            )));
        }

        let scale = self.max_abs_constant();
        let thr = tol.threshold(scale);
        let mut report = ValidationReport::default();

        let mut antisym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    antisym = antisym.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        report.push("antisymmetry", antisym <= thr, Some(antisym));

        // Jacobi in coordinates: cyclic sum of c_{ij}^m c_{mk}^l vanishes.
        let mut jacobi = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, l)
                                + self.c(j, k, m) * self.c(m, i, l)
                                + self.c(k, i, m) * self.c(m, j, l);
                        }
                        jacobi = jacobi.max(s.abs());
                    }
                }
            }
        }
        let jacobi_thr = tol.threshold(scale * scale.max(1.0));
        report.push("jacobi", jacobi <= jacobi_thr, Some(jacobi));
        Ok(report)
    }
}

/// A faithful representation of a Lie algebra by trace-free anti-hermitian
/// matrices: generator ∂_i is represented by `Dhat[i]`.
///
/// Serialized flat: `{"dim", "structure_constants", "N", "Dhat"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixRep {
    #[serde(flatten)]
    pub lie: LieAlgebraSpec,
    #[serde(rename = "N")]
    pub n_dim: usize,
    #[serde(rename = "Dhat")]
    pub dhat: Vec<ComplexMatrix>,
}

impl MatrixRep {
    /// The represented element for real coefficients: `Σ_i coeffs[i] Dhat_i`.
    pub fn dhat_combo(&self, coeffs: &[f64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.lie.dim {
            return Err(CalcError::Shape(format!(
                "expected {} coefficients, got {}",
                self.lie.dim,
                coeffs.len()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.n_dim, self.n_dim);
        for (c, d) in coeffs.iter().zip(&self.dhat) {
            out = out.add(&d.scale(C64::new(*c, 0.0)))?;
        }
        Ok(out)
    }

    /// Subtracts `(trace/N) * 1` from every generator, returning the corrected
    /// representation together with the removed traces.
    pub fn trace_corrected(mut self) -> (Self, Vec<C64>) {
        let n = self.n_dim;
        let mut removed = Vec::with_capacity(self.dhat.len());
        for d in &mut self.dhat {
            let t = d.trace().unwrap_or(C64::new(0.0, 0.0)) / n as f64;
            removed.push(t);
            let correction = ComplexMatrix::identity(n).scale(t);
            *d = d.sub(&correction).expect("same shape");
        }
        (self, removed)
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        if self.n_dim == 0 {
            return Err(CalcError::Shape("matrix dimension N must be nonzero".into()));
        }
        if self.dhat.len() != self.lie.dim {
            return Err(CalcError::Shape(format!(
                "expected {} generator matrices, got {}",
                self.lie.dim,
                self.dhat.len()
            )));
        }
        for (i, d) in self.dhat.iter().enumerate() {
            if d.rows() != self.n_dim || d.cols() != self.n_dim {
                return Err(CalcError::Shape(format!(
                    "generator {i} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    self.n_dim,
                    self.n_dim
                )));
            }
        }
        Ok(())
    }
}

/// Validates a representation: Lie algebra axioms, trace-free anti-hermitian
/// generators, bracket compatibility `[Dhat_i, Dhat_j] = Σ_k c_{ij}^k Dhat_k`,
/// and faithfulness (real-linear independence of the generators).
///
/// Shape inconsistencies are hard errors; every semantic condition becomes a
/// report entry with its residual.
pub fn validate_rep(rep: &MatrixRep, tol: &Tolerance) -> Result<ValidationReport> {
    rep.check_shapes()?;
    let mut report = rep.lie.validate(tol)?;
    let n = rep.lie.dim;
    let scale = rep
        .dhat
        .iter()
        .map(|d| d.max_abs())
        .fold(0.0f64, f64::max)
        .max(rep.lie.max_abs_constant());
    let thr = tol.threshold(scale);

    let mut trace_res = 0.0f64;
    let mut anti_res = 0.0f64;
    for d in &rep.dhat {
        trace_res = trace_res.max(d.trace()?.norm());
        anti_res = anti_res.max(d.anti_hermitian_residual());
    }
    report.push("trace_free", trace_res <= thr, Some(trace_res));
    report.push("anti_hermitian", anti_res <= thr, Some(anti_res));

    let mut bracket_res = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let lhs = commutator(&rep.dhat[i], &rep.dhat[j])?;
            let mut rhs = ComplexMatrix::zeros(rep.n_dim, rep.n_dim);
            for k in 0..n {
                rhs = rhs.add(&rep.dhat[k].scale(C64::new(rep.lie.c(i, j, k), 0.0)))?;
            }
            bracket_res = bracket_res.max(lhs.sub(&rhs)?.max_abs());
        }
    }
    let bracket_thr = tol.threshold(scale * scale.max(1.0));
    report.push("bracket_compatibility", bracket_res <= bracket_thr, Some(bracket_res));

    // Faithfulness: the n generators, flattened to real vectors of length
    // 2N^2, must be linearly independent over R. Decided by the smallest
    // singular value of the stacked coefficient matrix.
    let nn = rep.n_dim * rep.n_dim;
    let mut stack = nalgebra::DMatrix::<f64>::zeros(n, 2 * nn);
    for (i, d) in rep.dhat.iter().enumerate() {
        for r in 0..rep.n_dim {
            for c in 0..rep.n_dim {
                let z = d.get(r, c);
                stack[(i, r * rep.n_dim + c)] = z.re;
                stack[(i, nn + r * rep.n_dim + c)] = z.im;
            }
        }
    }
    let sv = stack.svd(false, false).singular_values;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let faithful = smin > tol.threshold(smax);
    report.push("faithful", faithful, Some(smin));

    Ok(report)
}

/// Applies the derivation of the Lie algebra element with the given real
/// coefficients to `a`: the commutator `[Σ_i coeffs[i] Dhat_i, a]`.
pub fn derivation_apply(rep: &MatrixRep, coeffs: &[f64], a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() != rep.n_dim || a.cols() != rep.n_dim {
        return Err(CalcError::Shape(format!(
            "derivation argument is {}x{}, expected {}x{}",
            a.rows(),
            a.cols(),
            rep.n_dim,
            rep.n_dim
        )));
    }
    commutator(&rep.dhat_combo(coeffs)?, a)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// su(2) with generators i/2 times the Pauli matrices, satisfying
    /// [e1, e2] = e3, [e2, e3] = e1, [e3, e1] = e2.
    pub(crate) fn su2() -> MatrixRep {
        let mut cs = vec![vec![vec![0.0; 3]; 3]; 3];
        cs[0][1][2] = 1.0;
        cs[1][0][2] = -1.0;
        cs[1][2][0] = 1.0;
        cs[2][1][0] = -1.0;
        cs[2][0][1] = 1.0;
        cs[0][2][1] = -1.0;
        let e1 = ComplexMatrix::from_rows(vec![
            vec![c64(0.0, 0.5), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, -0.5)],
        ])
        .unwrap();
        let e2 = ComplexMatrix::from_rows(vec![
            vec![c64(0.0, 0.0), c64(0.5, 0.0)],
            vec![c64(-0.5, 0.0), c64(0.0, 0.0)],
        ])
        .unwrap();
        let e3 = ComplexMatrix::from_rows(vec![
            vec![c64(0.0, 0.0), c64(0.0, 0.5)],
            vec![c64(0.0, 0.5), c64(0.0, 0.0)],
        ])
        .unwrap();
        MatrixRep {
            lie: LieAlgebraSpec {
                dim: 3,
                structure_constants: cs,
            },
            n_dim: 2,
            dhat: vec![e1, e2, e3],
        }
    }

    #[test]
    fn su2_representation_validates() {
        let rep = su2();
        let report = validate_rep(&rep, &Tolerance::default()).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
    }

    #[test]
    fn broken_bracket_is_reported_not_thrown() {
        let mut rep = su2();
        rep.lie.structure_constants[0][1][2] = 0.5;
        let report = validate_rep(&rep, &Tolerance::default()).unwrap();
        assert!(!report.passed());
        assert!(report.failures().contains(&"bracket_compatibility"));
    }

    #[test]
    fn duplicate_generators_are_unfaithful() {
        let d = ComplexMatrix::diagonal(&[c64(0.0, 1.0), c64(0.0, -1.0)]);
        let rep = MatrixRep {
            lie: LieAlgebraSpec::abelian(2),
            n_dim: 2,
            dhat: vec![d.clone(), d],
        };
        let report = validate_rep(&rep, &Tolerance::default()).unwrap();
        assert!(report.failures().contains(&"faithful"));
    }

    #[test]
    fn trace_correction_removes_trace() {
        let d = ComplexMatrix::diagonal(&[c64(0.0, 2.0), c64(0.0, 1.0)]);
        let rep = MatrixRep {
            lie: LieAlgebraSpec::abelian(1),
            n_dim: 2,
            dhat: vec![d],
        };
        let (fixed, removed) = rep.trace_corrected();
        assert!((removed[0] - c64(0.0, 1.5)).norm() < 1e-15);
        assert!(fixed.dhat[0].trace().unwrap().norm() < 1e-15);
    }

    #[test]
    fn derivation_leibniz_on_fixed_matrices() {
        let rep = su2();
        let a = ComplexMatrix::from_rows(vec![
            vec![c64(1.0, 2.0), c64(0.0, 1.0)],
            vec![c64(3.0, 0.0), c64(0.5, -1.0)],
        ])
        .unwrap();
        let b = a.adjoint();
        let coeffs = [0.3, -1.2, 0.7];
        let tol = Tolerance::default();
        let dab = derivation_apply(&rep, &coeffs, &a.matmul(&b).unwrap()).unwrap();
        let leibniz = derivation_apply(&rep, &coeffs, &a)
            .unwrap()
            .matmul(&b)
            .unwrap()
            .add(&a.matmul(&derivation_apply(&rep, &coeffs, &b).unwrap()).unwrap())
            .unwrap();
        assert!(dab.approx_eq(&leibniz, &tol));

        // Anti-hermitian Dhat makes the derivation a *-derivation:
        // [D, A†] = ([D, A])†.
        let da = derivation_apply(&rep, &coeffs, &a).unwrap();
        let dad = derivation_apply(&rep, &coeffs, &a.adjoint()).unwrap();
        assert!(dad.approx_eq(&da.adjoint(), &tol));
    }

    #[test]
    fn rep_serde_roundtrip_revalidates() {
        let rep = su2();
        let json = serde_json::to_string(&rep).unwrap();
        let back: MatrixRep = serde_json::from_str(&json).unwrap();
        assert!(validate_rep(&back, &Tolerance::default()).unwrap().passed());
    }
}
