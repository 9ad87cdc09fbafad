//! Metrics on the three module shapes: C^N with a scalar metric, (C^N)^n
//! with an aligned-anchor metric, and free modules A^n with a block metric.

use crate::calculus::CalculusInstance;
use crate::error::{CalcError, Result};
use crate::matrix::{CVector, ComplexMatrix, C64};
use crate::spectrum::singular_values;
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};

/// Metric on the module C^N: h_x(u, v) = x u†v with real x != 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarMetric {
    pub x: f64,
}

impl ScalarMetric {
    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        if !self.x.is_finite() || self.x.abs() <= tol.eps() {
            return Err(CalcError::Degenerate(
                "scalar metric requires a nonzero real x".into(),
            ));
        }
        Ok(())
    }
}

/// Metric on (C^N)^n with aligned anchors phi(∂_i) = (0, ..., alpha_i v0,
/// ..., 0): determined by a real symmetric invertible matrix Mtilde via
/// h(e_i, e_j) = Mtilde_{ij} v0†v0 on the anchors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlignedMetric {
    #[serde(rename = "Mtilde")]
    pub mtilde: Vec<Vec<f64>>,
    pub v0: CVector,
    pub alphas: Vec<f64>,
}

impl AlignedMetric {
    /// Number of module slots n.
    pub fn rank(&self) -> usize {
        self.alphas.len()
    }

    /// Matrix size N.
    pub fn n_dim(&self) -> usize {
        self.v0.len()
    }

    /// Coefficient of u_i†v_j in the metric: mu_{ij} = Mtilde_{ij} /
    /// (alpha_i alpha_j).
    pub fn mu(&self, i: usize, j: usize) -> f64 {
        self.mtilde[i][j] / (self.alphas[i] * self.alphas[j])
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        let n = self.rank();
        if n == 0 || self.n_dim() == 0 {
            return Err(CalcError::Shape("aligned metric must be nonempty".into()));
        }
        if self.mtilde.len() != n || self.mtilde.iter().any(|r| r.len() != n) {
            return Err(CalcError::Shape(format!(
                "Mtilde must be {n}x{n} to match {n} alphas"
            )));
        }
        let scale = self
            .mtilde
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let thr = tol.threshold(scale);
        for i in 0..n {
            for j in 0..n {
                if (self.mtilde[i][j] - self.mtilde[j][i]).abs() > thr {
                    return Err(CalcError::Invalid("Mtilde is not symmetric".into()));
                }
            }
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, C64::new(self.mtilde[i][j], 0.0));
            }
        }
        let sv = singular_values(&m);
        let (smax, smin) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
        if smin <= tol.threshold(smax) {
            return Err(CalcError::Degenerate("Mtilde is not invertible".into()));
        }
        if (self.v0.norm() - 1.0).abs() > tol.threshold(1.0) {
            return Err(CalcError::Invalid("anchor v0 must be a unit vector".into()));
        }
        if self.alphas.iter().any(|a| !a.is_finite() || a.abs() <= tol.eps()) {
            return Err(CalcError::Degenerate("alphas must be nonzero reals".into()));
        }
        Ok(())
    }
}

/// Metric on a free module A^n: hblocks[i][j] = h(ê_i, ê_j), an N x N matrix.
/// Hermitian-form structure forces hblocks[i][j] = hblocks[j][i]†.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeMetric {
    pub hblocks: Vec<Vec<ComplexMatrix>>,
}

impl FreeMetric {
    pub fn rank(&self) -> usize {
        self.hblocks.len()
    }

    pub fn n_dim(&self) -> usize {
        self.hblocks
            .first()
            .and_then(|r| r.first())
            .map(|m| m.rows())
            .unwrap_or(0)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let n = self.rank();
        let nd = self.n_dim();
        if n == 0 || nd == 0 {
            return Err(CalcError::Shape("free metric must be nonempty".into()));
        }
        for (i, row) in self.hblocks.iter().enumerate() {
            if row.len() != n {
                return Err(CalcError::Shape(format!(
                    "hblocks row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, b) in row.iter().enumerate() {
                if b.rows() != nd || b.cols() != nd {
                    return Err(CalcError::Shape(format!(
                        "hblocks[{i}][{j}] is {}x{}, expected {nd}x{nd}",
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Worst deviation from the hermitian-form pairing h_{ij} = h_{ji}†.
    pub fn pairing_residual(&self) -> f64 {
        let n = self.rank();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if let Ok(d) = self.hblocks[i][j].sub(&self.hblocks[j][i].adjoint()) {
                    worst = worst.max(d.max_abs());
                }
            }
        }
        worst
    }

    /// Worst deviation of the values from being hermitian matrices, the extra
    /// requirement of a real metric calculus.
    pub fn hermitian_values_residual(&self) -> f64 {
        self.hblocks
            .iter()
            .flatten()
            .fold(0.0f64, |m, b| m.max(b.hermitian_residual()))
    }

    /// The (Nn) x (Nn) block matrix with block (k, l) = hblocks[k][l].
    pub fn big_matrix(&self) -> Result<ComplexMatrix> {
        self.check_shapes()?;
        let (n, nd) = (self.rank(), self.n_dim());
        let mut big = ComplexMatrix::zeros(n * nd, n * nd);
        for k in 0..n {
            for l in 0..n {
                big.set_block(k * nd, l * nd, &self.hblocks[k][l])?;
            }
        }
        Ok(big)
    }

    pub fn is_invertible(&self, tol: &Tolerance) -> Result<bool> {
        let sv = singular_values(&self.big_matrix()?);
        match (sv.first(), sv.last()) {
            (Some(&smax), Some(&smin)) => Ok(smin > tol.threshold(smax)),
            _ => Ok(false),
        }
    }
}

/// A metric for any of the supported module shapes, tagged for serialization.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Scalar(ScalarMetric),
    Aligned(AlignedMetric),
    Free(FreeMetric),
}

impl MetricSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpec::Scalar(_) => "scalar",
            MetricSpec::Aligned(_) => "aligned",
            MetricSpec::Free(_) => "free",
        }
    }
}

/// h_x(u, v) = x u†v as an N x N matrix.
pub fn eval_scalar_metric(h: &ScalarMetric, u: &CVector, v: &CVector) -> Result<ComplexMatrix> {
    if u.len() != v.len() {
        return Err(CalcError::Shape(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.dagger_dot(v).scale(C64::new(h.x, 0.0)))
}

/// Aligned metric on block vectors: h(u, v) = Σ_{ij} mu_{ij} u_i†v_j.
pub fn eval_aligned_metric(h: &AlignedMetric, u: &CVector, v: &CVector) -> Result<ComplexMatrix> {
    let n = h.rank();
    let nd = h.n_dim();
    if u.len() != n * nd || v.len() != n * nd {
        return Err(CalcError::Shape(format!(
            "expected {n} blocks of length {nd}, got vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut out = ComplexMatrix::zeros(nd, nd);
    for i in 0..n {
        let ui = u.block(i, nd)?;
        for j in 0..n {
            let vj = v.block(j, nd)?;
            let term = ui.dagger_dot(&vj).scale(C64::new(h.mu(i, j), 0.0));
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

/// Free metric on coordinate tuples: h(Σ ê_l A^l, Σ ê_k B^k) =
/// Σ_{lk} (A^l)† h_{lk} B^k.
pub fn eval_free_metric(
    h: &FreeMetric,
    a_coords: &[ComplexMatrix],
    b_coords: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    h.check_shapes()?;
    let n = h.rank();
    let nd = h.n_dim();
    if a_coords.len() != n || b_coords.len() != n {
        return Err(CalcError::Shape(format!(
            "expected {n} coordinate matrices on each side"
        )));
    }
    if a_coords
        .iter()
        .chain(b_coords)
        .any(|m| m.rows() != nd || m.cols() != nd)
    {
        return Err(CalcError::Shape(format!(
            "coordinates must be {nd}x{nd} matrices"
        )));
    }
    let mut out = ComplexMatrix::zeros(nd, nd);
    for l in 0..n {
        let al = a_coords[l].adjoint();
        for k in 0..n {
            let term = al.matmul(&h.hblocks[l][k])?.matmul(&b_coords[k])?;
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

/// Recovers the scalar x from a claimed metric value H = h(e_1, e_1) on C^N.
/// The module structure forces H = x E_11; anything else is rejected.
pub fn validate_metric_on_cn(h: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    if !h.is_square() || h.rows() == 0 {
        return Err(CalcError::Shape("metric value must be square".into()));
    }
    let x = h.get(0, 0);
    let thr = tol.threshold(h.max_abs());
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            if (i, j) == (0, 0) {
                continue;
            }
            if h.get(i, j).norm() > thr {
                return Err(CalcError::Invalid(
                    "metric value is not of the forced shape x E_11".into(),
                ));
            }
        }
    }
    if x.im.abs() > tol.threshold(x.norm()) {
        return Err(CalcError::Degenerate("metric scalar is not real".into()));
    }
    if x.re.abs() <= tol.eps() {
        return Err(CalcError::Degenerate("metric scalar vanishes".into()));
    }
    Ok(x.re)
}

/// True when the metric values on all generator pairs are hermitian matrices
/// and the metric's own invariants hold. Free metrics pair with free
/// instances and are rejected here.
pub fn is_real_metric_calculus(
    c: &CalculusInstance,
    metric: &MetricSpec,
    tol: &Tolerance,
) -> Result<bool> {
    c.check_shapes()?;
    match metric {
        MetricSpec::Scalar(s) => {
            if c.module_rank != 1 {
                return Err(CalcError::Shape(
                    "scalar metric applies to the module C^N".into(),
                ));
            }
            if s.validate(tol).is_err() {
                return Ok(false);
            }
            for i in 0..c.lie_dim() {
                for j in 0..c.lie_dim() {
                    let v = eval_scalar_metric(s, &c.phi[i], &c.phi[j])?;
                    if v.hermitian_residual() > tol.threshold(v.max_abs()) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        MetricSpec::Aligned(a) => {
            if a.rank() != c.module_rank || a.n_dim() != c.n_dim() {
                return Err(CalcError::Shape(
                    "aligned metric shape does not match the instance".into(),
                ));
            }
            if a.validate(tol).is_err() {
                return Ok(false);
            }
            for i in 0..c.lie_dim() {
                for j in 0..c.lie_dim() {
                    let v = eval_aligned_metric(a, &c.phi[i], &c.phi[j])?;
                    if v.hermitian_residual() > tol.threshold(v.max_abs()) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        MetricSpec::Free(_) => Err(CalcError::Shape(
            "free metrics pair with a free calculus; use is_real_free_metric_calculus".into(),
        )),
    }
}

/// Real-metric-calculus check for a free module: the pairing property, the
/// hermiticity of all values, and invertibility of the block matrix.
pub fn is_real_free_metric_calculus(
    n: usize,
    n_dim: usize,
    h: &FreeMetric,
    tol: &Tolerance,
) -> Result<bool> {
    h.check_shapes()?;
    if h.rank() != n || h.n_dim() != n_dim {
        return Err(CalcError::Shape(format!(
            "metric is {}x{} blocks of size {}, instance needs {n} of size {n_dim}",
            h.rank(),
            h.rank(),
            h.n_dim()
        )));
    }
    let scale = h
        .hblocks
        .iter()
        .flatten()
        .fold(0.0f64, |m, b| m.max(b.max_abs()));
    let thr = tol.threshold(scale);
    Ok(h.pairing_residual() <= thr
        && h.hermitian_values_residual() <= thr
        && h.is_invertible(tol)?)
}
