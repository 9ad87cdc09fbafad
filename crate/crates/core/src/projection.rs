//! Projections of free modules: realizing anchored calculi as P(A^n) and
//! transporting metrics and connections across the projection.

use crate::calculus::{CalculusInstance, FreeCalculusInstance};
use crate::error::{CalcError, Result};
use crate::matrix::{commutator, unitary_with_first_row, CVector, ComplexMatrix, C64};
use crate::metric::FreeMetric;
use crate::connection::ConnectionSpec;
use crate::spectrum::rank;
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};

/// A projection of the free module A^n, acting on basis elements by
/// P(ê_j) = Σ_k ê_k p^k_j with `pblocks[k][j]` = p^k_j.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub pblocks: Vec<Vec<ComplexMatrix>>,
}

impl ProjectionSpec {
    pub fn rank(&self) -> usize {
        self.pblocks.len()
    }

    pub fn n_dim(&self) -> usize {
        self.pblocks
            .first()
            .and_then(|r| r.first())
            .map(|m| m.rows())
            .unwrap_or(0)
    }

    /// P with every diagonal block the same matrix p and zero off-diagonal
    /// blocks, the shape produced by the anchor construction.
    pub fn diagonal(n: usize, p: &ComplexMatrix) -> Self {
        let nd = p.rows();
        let pblocks = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        if k == j {
                            p.clone()
                        } else {
                            ComplexMatrix::zeros(nd, nd)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { pblocks }
    }

    pub fn identity(n: usize, nd: usize) -> Self {
        Self::diagonal(n, &ComplexMatrix::identity(nd))
    }

    pub fn check_shapes(&self) -> Result<()> {
        let n = self.rank();
        let nd = self.n_dim();
        if n == 0 || nd == 0 {
            return Err(CalcError::Shape("projection must be nonempty".into()));
        }
        if self.pblocks.iter().any(|r| r.len() != n)
            || self
                .pblocks
                .iter()
                .flatten()
                .any(|b| b.rows() != nd || b.cols() != nd)
        {
            return Err(CalcError::Shape(format!(
                "projection blocks must form an {n}x{n} array of {nd}x{nd} matrices"
            )));
        }
        Ok(())
    }

    /// Worst deviation of Σ_l p^k_l p^l_j from p^k_j.
    pub fn idempotency_residual(&self) -> Result<f64> {
        self.check_shapes()?;
        let n = self.rank();
        let nd = self.n_dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for j in 0..n {
                let mut acc = ComplexMatrix::zeros(nd, nd);
                for l in 0..n {
                    acc = acc.add(&self.pblocks[k][l].matmul(&self.pblocks[l][j])?)?;
                }
                worst = worst.max(acc.sub(&self.pblocks[k][j])?.max_abs());
            }
        }
        Ok(worst)
    }

    pub fn is_idempotent(&self, tol: &Tolerance) -> Result<bool> {
        let scale = self
            .pblocks
            .iter()
            .flatten()
            .fold(0.0f64, |m, b| m.max(b.max_abs()));
        Ok(self.idempotency_residual()? <= tol.threshold(scale * scale.max(1.0)))
    }

    /// Coordinates of P(m) for an element with the given coordinates.
    pub fn apply_coords(&self, coords: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        self.check_shapes()?;
        let n = self.rank();
        let nd = self.n_dim();
        if coords.len() != n || coords.iter().any(|m| m.rows() != nd || m.cols() != nd) {
            return Err(CalcError::Shape("coordinates do not match the projection".into()));
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = ComplexMatrix::zeros(nd, nd);
            for (j, b) in coords.iter().enumerate() {
                acc = acc.add(&self.pblocks[k][j].matmul(b)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// The (Nn) x (Nn) block matrix of the projection.
    pub fn big_matrix(&self) -> Result<ComplexMatrix> {
        self.check_shapes()?;
        let n = self.rank();
        let nd = self.n_dim();
        let mut big = ComplexMatrix::zeros(n * nd, n * nd);
        for k in 0..n {
            for j in 0..n {
                big.set_block(k * nd, j * nd, &self.pblocks[k][j])?;
            }
        }
        Ok(big)
    }

    /// Extracts the common diagonal block when the projection has the anchor
    /// shape (equal hermitian diagonal blocks, vanishing off-diagonal ones).
    fn anchor_block(&self, tol: &Tolerance) -> Result<ComplexMatrix> {
        self.check_shapes()?;
        let n = self.rank();
        let p = &self.pblocks[0][0];
        let scale = p.max_abs().max(1.0);
        for k in 0..n {
            for j in 0..n {
                let b = &self.pblocks[k][j];
                let ok = if k == j {
                    b.approx_eq(p, tol)
                } else {
                    b.max_abs() <= tol.threshold(scale)
                };
                if !ok {
                    return Err(CalcError::Unsupported(
                        "projection does not have the anchor shape (equal diagonal blocks)".into(),
                    ));
                }
            }
        }
        if p.hermitian_residual() > tol.threshold(scale) {
            return Err(CalcError::Unsupported(
                "projection diagonal block is not hermitian".into(),
            ));
        }
        Ok(p.clone())
    }
}

/// The rank-1 hermitian idempotent p = v0†v0 / |v0|² onto the anchor: p² = p,
/// p† = p, and v0 p = v0.
pub fn projection_from_anchor(v0: &CVector) -> Result<ComplexMatrix> {
    let nsq = v0.norm().powi(2);
    if nsq == 0.0 {
        return Err(CalcError::Degenerate("anchor vector vanishes".into()));
    }
    Ok(v0.dagger_dot(v0).scale(C64::new(1.0 / nsq, 0.0)))
}

/// An anchored calculus realized inside a free module: the free calculus with
/// basis ê_i = (0, ..., α_i A, ..., 0), the projection with diagonal blocks
/// p, and the unitary A (first row v0/|v0|) identifying C^N with p A.
#[derive(Clone, Debug, Serialize)]
pub struct SplitRealization {
    pub free: FreeCalculusInstance,
    pub projection: ProjectionSpec,
    pub embed: ComplexMatrix,
}

/// Embeds a block vector as a free module element: block k becomes the matrix
/// whose first row is the k-th block of v.
fn first_row_embed(v: &CVector, n: usize, nd: usize) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let b = v.block(k, nd)?;
        let mut m = ComplexMatrix::zeros(nd, nd);
        for (j, &x) in b.0.iter().enumerate() {
            m.set(0, j, x);
        }
        out.push(m);
    }
    Ok(out)
}

/// Realizes an anchored calculus as a projection of a free one. For n = 1 any
/// nonzero anchor works; for n > 1 the anchors must be aligned along a common
/// direction with real nonzero weights.
pub fn build_split_realization(c: &CalculusInstance, tol: &Tolerance) -> Result<SplitRealization> {
    c.check_shapes()?;
    let n = c.lie_dim();
    let nd = c.n_dim();
    if c.module_rank != n {
        return Err(CalcError::Unsupported(
            "the split realization needs module rank equal to the lie dimension".into(),
        ));
    }

    // Detect the common anchor direction and the real weights.
    let w0 = c.phi[0].block(0, nd)?;
    let u0 = w0.normalized(tol).ok_or_else(|| {
        CalcError::Unsupported("the first anchor has no usable direction".into())
    })?;
    let mut alphas = Vec::with_capacity(n);
    for i in 0..n {
        let phi = &c.phi[i];
        let scale = phi.norm();
        for j in 0..n {
            if j != i && phi.block(j, nd)?.norm() > tol.threshold(scale) {
                return Err(CalcError::Unsupported(format!(
                    "anchor {i} is not supported on slot {i} alone"
                )));
            }
        }
        let w = phi.block(i, nd)?;
        let alpha = w.dot_dagger(&u0);
        if alpha.im.abs() > tol.threshold(alpha.norm())
            || alpha.re.abs() <= tol.eps()
            || w.sub(&u0.scale(alpha))?.norm() > tol.threshold(scale)
        {
            return Err(CalcError::Unsupported(format!(
                "anchor {i} is not a nonzero real multiple of the common direction"
            )));
        }
        alphas.push(alpha.re);
    }

    let a = unitary_with_first_row(&u0, tol)?;
    let basis_images = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        a.scale(C64::new(alphas[i], 0.0))
                    } else {
                        ComplexMatrix::zeros(nd, nd)
                    }
                })
                .collect()
        })
        .collect();
    let free = FreeCalculusInstance {
        rep: c.rep.clone(),
        basis_images,
    };
    let p = projection_from_anchor(&u0)?;
    let projection = ProjectionSpec::diagonal(n, &p);

    // P(ê_i) must reproduce the original generator under the first-row
    // identification of C^N with p A.
    for i in 0..n {
        let coords: Vec<ComplexMatrix> = (0..n)
            .map(|l| {
                if l == i {
                    ComplexMatrix::identity(nd)
                } else {
                    ComplexMatrix::zeros(nd, nd)
                }
            })
            .collect();
        let projected = projection.apply_coords(&coords)?;
        let embedded = first_row_embed(&c.phi[i], n, nd)?;
        for l in 0..n {
            // Block l of Σ_k ê_k (projected coords)^k.
            let mut block = ComplexMatrix::zeros(nd, nd);
            for (k, pc) in projected.iter().enumerate() {
                block = block.add(&free.basis_images[k][l].matmul(pc)?)?;
            }
            if !block.approx_eq(&embedded[l], tol) {
                return Err(CalcError::Invalid(format!(
                    "projected basis element {i} does not reproduce the anchor"
                )));
            }
        }
    }

    Ok(SplitRealization {
        free,
        projection,
        embed: a,
    })
}

fn check_projection_metric_shapes(p: &ProjectionSpec, h: &FreeMetric) -> Result<()> {
    p.check_shapes()?;
    h.check_shapes()?;
    if p.rank() != h.rank() || p.n_dim() != h.n_dim() {
        return Err(CalcError::Shape(
            "projection and metric shapes do not match".into(),
        ));
    }
    Ok(())
}

fn metric_scale(h: &FreeMetric) -> f64 {
    h.hblocks
        .iter()
        .flatten()
        .fold(1.0f64, |m, b| m.max(b.max_abs()))
}

/// True iff h(P(ê_i), ê_j) = h(ê_i, P(ê_j)) on all basis pairs, i.e.
/// Σ_k (p^k_i)† h_{kj} = Σ_k h_{ik} p^k_j.
pub fn is_orthogonal_projection(
    p: &ProjectionSpec,
    h: &FreeMetric,
    tol: &Tolerance,
) -> Result<bool> {
    check_projection_metric_shapes(p, h)?;
    let n = p.rank();
    let nd = p.n_dim();
    let pscale = p
        .pblocks
        .iter()
        .flatten()
        .fold(1.0f64, |m, b| m.max(b.max_abs()));
    let thr = tol.threshold(metric_scale(h) * pscale);
    for i in 0..n {
        for j in 0..n {
            let mut lhs = ComplexMatrix::zeros(nd, nd);
            let mut rhs = ComplexMatrix::zeros(nd, nd);
            for k in 0..n {
                lhs = lhs.add(&p.pblocks[k][i].adjoint().matmul(&h.hblocks[k][j])?)?;
                rhs = rhs.add(&h.hblocks[i][k].matmul(&p.pblocks[k][j])?)?;
            }
            if lhs.sub(&rhs)?.max_abs() > thr {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Restricts an orthogonal metric to the projected module: the components on
/// the projected generators are h(P(ê_i), P(ê_j)) = Σ_k h_{ik} p^k_j. The
/// restricted Gram data must keep the rank of the projection.
pub fn restrict_metric(p: &ProjectionSpec, h: &FreeMetric, tol: &Tolerance) -> Result<FreeMetric> {
    if !is_orthogonal_projection(p, h, tol)? {
        return Err(CalcError::Invalid(
            "the projection is not orthogonal for this metric".into(),
        ));
    }
    let n = p.rank();
    let nd = p.n_dim();
    let mut hblocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = ComplexMatrix::zeros(nd, nd);
            for k in 0..n {
                acc = acc.add(&h.hblocks[i][k].matmul(&p.pblocks[k][j])?)?;
            }
            row.push(acc);
        }
        hblocks.push(row);
    }
    let restricted = FreeMetric { hblocks };
    if rank(&restricted.big_matrix()?, tol) != rank(&p.big_matrix()?, tol) {
        return Err(CalcError::Degenerate(
            "the restricted metric is degenerate on the projected module".into(),
        ));
    }
    Ok(restricted)
}

/// The extra condition for the restricted pair to stay a real metric
/// calculus: Σ_k h_{jk} p^k_i = Σ_k h_{ik} p^k_j for all i, j. Needs the
/// symmetric-array hypothesis h_{ij} = h_{ji}.
pub fn metric_symmetry_condition(
    p: &ProjectionSpec,
    h: &FreeMetric,
    tol: &Tolerance,
) -> Result<bool> {
    check_projection_metric_shapes(p, h)?;
    let n = p.rank();
    let nd = p.n_dim();
    let hscale = metric_scale(h);
    for i in 0..n {
        for j in 0..n {
            if h.hblocks[i][j].sub(&h.hblocks[j][i])?.max_abs() > tol.threshold(hscale) {
                return Err(CalcError::Invalid(
                    "the symmetry condition needs h_{ij} = h_{ji}".into(),
                ));
            }
        }
    }
    let pscale = p
        .pblocks
        .iter()
        .flatten()
        .fold(1.0f64, |m, b| m.max(b.max_abs()));
    let thr = tol.threshold(hscale * pscale);
    for i in 0..n {
        for j in 0..n {
            let mut lhs = ComplexMatrix::zeros(nd, nd);
            let mut rhs = ComplexMatrix::zeros(nd, nd);
            for k in 0..n {
                lhs = lhs.add(&h.hblocks[j][k].matmul(&p.pblocks[k][i])?)?;
                rhs = rhs.add(&h.hblocks[i][k].matmul(&p.pblocks[k][j])?)?;
            }
            if lhs.sub(&rhs)?.max_abs() > thr {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pushes a Christoffel connection through an anchor-shaped projection:
/// Γ^k_{ij} = Γ̃^k_{ij} p + δ^k_j ∂_i(p), the coefficients of P∘∇̃ on the
/// projected generators.
pub fn project_connection(
    p: &ProjectionSpec,
    conn: &ConnectionSpec,
    f: &FreeCalculusInstance,
    tol: &Tolerance,
) -> Result<ConnectionSpec> {
    let gammas = match conn {
        ConnectionSpec::Christoffel { gammas } => gammas,
        _ => {
            return Err(CalcError::Unsupported(
                "only christoffel connections can be projected".into(),
            ))
        }
    };
    f.check_shapes()?;
    let n = f.lie_dim();
    let nd = f.n_dim();
    if p.rank() != n || p.n_dim() != nd {
        return Err(CalcError::Shape(
            "projection shape does not match the free module".into(),
        ));
    }
    if gammas.len() != n
        || gammas.iter().any(|b| b.len() != n)
        || gammas.iter().flatten().any(|r| r.len() != n)
        || gammas
            .iter()
            .flatten()
            .flatten()
            .any(|m| m.rows() != nd || m.cols() != nd)
    {
        return Err(CalcError::Shape(
            "christoffel tensor shape does not match the free module".into(),
        ));
    }
    let pb = p.anchor_block(tol)?;
    if !p.is_idempotent(tol)? {
        return Err(CalcError::Invalid("projection is not idempotent".into()));
    }
    let mut out = vec![vec![Vec::with_capacity(n); n]; n];
    for i in 0..n {
        let dp = commutator(&f.rep.dhat[i], &pb)?;
        for j in 0..n {
            for k in 0..n {
                let mut g = gammas[i][j][k].matmul(&pb)?;
                if k == j {
                    g = g.add(&dp)?;
                }
                out[i][j].push(g);
            }
        }
    }
    Ok(ConnectionSpec::Christoffel { gammas: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::tests::diag_1d;
    use crate::lie::{LieAlgebraSpec, MatrixRep};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn anchor_projection_examples() {
        let tol = Tolerance::default();
        let p = projection_from_anchor(&CVector(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11.set(0, 0, c(1.0, 0.0));
        assert!(p.approx_eq(&e11, &tol));

        let p = projection_from_anchor(&CVector(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let half = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(p.approx_eq(&half, &tol));

        // Complex anchor: p must be hermitian, idempotent, and fix v0.
        let s = 1.0 / 2.0f64.sqrt();
        let v0 = CVector(vec![c(s, 0.0), c(0.0, s)]);
        let p = projection_from_anchor(&v0).unwrap();
        assert!(p.hermitian_residual() < 1e-12);
        assert!(p.matmul(&p).unwrap().approx_eq(&p, &tol));
        assert!(v0.mat_mul(&p).unwrap().approx_eq(&v0, &tol));
        let expect = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.0, 0.5)],
            vec![c(0.0, -0.5), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(p.approx_eq(&expect, &tol));

        assert!(projection_from_anchor(&CVector::zeros(2)).is_err());
    }

    #[test]
    fn split_realization_on_cn() {
        let tol = Tolerance::default();
        let inst = diag_1d(&[1.0, -1.0], &[c(1.0, 0.0), c(0.0, 0.0)]);
        let split = build_split_realization(&inst, &tol).unwrap();
        assert!(split.embed.approx_eq(&ComplexMatrix::identity(2), &tol));
        assert_eq!(split.projection.rank(), 1);
        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11.set(0, 0, c(1.0, 0.0));
        assert!(split.projection.pblocks[0][0].approx_eq(&e11, &tol));
        assert!(split.projection.is_idempotent(&tol).unwrap());

        // Non-axis anchor: the embed must be unitary with first row v0.
        let s = 1.0 / 2.0f64.sqrt();
        let inst = diag_1d(&[1.0, -1.0], &[c(s, 0.0), c(s, 0.0)]);
        let split = build_split_realization(&inst, &tol).unwrap();
        assert!(split.embed.is_unitary(&tol));
        let first = split.embed.row(0);
        assert!(first.approx_eq(&inst.phi[0], &tol));
    }

    fn aligned_two() -> CalculusInstance {
        // Faithful abelian pair on N = 3 sharing the eigenvector e_1, with
        // anchors of weight 2 and 3 on their own slots.
        let lie = LieAlgebraSpec::abelian(2);
        let d1 = ComplexMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let d2 = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)]);
        let rep = MatrixRep {
            lie,
            n_dim: 3,
            dhat: vec![d1, d2],
        };
        let mut p1 = CVector::zeros(6);
        p1.0[0] = c(2.0, 0.0);
        let mut p2 = CVector::zeros(6);
        p2.0[3] = c(3.0, 0.0);
        CalculusInstance {
            rep,
            module_rank: 2,
            phi: vec![p1, p2],
        }
    }

    #[test]
    fn split_realization_aligned() {
        let tol = Tolerance::default();
        let inst = aligned_two();
        let split = build_split_realization(&inst, &tol).unwrap();
        assert_eq!(split.projection.rank(), 2);
        // Basis blocks are α_i A on the diagonal slots.
        let a = &split.embed;
        assert!(split.free.basis_images[0][0].approx_eq(&a.scale(c(2.0, 0.0)), &tol));
        assert!(split.free.basis_images[1][1].approx_eq(&a.scale(c(3.0, 0.0)), &tol));
        assert!(split.free.basis_images[0][1].approx_zero(&tol));
        let report =
            crate::calculus::validate_free_calculus(&split.free, &tol).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures());
    }

    #[test]
    fn split_realization_rejects_misaligned_anchors() {
        let tol = Tolerance::default();
        let mut inst = aligned_two();
        // Second anchor points along a different direction.
        let mut p2 = CVector::zeros(6);
        p2.0[4] = c(3.0, 0.0);
        inst.phi[1] = p2;
        assert!(matches!(
            build_split_realization(&inst, &tol),
            Err(CalcError::Unsupported(_))
        ));
    }

    fn scalar_blocks(mtilde: &[Vec<f64>], nd: usize) -> FreeMetric {
        let hblocks = mtilde
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| ComplexMatrix::identity(nd).scale(c(x, 0.0)))
                    .collect()
            })
            .collect();
        FreeMetric { hblocks }
    }

    #[test]
    fn orthogonality_detection() {
        let tol = Tolerance::default();
        let v0 = CVector(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let p = projection_from_anchor(&v0).unwrap();
        let proj = ProjectionSpec::diagonal(2, &p);
        let h = scalar_blocks(&[vec![1.0, 0.5], vec![0.5, 2.0]], 2);
        assert!(is_orthogonal_projection(&proj, &h, &tol).unwrap());
        assert!(is_orthogonal_projection(&ProjectionSpec::identity(2, 2), &h, &tol).unwrap());

        // A non-hermitian idempotent fails against the identity metric.
        let skew = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let proj = ProjectionSpec::diagonal(1, &skew);
        let h = scalar_blocks(&[vec![1.0]], 2);
        assert!(proj.is_idempotent(&tol).unwrap());
        assert!(!is_orthogonal_projection(&proj, &h, &tol).unwrap());
    }

    #[test]
    fn metric_restriction() {
        let tol = Tolerance::default();
        let v0 = CVector(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let p = projection_from_anchor(&v0).unwrap();
        let proj = ProjectionSpec::diagonal(2, &p);
        let mtilde = vec![vec![1.0, 0.5], vec![0.5, 2.0]];
        let h = scalar_blocks(&mtilde, 2);
        let restricted = restrict_metric(&proj, &h, &tol).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = p.scale(c(mtilde[i][j], 0.0));
                assert!(restricted.hblocks[i][j].approx_eq(&expect, &tol));
            }
        }

        // The identity projection leaves the metric unchanged.
        let same = restrict_metric(&ProjectionSpec::identity(2, 2), &h, &tol).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(same.hblocks[i][j].approx_eq(&h.hblocks[i][j], &tol));
            }
        }

        // Non-orthogonal projections are rejected.
        let skew = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let proj = ProjectionSpec::diagonal(1, &skew);
        let h1 = scalar_blocks(&[vec![1.0]], 2);
        assert!(matches!(
            restrict_metric(&proj, &h1, &tol),
            Err(CalcError::Invalid(_))
        ));
    }

    #[test]
    fn symmetry_condition_cases() {
        let tol = Tolerance::default();
        // Single index: trivially true.
        let p1 = ProjectionSpec::diagonal(1, &projection_from_anchor(&CVector(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap());
        let h1 = scalar_blocks(&[vec![1.0]], 2);
        assert!(metric_symmetry_condition(&p1, &h1, &tol).unwrap());

        // Aligned construction: scalar blocks and equal p blocks agree.
        let p = projection_from_anchor(&CVector(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let proj = ProjectionSpec::diagonal(2, &p);
        let h = scalar_blocks(&[vec![1.0, 0.5], vec![0.5, 2.0]], 2);
        assert!(metric_symmetry_condition(&proj, &h, &tol).unwrap());

        // Different diagonal blocks break the condition for constant h.
        let mut e11 = ComplexMatrix::zeros(2, 2);
        e11.set(0, 0, c(1.0, 0.0));
        let mut e22 = ComplexMatrix::zeros(2, 2);
        e22.set(1, 1, c(1.0, 0.0));
        let zero = ComplexMatrix::zeros(2, 2);
        let proj = ProjectionSpec {
            pblocks: vec![vec![e11, zero.clone()], vec![zero, e22]],
        };
        let ones = scalar_blocks(&[vec![1.0, 1.0], vec![1.0, 1.0]], 2);
        assert!(!metric_symmetry_condition(&proj, &ones, &tol).unwrap());
    }

    #[test]
    fn connection_projection() {
        let tol = Tolerance::default();
        let lie = LieAlgebraSpec::abelian(1);
        let d = ComplexMatrix::diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let rep = MatrixRep {
            lie,
            n_dim: 2,
            dhat: vec![d.clone()],
        };
        let f = FreeCalculusInstance {
            rep,
            basis_images: vec![vec![ComplexMatrix::identity(2)]],
        };

        // Identity projection: the connection comes back unchanged.
        let mut g = ComplexMatrix::zeros(2, 2);
        g.set(0, 1, c(0.3, 0.1));
        let conn = ConnectionSpec::Christoffel {
            gammas: vec![vec![vec![g.clone()]]],
        };
        let out = project_connection(&ProjectionSpec::identity(1, 2), &conn, &f, &tol).unwrap();
        match &out {
            ConnectionSpec::Christoffel { gammas } => {
                assert!(gammas[0][0][0].approx_eq(&g, &tol));
            }
            _ => panic!("expected christoffel output"),
        }

        // Flat connection with an eigenvector anchor: ∂(p) = 0, so the
        // projected connection vanishes.
        let p = projection_from_anchor(&CVector(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let proj = ProjectionSpec::diagonal(1, &p);
        let flat = ConnectionSpec::Christoffel {
            gammas: vec![vec![vec![ComplexMatrix::zeros(2, 2)]]],
        };
        let out = project_connection(&proj, &flat, &f, &tol).unwrap();
        match &out {
            ConnectionSpec::Christoffel { gammas } => {
                assert!(gammas[0][0][0].approx_zero(&tol));
            }
            _ => panic!("expected christoffel output"),
        }

        // Non-christoffel input is rejected.
        let scalar = ConnectionSpec::LambdaScalar { lambda: c(0.0, 0.0) };
        assert!(matches!(
            project_connection(&proj, &scalar, &f, &tol),
            Err(CalcError::Unsupported(_))
        ));
    }

    #[test]
    fn projection_serde_shape() {
        let p = ProjectionSpec::identity(1, 2);
        let js = serde_json::to_string(&p).unwrap();
        assert!(js.contains("\"pblocks\""));
        let back: ProjectionSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back.rank(), 1);
    }
}
