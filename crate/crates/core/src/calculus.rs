//! Calculus instances: a represented Lie algebra together with a generating
//! map into the row-vector module (C^N)^m, plus free-module variants.

use crate::error::{CalcError, Result};
use crate::lie::{validate_rep, MatrixRep};
use crate::matrix::{ComplexMatrix, CVector, C64};
use crate::report::ValidationReport;
use crate::spectrum::{eig_antihermitian_sorted, rank, singular_values, SpectrumBlocks};
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};

/// A real calculus over Mat(N): a faithful representation together with an
/// R-linear map phi sending each generator ∂_i to a module element
/// `phi[i]` in (C^N)^m (row vector of length N*m) that generates the module.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalculusInstance {
    pub rep: MatrixRep,
    pub module_rank: usize,
    pub phi: Vec<CVector>,
}

impl CalculusInstance {
    /// Number of Lie algebra generators.
    pub fn lie_dim(&self) -> usize {
        self.rep.lie.dim
    }

    /// Matrix size N.
    pub fn n_dim(&self) -> usize {
        self.rep.n_dim
    }

    /// `phi` applied to the Lie algebra element with real coefficients
    /// `coeffs` (R-linearity of phi).
    pub fn phi_combo(&self, coeffs: &[f64]) -> Result<CVector> {
        if coeffs.len() != self.lie_dim() {
            return Err(CalcError::Shape(format!(
                "expected {} coefficients, got {}",
                self.lie_dim(),
                coeffs.len()
            )));
        }
        let mut out = CVector::zeros(self.n_dim() * self.module_rank);
        for (c, v) in coeffs.iter().zip(&self.phi) {
            out = out.add(&v.scale(C64::new(*c, 0.0)))?;
        }
        Ok(out)
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        if self.module_rank == 0 {
            return Err(CalcError::Shape("module rank must be nonzero".into()));
        }
        if self.phi.len() != self.lie_dim() {
            return Err(CalcError::Shape(format!(
                "phi must map all {} generators, got {} images",
                self.lie_dim(),
                self.phi.len()
            )));
        }
        let want = self.n_dim() * self.module_rank;
        for (i, v) in self.phi.iter().enumerate() {
            if v.len() != want {
                return Err(CalcError::Shape(format!(
                    "phi[{i}] has length {}, expected {want}",
                    v.len()
                )));
            }
        }
        Ok(())
    }
}

/// Right action of `a` in Mat(N) on a module row vector: every length-N
/// block of `v` is multiplied by `a` on the right.
pub fn module_action(v: &CVector, a: &ComplexMatrix, n_dim: usize) -> Result<CVector> {
    if !a.is_square() || a.rows() != n_dim {
        return Err(CalcError::Shape(format!(
            "module action requires an {n_dim}x{n_dim} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if n_dim == 0 || !v.len().is_multiple_of(n_dim) {
        return Err(CalcError::Shape(format!(
            "vector length {} is not a multiple of N = {n_dim}",
            v.len()
        )));
    }
    let m = v.len() / n_dim;
    let mut out = CVector::zeros(v.len());
    for i in 0..m {
        out.set_block(i, &v.block(i, n_dim)?.mat_mul(a)?)?;
    }
    Ok(out)
}

/// The m x (N*n) generation matrix: block row i, block column j holds the
/// i-th slot of `phi[j]`. The map (A_1, ..., A_n) -> Σ_j phi[j] A_j onto
/// (C^N)^m is surjective iff this matrix has full row rank m.
pub fn generation_matrix(c: &CalculusInstance) -> Result<ComplexMatrix> {
    c.check_shapes()?;
    let (n, m, nd) = (c.lie_dim(), c.module_rank, c.n_dim());
    let mut v = ComplexMatrix::zeros(m, nd * n);
    for j in 0..n {
        for i in 0..m {
            let blk = c.phi[j].block(i, nd)?;
            for (col, z) in blk.0.iter().enumerate() {
                v.set(i, j * nd + col, *z);
            }
        }
    }
    Ok(v)
}

/// Validates a calculus instance: all representation checks plus generation
/// (phi images generate (C^N)^m as a right module).
///
/// Shape inconsistencies are hard errors; semantic failures are report entries.
pub fn validate_calculus(c: &CalculusInstance, tol: &Tolerance) -> Result<ValidationReport> {
    c.check_shapes()?;
    let mut report = validate_rep(&c.rep, tol)?;
    let v = generation_matrix(c)?;
    let r = rank(&v, tol);
    report.push("generation", r == c.module_rank, Some(r as f64));
    Ok(report)
}

/// A calculus canonicalized to diagonal form, together with the unitary that
/// produced it and the spectrum blocks of the generator.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub instance: CalculusInstance,
    /// Unitary `U` with `U† Dhat U` equal to the block-diagonal spectrum.
    pub transform: ComplexMatrix,
    pub blocks: SpectrumBlocks,
}

/// Canonicalizes a calculus with a one-dimensional Lie algebra: diagonalizes
/// the single generator to descending-imaginary block-diagonal form and maps
/// phi along, `phi'[0] = phi[0] (1_m ⊗ U)`.
///
/// The canonical generator is the exact block-diagonal matrix built from the
/// clustered spectrum, so downstream zero-pattern segmentation is exact.
pub fn canonical_diag_1d(c: &CalculusInstance, tol: &Tolerance) -> Result<CanonicalForm> {
    c.check_shapes()?;
    if c.lie_dim() != 1 {
        return Err(CalcError::Unsupported(format!(
            "canonicalization requires a one-dimensional Lie algebra, got dim {}",
            c.lie_dim()
        )));
    }
    let blocks = eig_antihermitian_sorted(&c.rep.dhat[0], tol)?;
    let u = blocks.diagonalizer.clone();
    let phi_new = module_action(&c.phi[0], &u, c.n_dim())?;
    let mut rep = c.rep.clone();
    rep.dhat = vec![blocks.block_diagonal()];
    Ok(CanonicalForm {
        instance: CalculusInstance {
            rep,
            module_rank: c.module_rank,
            phi: vec![phi_new],
        },
        transform: u,
        blocks,
    })
}

/// A free calculus: the module is A^n with a chosen basis, and phi sends the
/// i-th generator to the i-th basis element. `basis_images[i][j]` is the j-th
/// N x N block of the basis element associated with ∂_i.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeCalculusInstance {
    pub rep: MatrixRep,
    pub basis_images: Vec<Vec<ComplexMatrix>>,
}

impl FreeCalculusInstance {
    pub fn lie_dim(&self) -> usize {
        self.rep.lie.dim
    }

    pub fn n_dim(&self) -> usize {
        self.rep.n_dim
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let (n, nd) = (self.lie_dim(), self.n_dim());
        if self.basis_images.len() != n {
            return Err(CalcError::Shape(format!(
                "expected {n} basis elements, got {}",
                self.basis_images.len()
            )));
        }
        for (i, e) in self.basis_images.iter().enumerate() {
            if e.len() != n {
                return Err(CalcError::Shape(format!(
                    "basis element {i} has {} blocks, expected {n}",
                    e.len()
                )));
            }
            for (j, b) in e.iter().enumerate() {
                if b.rows() != nd || b.cols() != nd {
                    return Err(CalcError::Shape(format!(
                        "basis block ({i}, {j}) is {}x{}, expected {nd}x{nd}",
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(())
    }

    /// The (N*n) x (N*n) stack with block row j, block column l holding the
    /// j-th block of basis element l. An element with stacked blocks M equals
    /// `Σ_l ê_l A^l` iff `M = F A` for the stacked coordinates A.
    pub fn basis_stack(&self) -> Result<ComplexMatrix> {
        self.check_shapes()?;
        let (n, nd) = (self.lie_dim(), self.n_dim());
        let mut f = ComplexMatrix::zeros(n * nd, n * nd);
        for l in 0..n {
            for j in 0..n {
                f.set_block(j * nd, l * nd, &self.basis_images[l][j])?;
            }
        }
        Ok(f)
    }

    /// Coordinates of a module element (given as its n blocks) in this basis.
    pub fn coords_of(&self, element: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let (n, nd) = (self.lie_dim(), self.n_dim());
        if element.len() != n || element.iter().any(|m| m.rows() != nd || m.cols() != nd) {
            return Err(CalcError::Shape("element blocks do not match the module shape".into()));
        }
        let f = self.basis_stack()?;
        let finv = f
            .try_inverse()
            .ok_or_else(|| CalcError::Invalid("basis stack is not invertible".into()))?;
        let mut stacked = ComplexMatrix::zeros(n * nd, nd);
        for (j, b) in element.iter().enumerate() {
            stacked.set_block(j * nd, 0, b)?;
        }
        let coords = finv.matmul(&stacked)?;
        (0..n).map(|l| coords.block(l * nd, 0, nd, nd)).collect()
    }

    /// The module element `Σ_l ê_l A^l` for the given coordinates.
    pub fn element_of(&self, coords: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        let (n, nd) = (self.lie_dim(), self.n_dim());
        if coords.len() != n || coords.iter().any(|m| m.rows() != nd || m.cols() != nd) {
            return Err(CalcError::Shape("coordinates do not match the module shape".into()));
        }
        let mut out = vec![ComplexMatrix::zeros(nd, nd); n];
        for l in 0..n {
            for (j, o) in out.iter_mut().enumerate() {
                *o = o.add(&self.basis_images[l][j].matmul(&coords[l])?)?;
            }
        }
        Ok(out)
    }
}

/// Validates a free calculus: representation checks plus invertibility of the
/// basis stack (the basis must actually be a basis of A^n).
pub fn validate_free_calculus(f: &FreeCalculusInstance, tol: &Tolerance) -> Result<ValidationReport> {
    f.check_shapes()?;
    let mut report = validate_rep(&f.rep, tol)?;
    let sv = singular_values(&f.basis_stack()?);
    let smin = sv.last().copied().unwrap_or(0.0);
    let smax = sv.first().copied().unwrap_or(0.0);
    report.push("basis_invertible", smin > tol.threshold(smax), Some(smin));
    Ok(report)
}
