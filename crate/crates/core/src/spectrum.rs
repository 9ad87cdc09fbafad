//! Eigendecomposition of anti-hermitian matrices and rank utilities.
//!
//! An anti-hermitian matrix has purely imaginary spectrum. The decomposition
//! here clusters eigenvalues into blocks of equal imaginary part, sorted in
//! descending order; that block structure is the single source of truth for
//! every classification step downstream.

use crate::error::{CalcError, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};

/// One eigenvalue block: a purely imaginary eigenvalue with its multiplicity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumBlock {
    /// Eigenvalue with the real part fixed to exactly zero.
    pub eigenvalue: C64,
    pub multiplicity: usize,
}

/// Clustered spectrum of an anti-hermitian matrix.
///
/// Blocks are sorted by descending imaginary part and multiplicities sum to
/// the matrix dimension. The diagonalizer is unitary with eigenvector columns
/// grouped per block, so `V† D V` is the block-diagonal form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumBlocks {
    pub blocks: Vec<SpectrumBlock>,
    pub diagonalizer: ComplexMatrix,
}

impl SpectrumBlocks {
    /// Total dimension (sum of multiplicities).
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity).sum()
    }

    /// Number of distinct eigenvalue blocks.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// Imaginary parts repeated with multiplicity, in descending order.
    pub fn imag_parts(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            out.extend(std::iter::repeat_n(b.eigenvalue.im, b.multiplicity));
        }
        out
    }

    /// The block-diagonal matrix with each eigenvalue repeated along the
    /// diagonal according to its multiplicity.
    pub fn block_diagonal(&self) -> ComplexMatrix {
        let mut diag = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            diag.extend(std::iter::repeat_n(b.eigenvalue, b.multiplicity));
        }
        ComplexMatrix::diagonal(&diag)
    }

    /// Half-open column range of block `j` inside the diagonalizer.
    pub fn block_range(&self, j: usize) -> (usize, usize) {
        let start: usize = self.blocks[..j].iter().map(|b| b.multiplicity).sum();
        (start, start + self.blocks[j].multiplicity)
    }
}

/// Eigendecomposition of an anti-hermitian matrix with eigenvalues clustered
/// into blocks of equal imaginary part, sorted in descending order.
///
/// Eigenvalues whose imaginary parts differ by at most `tol.threshold(scale)`
/// are merged into one block; real parts are forced to exactly zero. The
/// returned diagonalizer `V` is unitary with `V (block diagonal) V† = D`.
pub fn eig_antihermitian_sorted(d: &ComplexMatrix, tol: &Tolerance) -> Result<SpectrumBlocks> {
    if !d.is_square() {
        return Err(CalcError::Shape(format!(
            "eigendecomposition requires a square matrix, got {}x{}",
            d.rows(),
            d.cols()
        )));
    }
    let scale = d.max_abs();
    if d.anti_hermitian_residual() > tol.threshold(scale) {
        return Err(CalcError::Invalid(format!(
            "matrix is not anti-hermitian within tolerance (residual {:.3e})",
            d.anti_hermitian_residual()
        )));
    }

    // D = i H with H hermitian; work on the exactly hermitian part so the
    // solver sees a symmetric problem regardless of rounding in the input.
    let n = d.rows();
    let minus_i = C64::new(0.0, -1.0);
    let h_raw = d.sub(&d.adjoint())?.scale(minus_i).scale(C64::new(0.5, 0.0));
    let h = h_raw.add(&h_raw.adjoint())?.scale(C64::new(0.5, 0.0));
    let se = h.to_na().symmetric_eigen();

    // Sort eigenpairs by descending eigenvalue of H (= imaginary part of D).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let sorted_w: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut v = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            v.set(r, dst, se.eigenvectors[(r, src)]);
        }
    }

    // Chain clustering: a gap of at most the threshold joins two eigenvalues
    // into the same block.
    let w_scale = sorted_w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let gap = tol.threshold(w_scale);
    let mut blocks: Vec<SpectrumBlock> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || sorted_w[i - 1] - sorted_w[i] > gap {
            let mean: f64 = sorted_w[start..i].iter().sum::<f64>() / (i - start) as f64;
            blocks.push(SpectrumBlock {
                eigenvalue: C64::new(0.0, mean),
                multiplicity: i - start,
            });
            start = i;
        }
    }

    let mut out = SpectrumBlocks { blocks, diagonalizer: v };
    reorthonormalize_blocks(&mut out)?;
    Ok(out)
}

/// Modified Gram-Schmidt inside each eigenvalue block. The solver already
/// returns an orthonormal basis; this removes rounding drift between columns
/// that were merged into one block.
fn reorthonormalize_blocks(s: &mut SpectrumBlocks) -> Result<()> {
    let n = s.dim();
    for j in 0..s.k() {
        let (lo, hi) = s.block_range(j);
        for c in lo..hi {
            for prev in lo..c {
                let mut dot = C64::new(0.0, 0.0);
                for r in 0..n {
                    dot += s.diagonalizer.get(r, prev).conj() * s.diagonalizer.get(r, c);
                }
                for r in 0..n {
                    let v = s.diagonalizer.get(r, c) - dot * s.diagonalizer.get(r, prev);
                    s.diagonalizer.set(r, c, v);
                }
            }
            let mut nrm = 0.0;
            for r in 0..n {
                nrm += s.diagonalizer.get(r, c).norm_sqr();
            }
            let nrm = nrm.sqrt();
            if nrm == 0.0 {
                return Err(CalcError::Degenerate("eigenvector column collapsed".into()));
            }
            for r in 0..n {
                let v = s.diagonalizer.get(r, c) / nrm;
                s.diagonalizer.set(r, c, v);
            }
        }
    }
    Ok(())
}

/// Singular values of a complex matrix in descending order.
///
/// Computed from the realified 2r x 2c matrix [[Re, -Im], [Im, Re]], whose
/// singular values are those of the complex matrix each repeated twice.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let (r, c) = (m.rows(), m.cols());
    let mut real = nalgebra::DMatrix::<f64>::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = m.get(i, j);
            real[(i, j)] = z.re;
            real[(i, j + c)] = -z.im;
            real[(i + r, j)] = z.im;
            real[(i + r, j + c)] = z.re;
        }
    }
    let svd = real.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.into_iter().step_by(2).collect()
}

/// Numerical rank: the number of singular values above
/// `tol.threshold(largest singular value)`.
pub fn rank(m: &ComplexMatrix, tol: &Tolerance) -> usize {
    let sv = singular_values(m);
    let thr = tol.threshold(sv.first().copied().unwrap_or(0.0));
    sv.into_iter().filter(|s| *s > thr).count()
}
