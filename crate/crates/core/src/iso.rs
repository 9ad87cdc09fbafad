//! Isomorphism witnesses for calculi over Mat(N): verification of a claimed
//! triple (U, psi, X) and a bounded heuristic search for one.

use crate::calculus::{canonical_diag_1d, CalculusInstance, FreeCalculusInstance};
use crate::classify::{quasi_equivalent_1d, zero_pattern};
use crate::error::{CalcError, Result};
use crate::lie::{LieAlgebraSpec, MatrixRep};
use crate::matrix::{direct_sum, unitary_with_first_row, CVector, ComplexMatrix, C64};
use crate::spectrum::{eig_antihermitian_sorted, singular_values};
use crate::tol::Tolerance;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A claimed isomorphism between two calculi with the same Lie algebra and
/// module (C^N)^n: a conjugation U in GL(N), a Lie algebra automorphism psi
/// given by its real basis matrix (column i holds the coefficients of
/// psi(∂_i)), and a module mixing X in GL(n) acting by X ⊗ U on row vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsoWitness {
    #[serde(rename = "U")]
    pub u: ComplexMatrix,
    pub psi: Vec<Vec<f64>>,
    #[serde(rename = "X")]
    pub x: ComplexMatrix,
}

impl IsoWitness {
    /// The identity witness for matrix size `n_dim`, Lie dimension `lie_dim`
    /// and module rank `module_rank`.
    pub fn identity(n_dim: usize, lie_dim: usize, module_rank: usize) -> IsoWitness {
        let mut psi = vec![vec![0.0; lie_dim]; lie_dim];
        for (i, row) in psi.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        IsoWitness {
            u: ComplexMatrix::identity(n_dim),
            psi,
            x: ComplexMatrix::identity(module_rank),
        }
    }
}

fn psi_shape(psi: &[Vec<f64>], n: usize) -> Result<()> {
    if psi.len() != n || psi.iter().any(|r| r.len() != n) {
        return Err(CalcError::Shape(format!(
            "psi must be a {n}x{n} real matrix"
        )));
    }
    Ok(())
}

/// Column i of psi: the coefficients of psi(∂_i) in the basis.
fn psi_column(psi: &[Vec<f64>], i: usize) -> Vec<f64> {
    psi.iter().map(|row| row[i]).collect()
}

fn psi_max_abs(psi: &[Vec<f64>]) -> f64 {
    psi.iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Worst deviation of psi from being a Lie algebra homomorphism:
/// psi([∂_i, ∂_j]) - [psi ∂_i, psi ∂_j], coefficient by coefficient.
fn automorphism_residual(lie: &LieAlgebraSpec, psi: &[Vec<f64>]) -> f64 {
    let n = lie.dim;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut lhs = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        lhs += psi[a][i] * psi[b][j] * lie.c(a, b, k);
                    }
                }
                let mut rhs = 0.0;
                for l in 0..n {
                    rhs += lie.c(i, j, l) * psi[k][l];
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

fn is_invertible(m: &ComplexMatrix, tol: &Tolerance) -> bool {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&smax), Some(&smin)) => smin > tol.threshold(smax),
        _ => false,
    }
}

fn real_as_complex(psi: &[Vec<f64>]) -> ComplexMatrix {
    let n = psi.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, row) in psi.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            m.set(i, j, C64::new(x, 0.0));
        }
    }
    m
}

/// psi is an invertible automorphism of the Lie algebra, within tolerance.
fn psi_is_automorphism(lie: &LieAlgebraSpec, psi: &[Vec<f64>], tol: &Tolerance) -> bool {
    let pmax = psi_max_abs(psi);
    if !pmax.is_finite() {
        return false;
    }
    let scale = lie.max_abs_constant() * pmax * pmax;
    if automorphism_residual(lie, psi) > tol.threshold(scale) {
        return false;
    }
    is_invertible(&real_as_complex(psi), tol)
}

fn structure_constants_match(a: &LieAlgebraSpec, b: &LieAlgebraSpec, tol: &Tolerance) -> bool {
    if a.dim != b.dim {
        return false;
    }
    let scale = a.max_abs_constant().max(b.max_abs_constant());
    let thr = tol.threshold(scale);
    for i in 0..a.dim {
        for j in 0..a.dim {
            for k in 0..a.dim {
                if (a.c(i, j, k) - b.c(i, j, k)).abs() > thr {
                    return false;
                }
            }
        }
    }
    true
}

/// Right action of X ⊗ U on a row vector with `x.rows()` blocks of length
/// `u.rows()`: block j of the result is Σ_l X_{lj} (v_l U).
fn row_kron_action(
    v: &CVector,
    x: &ComplexMatrix,
    u: &ComplexMatrix,
    n_dim: usize,
) -> Result<CVector> {
    let m = x.rows();
    if v.len() != m * n_dim {
        return Err(CalcError::Shape(format!(
            "vector length {} does not match {} blocks of size {n_dim}",
            v.len(),
            m
        )));
    }
    let moved: Vec<CVector> = (0..m)
        .map(|l| v.block(l, n_dim)?.mat_mul(u))
        .collect::<Result<_>>()?;
    let mut out = CVector::zeros(m * n_dim);
    for j in 0..m {
        let mut blk = CVector::zeros(n_dim);
        for (l, mv) in moved.iter().enumerate() {
            blk = blk.add(&mv.scale(x.get(l, j)))?;
        }
        out.set_block(j, &blk)?;
    }
    Ok(out)
}

/// Shared core of the compatibility checks: D̂_b(∂_i) = U⁻¹ D̂_a(psi ∂_i) U
/// for every basis generator.
fn compatible_reps(
    ra: &MatrixRep,
    rb: &MatrixRep,
    u: &ComplexMatrix,
    psi: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<bool> {
    ra.check_shapes()?;
    rb.check_shapes()?;
    if ra.n_dim != rb.n_dim {
        return Err(CalcError::Shape(format!(
            "matrix sizes differ: {} vs {}",
            ra.n_dim, rb.n_dim
        )));
    }
    if !structure_constants_match(&ra.lie, &rb.lie, tol) {
        return Err(CalcError::Shape(
            "Lie algebra specs differ between the two calculi".into(),
        ));
    }
    if u.rows() != ra.n_dim || u.cols() != ra.n_dim {
        return Err(CalcError::Shape(format!(
            "U must be {0}x{0}",
            ra.n_dim
        )));
    }
    psi_shape(psi, ra.lie.dim)?;
    if !psi_is_automorphism(&ra.lie, psi, tol) {
        return Ok(false);
    }
    if !is_invertible(u, tol) {
        return Ok(false);
    }
    let u_inv = match u.try_inverse() {
        Some(inv) => inv,
        None => return Ok(false),
    };
    for i in 0..ra.lie.dim {
        let mapped = ra.dhat_combo(&psi_column(psi, i))?;
        let rhs = u_inv.matmul(&mapped)?.matmul(u)?;
        if !rb.dhat[i].approx_eq(&rhs, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True when (U, psi) realizes a quasi-equivalence of the two derivation
/// representations: D̂_b(∂_i) = U⁻¹ D̂_a(psi ∂_i) U for every i. psi must be
/// an invertible automorphism and U invertible; failing either returns false.
pub fn check_compatible_pair(
    a: &CalculusInstance,
    b: &CalculusInstance,
    u: &ComplexMatrix,
    psi: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<bool> {
    a.check_shapes()?;
    b.check_shapes()?;
    compatible_reps(&a.rep, &b.rep, u, psi, tol)
}

/// Verifies a claimed isomorphism witness between calculi with module
/// (C^N)^n, n the Lie dimension: (U, psi) must be a compatible pair and
/// phi_b(∂_i) = phi_a(psi ∂_i) (X ⊗ U) must hold for every generator.
///
/// Module rank different from the Lie dimension is outside the scope of this
/// criterion and is rejected as `Unsupported`.
pub fn check_isomorphism_witness(
    a: &CalculusInstance,
    b: &CalculusInstance,
    w: &IsoWitness,
    tol: &Tolerance,
) -> Result<bool> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.module_rank != a.lie_dim() || b.module_rank != b.lie_dim() {
        return Err(CalcError::Unsupported(
            "the witness criterion requires module rank equal to the Lie dimension".into(),
        ));
    }
    if a.module_rank != b.module_rank {
        return Err(CalcError::Shape(format!(
            "module ranks differ: {} vs {}",
            a.module_rank, b.module_rank
        )));
    }
    let m = a.module_rank;
    if w.x.rows() != m || w.x.cols() != m {
        return Err(CalcError::Shape(format!("X must be {m}x{m}")));
    }
    if !compatible_reps(&a.rep, &b.rep, &w.u, &w.psi, tol)? {
        return Ok(false);
    }
    if !is_invertible(&w.x, tol) {
        return Ok(false);
    }
    for i in 0..a.lie_dim() {
        let pulled = a.phi_combo(&psi_column(&w.psi, i))?;
        let rhs = row_kron_action(&pulled, &w.x, &w.u, a.n_dim())?;
        if !b.phi[i].approx_eq(&rhs, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Isomorphism check for free calculi: with a free module the generating map
/// never obstructs, so (U, psi) being a compatible pair of the derivation
/// representations is the whole criterion.
pub fn check_free_isomorphism(
    a: &FreeCalculusInstance,
    b: &FreeCalculusInstance,
    u: &ComplexMatrix,
    psi: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<bool> {
    a.check_shapes()?;
    b.check_shapes()?;
    compatible_reps(&a.rep, &b.rep, u, psi, tol)
}

/// Builds a block GL map sending row vector `u` to `w` on the right:
/// rotate u onto the first axis, rotate back onto w's direction, then fix the
/// length. Both inputs must be nonzero.
fn gl_map(u: &CVector, w: &CVector, tol: &Tolerance) -> Result<ComplexMatrix> {
    let nu = u.norm();
    let nw = w.norm();
    let bu = unitary_with_first_row(&u.scale(C64::new(1.0 / nu, 0.0)), tol)?;
    let bw = unitary_with_first_row(&w.scale(C64::new(1.0 / nw, 0.0)), tol)?;
    let dim = u.len();
    // S = 1 + (|w|/|u| - 1) p_w stretches along w and fixes its complement.
    let mut s = ComplexMatrix::identity(dim);
    let alpha = C64::new(nw / nu - 1.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            let pw = w.0[i].conj() * w.0[j] / C64::new(nw * nw, 0.0);
            let cur = s.get(i, j);
            s.set(i, j, cur + alpha * pw);
        }
    }
    bu.adjoint().matmul(&bw)?.matmul(&s)
}

/// Structured witness construction for one generator acting on C^N, complete
/// relative to the classification: canonicalize both sides, match zero
/// patterns under a positive or negative scalar, and build U blockwise.
fn witness_1d(
    a: &CalculusInstance,
    b: &CalculusInstance,
    tol: &Tolerance,
) -> Result<Option<IsoWitness>> {
    let ca = canonical_diag_1d(a, tol)?;
    let cb = canonical_diag_1d(b, tol)?;
    let da = &ca.instance.rep.dhat[0];
    let db = &cb.instance.rep.dhat[0];
    let qe = quasi_equivalent_1d(da, db, tol)?;
    if !qe.is_quasi_equivalent() {
        return Ok(None);
    }
    let pa = zero_pattern(&ca.instance, tol)?;
    let pb = zero_pattern(&cb.instance, tol)?;
    if pa.k() != pb.k() {
        return Ok(None);
    }
    let k = pa.k();
    let va = &ca.instance.phi[0];
    let vb = &cb.instance.phi[0];

    let mut candidates: Vec<(f64, bool)> = Vec::new();
    if let Some(mu) = qe.positive_mu() {
        if pa == pb {
            candidates.push((mu, false));
        }
    }
    if let Some(mu) = qe.negative_mu() {
        if pa == pb.reversed() {
            candidates.push((mu, true));
        }
    }

    for (mu, reversed) in candidates {
        // Per a-block GL maps sending the phi segment to its target; identity
        // on blocks that are zero on both sides.
        let mut blocks_u: Vec<ComplexMatrix> = Vec::with_capacity(k);
        let mut ok = true;
        for j in 0..k {
            let (start, end) = ca.blocks.block_range(j);
            let mult = end - start;
            let target_idx = if reversed { k - 1 - j } else { j };
            if !pa.0[j] {
                blocks_u.push(ComplexMatrix::identity(mult));
                continue;
            }
            let u_seg = CVector(va.0[start..end].to_vec());
            let (tstart, tend) = cb.blocks.block_range(target_idx);
            debug_assert_eq!(mult, tend - tstart);
            let w_seg = CVector(vb.0[tstart..tend].to_vec())
                .scale(C64::new(1.0 / mu, 0.0));
            match gl_map(&u_seg, &w_seg, tol) {
                Ok(g) => blocks_u.push(g),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let g = direct_sum(&blocks_u)?;
        let uc = if reversed {
            // Permutation moving a-block j onto b-position k-1-j.
            let nd = a.n_dim();
            let mut r = ComplexMatrix::zeros(nd, nd);
            for j in 0..k {
                let (src, send) = ca.blocks.block_range(j);
                let (dst, _) = cb.blocks.block_range(k - 1 - j);
                for t in 0..(send - src) {
                    r.set(src + t, dst + t, C64::new(1.0, 0.0));
                }
            }
            g.matmul(&r)?
        } else {
            g
        };
        let u_total = ca
            .transform
            .matmul(&uc)?
            .matmul(&cb.transform.adjoint())?;
        let w = IsoWitness {
            u: u_total,
            psi: vec![vec![mu]],
            x: ComplexMatrix::identity(1),
        };
        if check_isomorphism_witness(a, b, &w, tol)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// A random unitary of the given size: orthonormalize the columns of a random
/// complex matrix, retrying on rank deficiency.
fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    loop {
        let mut cols: Vec<CVector> = Vec::with_capacity(dim);
        let mut full_rank = true;
        for _ in 0..dim {
            let mut v = CVector(
                (0..dim)
                    .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            );
            for c in &cols {
                let overlap = c.dot_dagger(&v).conj();
                v = v.sub(&c.scale(overlap)).unwrap();
            }
            let n = v.norm();
            if n < 1e-6 {
                full_rank = false;
                break;
            }
            cols.push(v.scale(C64::new(1.0 / n, 0.0)));
        }
        if !full_rank {
            continue;
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m.set(i, j, c.0[i]);
            }
        }
        return m;
    }
}

/// Random real invertible psi candidates for the search. Abelian algebras
/// accept any invertible matrix; otherwise stick to signed permutations and
/// let the automorphism filter decide.
fn sample_psi(trial: usize, n: usize, abelian: bool, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut psi = vec![vec![0.0; n]; n];
    match trial % 4 {
        0 => {
            for (i, row) in psi.iter_mut().enumerate() {
                row[i] = 1.0;
            }
        }
        1 => {
            for (i, row) in psi.iter_mut().enumerate() {
                row[i] = -1.0;
            }
        }
        2 => {
            // Signed permutation.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            for (i, &p) in perm.iter().enumerate() {
                psi[p][i] = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
            }
        }
        _ => {
            if abelian {
                for row in psi.iter_mut() {
                    for x in row.iter_mut() {
                        *x = rng.random_range(-2.0..2.0);
                    }
                }
            } else {
                let mut perm: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    perm.swap(i, j);
                }
                for (i, &p) in perm.iter().enumerate() {
                    psi[p][i] = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
                }
            }
        }
    }
    psi
}

/// Sorted imaginary spectra of D̂_b(∂_i) and D̂_a(psi ∂_i) agree for every i.
fn spectra_match(
    a: &CalculusInstance,
    b: &CalculusInstance,
    psi: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<bool> {
    for i in 0..a.lie_dim() {
        let ma = a.rep.dhat_combo(&psi_column(psi, i))?;
        let wa = eig_antihermitian_sorted(&ma, tol)?.imag_parts();
        let wb = eig_antihermitian_sorted(&b.rep.dhat[i], tol)?.imag_parts();
        let scale = wa
            .iter()
            .chain(&wb)
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let thr = tol.threshold(scale);
        if wa
            .iter()
            .zip(&wb)
            .any(|(x, y)| (x - y).abs() > thr)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Given U and psi, the best X for the module condition, solved column by
/// column through the normal equations. Returns None when the equations are
/// singular.
fn solve_x(
    a: &CalculusInstance,
    b: &CalculusInstance,
    psi: &[Vec<f64>],
    u: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Option<ComplexMatrix>> {
    let m = a.module_rank;
    let n = a.lie_dim();
    let nd = a.n_dim();
    // Row (i, component) of the design matrix holds block l of
    // phi_a(psi ∂_i) U in column l.
    let mut design = ComplexMatrix::zeros(n * nd, m);
    for i in 0..n {
        let pulled = a.phi_combo(&psi_column(psi, i))?;
        for l in 0..m {
            let moved = pulled.block(l, nd)?.mat_mul(u)?;
            for (comp, z) in moved.0.iter().enumerate() {
                design.set(i * nd + comp, l, *z);
            }
        }
    }
    let gram = design.adjoint().matmul(&design)?;
    if !is_invertible(&gram, tol) {
        return Ok(None);
    }
    let gram_inv = match gram.try_inverse() {
        Some(g) => g,
        None => return Ok(None),
    };
    let mut x = ComplexMatrix::zeros(m, m);
    for j in 0..m {
        let mut rhs = ComplexMatrix::zeros(n * nd, 1);
        for i in 0..n {
            let blk = b.phi[i].block(j, nd)?;
            for (comp, z) in blk.0.iter().enumerate() {
                rhs.set(i * nd + comp, 0, *z);
            }
        }
        let sol = gram_inv.matmul(&design.adjoint().matmul(&rhs)?)?;
        for l in 0..m {
            x.set(l, j, sol.get(l, 0));
        }
    }
    Ok(Some(x))
}

/// Bounded search for an isomorphism witness.
///
/// For one generator on C^N the structured construction is complete relative
/// to the isomorphism decision. In higher dimensions the search samples
/// automorphism candidates and conjugations assembled from eigenvector bases
/// of the generator with the widest spectrum, solving X by least squares; a
/// `None` result is not a proof of non-isomorphism there.
pub fn search_witness(
    a: &CalculusInstance,
    b: &CalculusInstance,
    budget: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<Option<IsoWitness>> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.module_rank != a.lie_dim() || b.module_rank != b.lie_dim() {
        return Err(CalcError::Unsupported(
            "witness search requires module rank equal to the Lie dimension".into(),
        ));
    }
    if a.n_dim() != b.n_dim() || a.lie_dim() != b.lie_dim() {
        return Err(CalcError::Shape(
            "instances have different matrix size or Lie dimension".into(),
        ));
    }
    if !structure_constants_match(&a.rep.lie, &b.rep.lie, tol) {
        return Err(CalcError::Shape(
            "Lie algebra specs differ between the two calculi".into(),
        ));
    }

    // Identity witness first: catches equal instances immediately.
    let id = IsoWitness::identity(a.n_dim(), a.lie_dim(), a.module_rank);
    if check_isomorphism_witness(a, b, &id, tol)? {
        return Ok(Some(id));
    }

    if a.lie_dim() == 1 {
        return witness_1d(a, b, tol);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let abelian = a.rep.lie.is_abelian(tol);
    for trial in 0..budget {
        let psi = sample_psi(trial, a.lie_dim(), abelian, &mut rng);
        if !psi_is_automorphism(&a.rep.lie, &psi, tol) {
            continue;
        }
        if !spectra_match(a, b, &psi, tol)? {
            continue;
        }
        // Anchor on the generator with the widest spectrum under psi; its
        // eigenbases on both sides give conjugation candidates.
        let mut anchor = 0usize;
        let mut best_spread = -1.0f64;
        let mut anchor_data = None;
        for g in 0..a.lie_dim() {
            let ma = a.rep.dhat_combo(&psi_column(&psi, g))?;
            let ea = eig_antihermitian_sorted(&ma, tol)?;
            let w = ea.imag_parts();
            let spread = w.first().copied().unwrap_or(0.0) - w.last().copied().unwrap_or(0.0);
            if spread > best_spread {
                best_spread = spread;
                anchor = g;
                anchor_data = Some(ea);
            }
        }
        let ea = match anchor_data {
            Some(e) => e,
            None => continue,
        };
        // The anchor index refers to the same basis slot on both sides.
        let eb = eig_antihermitian_sorted(&b.rep.dhat[anchor], tol)?;
        // Intra-block mixing: identity on even trials, random otherwise.
        let w_mix = if trial % 2 == 0 {
            ComplexMatrix::identity(a.n_dim())
        } else {
            let blocks: Vec<ComplexMatrix> = ea
                .blocks
                .iter()
                .map(|blk| random_unitary(blk.multiplicity, &mut rng))
                .collect();
            direct_sum(&blocks)?
        };
        let u = ea
            .diagonalizer
            .matmul(&w_mix)?
            .matmul(&eb.diagonalizer.adjoint())?;
        let x = match solve_x(a, b, &psi, &u, tol)? {
            Some(x) => x,
            None => continue,
        };
        let w = IsoWitness { u, psi, x };
        if check_isomorphism_witness(a, b, &w, tol)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
