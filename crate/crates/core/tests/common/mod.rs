//! Shared random builders for the integration test ensembles. Everything is
//! driven by a seeded ChaCha8 stream so every run sees the same instances.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realcalc::{CVector, CalculusInstance, ComplexMatrix, LieAlgebraSpec, MatrixRep, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

/// Random unitary by Gram-Schmidt on random complex vectors; retries the rare
/// near-dependent draw.
pub fn random_unitary(r: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    'outer: loop {
        let mut rows: Vec<CVector> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v = CVector((0..dim).map(|_| rand_c(r)).collect());
            for prev in &rows {
                let overlap = v.dot_dagger(prev);
                v = v.sub(&prev.scale(overlap)).unwrap();
            }
            let n = v.norm();
            if n < 1e-6 {
                continue 'outer;
            }
            rows.push(v.scale(c(1.0 / n, 0.0)));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, &z) in row.0.iter().enumerate() {
                m.set(i, j, z);
            }
        }
        return m;
    }
}

/// Exact block-diagonal anti-hermitian matrix from (imaginary part,
/// multiplicity) blocks.
pub fn diag_lift(blocks: &[(f64, usize)]) -> ComplexMatrix {
    let entries: Vec<C64> = blocks
        .iter()
        .flat_map(|&(im, mult)| std::iter::repeat_n(c(0.0, im), mult))
        .collect();
    ComplexMatrix::diagonal(&entries)
}

/// One-generator abelian instance acting on C^N.
pub fn vector_instance_1d(dhat: ComplexMatrix, phi: CVector) -> CalculusInstance {
    CalculusInstance {
        rep: MatrixRep {
            lie: LieAlgebraSpec::abelian(1),
            n_dim: dhat.rows(),
            dhat: vec![dhat],
        },
        module_rank: 1,
        phi: vec![phi],
    }
}

/// Random spectrum for a trace-free anti-hermitian N x N generator:
/// descending distinct imaginary parts on a 0.5-spaced grid, shifted to make
/// the weighted sum vanish. For N >= 3 the block count stays below N, so at
/// least one eigenvalue repeats.
pub fn random_spectrum(r: &mut ChaCha8Rng, n_dim: usize) -> Vec<(f64, usize)> {
    assert!(n_dim >= 2);
    let k = if n_dim == 2 {
        2
    } else {
        r.random_range(2..=(n_dim - 1).min(4))
    };
    let mut mults = vec![1usize; k];
    for _ in 0..(n_dim - k) {
        let j = r.random_range(0..k);
        mults[j] += 1;
    }
    // Distinct grid values, descending. The grid spacing keeps clusters well
    // separated under any later real rescaling by magnitude >= 0.3.
    let mut grid: Vec<f64> = (-8..=8).map(|t| t as f64 * 0.5).collect();
    for i in (1..grid.len()).rev() {
        let j = r.random_range(0..=i);
        grid.swap(i, j);
    }
    let mut vals: Vec<f64> = grid.into_iter().take(k).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let weighted: f64 = vals.iter().zip(&mults).map(|(v, &m)| v * m as f64).sum();
    let shift = weighted / n_dim as f64;
    vals.iter()
        .zip(mults)
        .map(|(v, m)| (v - shift, m))
        .collect()
}

/// Fills the phi segments of the given zero pattern with random entries; each
/// live segment ends with norm >= 0.3 so the pattern is read back exactly.
pub fn phi_for_pattern(r: &mut ChaCha8Rng, spectrum: &[(f64, usize)], bits: &[bool]) -> CVector {
    let n_dim: usize = spectrum.iter().map(|&(_, m)| m).sum();
    let mut phi = CVector::zeros(n_dim);
    let mut start = 0usize;
    for (&(_, mult), &bit) in spectrum.iter().zip(bits) {
        if bit {
            for t in 0..mult {
                phi.0[start + t] = rand_c(r);
            }
            let seg: f64 = phi.0[start..start + mult]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            if seg < 0.3 {
                phi.0[start] += c(1.0, 0.0);
            }
        }
        start += mult;
    }
    phi
}

/// Random nonzero pattern of length k.
pub fn random_pattern(r: &mut ChaCha8Rng, k: usize) -> Vec<bool> {
    let mut bits: Vec<bool> = (0..k).map(|_| r.random_range(0..2) == 1).collect();
    if !bits.iter().any(|&b| b) {
        bits[r.random_range(0..k)] = true;
    }
    bits
}

/// Seeded one-generator instance together with the data that produced it.
pub struct RandomVectorInstance {
    pub instance: CalculusInstance,
    pub spectrum: Vec<(f64, usize)>,
    pub bits: Vec<bool>,
}

/// Random canonical-frame instance on C^N (diagonal generator, pattern-true
/// segments populated).
pub fn random_vector_instance(r: &mut ChaCha8Rng, n_dim: usize) -> RandomVectorInstance {
    let spectrum = random_spectrum(r, n_dim);
    let bits = random_pattern(r, spectrum.len());
    let phi = phi_for_pattern(r, &spectrum, &bits);
    RandomVectorInstance {
        instance: vector_instance_1d(diag_lift(&spectrum), phi),
        spectrum,
        bits,
    }
}

/// Applies an admissible transformation to a one-generator instance:
/// Dhat -> U* (mu Dhat) U with U unitary, phi -> x phi U with x nonzero.
/// The result is isomorphic to the input by construction.
pub fn transform_instance(
    r: &mut ChaCha8Rng,
    a: &CalculusInstance,
    mu: f64,
    x: C64,
) -> CalculusInstance {
    let n_dim = a.n_dim();
    let u = random_unitary(r, n_dim);
    let d = u
        .adjoint()
        .matmul(&a.rep.dhat[0].scale(c(mu, 0.0)))
        .unwrap()
        .matmul(&u)
        .unwrap();
    let phi = realcalc::module_action(&a.phi[0], &u, n_dim)
        .unwrap()
        .scale(x);
    vector_instance_1d(d, phi)
}

/// Random nonzero complex scalar bounded away from zero.
pub fn random_nonzero_scalar(r: &mut ChaCha8Rng) -> C64 {
    let mag = r.random_range(0.4..1.6);
    let angle = r.random_range(0.0..std::f64::consts::TAU);
    c(mag * angle.cos(), mag * angle.sin())
}

/// Random signed real scalar with |mu| in [0.5, 2).
pub fn random_real_mu(r: &mut ChaCha8Rng) -> f64 {
    let mag = r.random_range(0.5..2.0);
    if r.random_range(0..2) == 1 {
        -mag
    } else {
        mag
    }
}

/// Commuting independent trace-free imaginary diagonals: n rows of N grid
/// values, resampled until they are linearly independent over R.
pub fn independent_diagonals(r: &mut ChaCha8Rng, n: usize, n_dim: usize) -> Vec<Vec<f64>> {
    assert!(n < n_dim, "independent trace-free diagonals need n < N");
    for _ in 0..200 {
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let mut vals: Vec<f64> = (0..n_dim)
                .map(|_| r.random_range(-4..=4i32) as f64 * 0.5)
                .collect();
            let shift: f64 = vals.iter().sum::<f64>() / n_dim as f64;
            for v in &mut vals {
                *v -= shift;
            }
            rows.push(vals);
        }
        let mut m = ComplexMatrix::zeros(n, n_dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, c(v, 0.0));
            }
        }
        let sv = realcalc::singular_values(&m);
        if sv.len() >= n && sv[n - 1] > 0.1 {
            return rows;
        }
    }
    panic!("could not sample {n} independent diagonals of size {n_dim}");
}

/// Abelian aligned-anchor instance: commuting lifts Q diag Q*, anchors
/// alpha_i v0 on slot i with v0 the dagger of column `col` of Q, so v0 is a
/// common unit eigenvector with eigenvalues i*diags[i][col].
pub struct AlignedAnchorInstance {
    pub instance: CalculusInstance,
    pub mtilde: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub v0: CVector,
    pub diags: Vec<Vec<f64>>,
    pub col: usize,
}

pub fn aligned_anchor_instance(r: &mut ChaCha8Rng, n: usize, n_dim: usize) -> AlignedAnchorInstance {
    let diags = independent_diagonals(r, n, n_dim);
    let q = random_unitary(r, n_dim);
    let col = r.random_range(0..n_dim);
    let dhat: Vec<ComplexMatrix> = diags
        .iter()
        .map(|row| {
            let lam = diag_lift(&row.iter().map(|&v| (v, 1)).collect::<Vec<_>>());
            q.matmul(&lam).unwrap().matmul(&q.adjoint()).unwrap()
        })
        .collect();
    let v0 = CVector((0..n_dim).map(|t| q.get(t, col).conj()).collect());
    let alphas: Vec<f64> = (0..n).map(|_| random_real_mu(r)).collect();
    let mut phi = Vec::with_capacity(n);
    for (i, &alpha) in alphas.iter().enumerate() {
        let mut v = CVector::zeros(n * n_dim);
        v.set_block(i, &v0.scale(c(alpha, 0.0))).unwrap();
        phi.push(v);
    }
    let mtilde = random_symmetric_invertible(r, n);
    AlignedAnchorInstance {
        instance: CalculusInstance {
            rep: MatrixRep {
                lie: LieAlgebraSpec::abelian(n),
                n_dim,
                dhat,
            },
            module_rank: n,
            phi,
        },
        mtilde,
        alphas,
        v0,
        diags,
        col,
    }
}

/// Real symmetric matrix 1 + 0.3 S with S random symmetric, resampled until
/// comfortably invertible.
pub fn random_symmetric_invertible(r: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    for _ in 0..200 {
        let mut m = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in i..n {
                let s = 0.3 * r.random_range(-1.0..1.0);
                m[i][j] = s + if i == j { 1.0 } else { 0.0 };
                m[j][i] = m[i][j];
            }
        }
        let mut cm = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                cm.set(i, j, c(m[i][j], 0.0));
            }
        }
        let sv = realcalc::singular_values(&cm);
        if sv.last().copied().unwrap_or(0.0) > 0.2 {
            return m;
        }
    }
    panic!("could not sample an invertible symmetric {n}x{n} matrix");
}

/// Random hermitian matrix with entries bounded by 1.
pub fn random_hermitian(r: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m.set(i, i, c(r.random_range(-1.0..1.0), 0.0));
        for j in (i + 1)..dim {
            let z = rand_c(r) * 0.5;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}
