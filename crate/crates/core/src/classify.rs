//! Classification of calculi over a one-dimensional Lie algebra: zero
//! patterns of the generating vector over the spectrum blocks, scalar
//! quasi-equivalence of generators, the full isomorphism decision, and
//! counting/enumeration of isomorphism classes for a fixed block count.

use crate::calculus::{canonical_diag_1d, CalculusInstance};
use crate::error::{CalcError, Result};
use crate::matrix::ComplexMatrix;
use crate::spectrum::eig_antihermitian_sorted;
use crate::tol::Tolerance;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which spectrum blocks of a canonical generator carry a nonzero segment of
/// the generating vector. Bit j corresponds to the j-th block in descending
/// eigenvalue order; `true` means nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZeroPattern(pub Vec<bool>);

impl ZeroPattern {
    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// The pattern read back to front (the image under spectrum negation).
    pub fn reversed(&self) -> ZeroPattern {
        let mut bits = self.0.clone();
        bits.reverse();
        ZeroPattern(bits)
    }

    pub fn any_nonzero(&self) -> bool {
        self.0.iter().any(|&b| b)
    }
}

impl fmt::Display for ZeroPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Clusters the diagonal of an already canonical generator into blocks,
/// returning (imaginary part, multiplicity) per block. Errors with
/// `MustCanonicalize` when the matrix is not diagonal with descending
/// imaginary parts.
fn canonical_diag_blocks(d: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<(f64, usize)>> {
    if !d.is_square() {
        return Err(CalcError::Shape(format!(
            "generator must be square, got {}x{}",
            d.rows(),
            d.cols()
        )));
    }
    let nd = d.rows();
    if nd == 0 {
        return Err(CalcError::Shape("generator must be nonempty".into()));
    }
    let thr = tol.threshold(d.max_abs());
    for i in 0..nd {
        for j in 0..nd {
            if i != j && d.get(i, j).norm() > thr {
                return Err(CalcError::MustCanonicalize(
                    "generator is not diagonal; canonicalize first".into(),
                ));
            }
        }
        if d.get(i, i).re.abs() > thr {
            return Err(CalcError::MustCanonicalize(
                "diagonal has nonzero real part; generator is not anti-hermitian canonical".into(),
            ));
        }
    }
    let w: Vec<f64> = (0..nd).map(|i| d.get(i, i).im).collect();
    for i in 1..nd {
        if w[i] > w[i - 1] + thr {
            return Err(CalcError::MustCanonicalize(
                "diagonal is not sorted by descending imaginary part; canonicalize first".into(),
            ));
        }
    }
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &x in &w {
        match blocks.last_mut() {
            Some((val, mult)) if *val - x <= thr => {
                // Extend the current cluster, keeping its first value as anchor.
                *mult += 1;
            }
            _ => blocks.push((x, 1)),
        }
    }
    Ok(blocks)
}

/// Computes the zero pattern of a canonical calculus with one generator and
/// module C^N. A block segment of phi counts as zero when its norm is within
/// `eps * (1 + |phi|)` of zero, so the decision is relative to the whole
/// vector.
///
/// The instance must already be canonical (diagonal generator, descending
/// imaginary parts); otherwise `MustCanonicalize` is returned.
pub fn zero_pattern(c: &CalculusInstance, tol: &Tolerance) -> Result<ZeroPattern> {
    c.check_shapes()?;
    if c.lie_dim() != 1 || c.module_rank != 1 {
        return Err(CalcError::Unsupported(
            "zero patterns are defined for one generator acting on C^N".into(),
        ));
    }
    let blocks = canonical_diag_blocks(&c.rep.dhat[0], tol)?;
    let v = &c.phi[0];
    let deadband = tol.eps() * (1.0 + v.norm());
    let mut bits = Vec::with_capacity(blocks.len());
    let mut start = 0usize;
    for &(_, mult) in &blocks {
        let seg: f64 = v.0[start..start + mult]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        bits.push(seg > deadband);
        start += mult;
    }
    Ok(ZeroPattern(bits))
}

/// The set of real scalars mu for which one generator is conjugate to mu
/// times the other. For trace-free anti-hermitian generators the set has at
/// most two elements, one per sign.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiEquivalence1D {
    pub mus: Vec<f64>,
}

impl QuasiEquivalence1D {
    pub fn is_quasi_equivalent(&self) -> bool {
        !self.mus.is_empty()
    }

    pub fn positive_mu(&self) -> Option<f64> {
        self.mus.iter().copied().find(|&m| m > 0.0)
    }

    pub fn negative_mu(&self) -> Option<f64> {
        self.mus.iter().copied().find(|&m| m < 0.0)
    }
}

/// Finds all real mu != 0 with `spectrum(db) = mu * spectrum(da)` as
/// multisets, which is exactly conjugacy of `db` to `mu * da` for
/// anti-hermitian matrices.
///
/// Both inputs must be trace-free and anti-hermitian of the same size. A
/// generator with zero spectrum is rejected as `Degenerate` (the action it
/// generates is not faithful).
pub fn quasi_equivalent_1d(
    da: &ComplexMatrix,
    db: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<QuasiEquivalence1D> {
    if da.rows() != db.rows() || da.cols() != db.cols() {
        return Err(CalcError::Shape(format!(
            "generators must have equal shape, got {}x{} and {}x{}",
            da.rows(),
            da.cols(),
            db.rows(),
            db.cols()
        )));
    }
    let wa = eig_antihermitian_sorted(da, tol)?.imag_parts();
    let wb = eig_antihermitian_sorted(db, tol)?.imag_parts();
    let nd = wa.len();
    let wa_scale = wa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let wb_scale = wb.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if wa_scale <= tol.eps() || wb_scale <= tol.eps() {
        return Err(CalcError::Degenerate(
            "generator spectrum is zero; the derivation is not faithful".into(),
        ));
    }
    for (w, s) in [(&wa, wa_scale), (&wb, wb_scale)] {
        let trace: f64 = w.iter().sum();
        if trace.abs() > tol.threshold(s * nd as f64) {
            return Err(CalcError::Invalid(
                "generator is not trace-free".into(),
            ));
        }
    }

    // Trace-free and nonzero forces the top eigenvalue positive, so each sign
    // has exactly one candidate: mu+ matches the tops, mu- matches top to
    // bottom with order reversed.
    let mut mus = Vec::new();
    let mu_pos = wb[0] / wa[0];
    let mu_neg = wb[nd - 1] / wa[0];
    for (mu, rev) in [(mu_pos, false), (mu_neg, true)] {
        if mu == 0.0 || !mu.is_finite() {
            continue;
        }
        let thr = tol.threshold((mu.abs() * wa_scale).max(wb_scale));
        let ok = (0..nd).all(|i| {
            let target = if rev { mu * wa[nd - 1 - i] } else { mu * wa[i] };
            (wb[i] - target).abs() <= thr
        });
        if ok {
            mus.push(mu);
        }
    }
    Ok(QuasiEquivalence1D { mus })
}

/// True when the spectrum of `d` is closed under negation as a multiset,
/// i.e. `d` is conjugate to `-d`.
pub fn anti_selfsimilar(d: &ComplexMatrix, tol: &Tolerance) -> Result<bool> {
    Ok(quasi_equivalent_1d(d, d, tol)?.negative_mu().is_some())
}

/// Decides isomorphism of two calculi with one-dimensional Lie algebra and
/// module C^N.
///
/// Both are canonicalized; they are isomorphic iff the generators are
/// quasi-equivalent and the zero patterns match directly (for a positive mu)
/// or reversed (for a negative mu).
pub fn is_isomorphic_1d(
    a: &CalculusInstance,
    b: &CalculusInstance,
    tol: &Tolerance,
) -> Result<bool> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.lie_dim() != 1 || b.lie_dim() != 1 || a.module_rank != 1 || b.module_rank != 1 {
        return Err(CalcError::Unsupported(
            "the isomorphism decision covers one generator acting on C^N".into(),
        ));
    }
    if a.n_dim() != b.n_dim() {
        return Ok(false);
    }
    let ca = canonical_diag_1d(a, tol)?;
    let cb = canonical_diag_1d(b, tol)?;
    let qe = quasi_equivalent_1d(&ca.instance.rep.dhat[0], &cb.instance.rep.dhat[0], tol)?;
    if !qe.is_quasi_equivalent() {
        return Ok(false);
    }
    let pa = zero_pattern(&ca.instance, tol)?;
    let pb = zero_pattern(&cb.instance, tol)?;
    if !pa.any_nonzero() || !pb.any_nonzero() {
        return Err(CalcError::Invalid(
            "phi is zero and does not generate the module".into(),
        ));
    }
    // Quasi-equivalence forces matching block structure; the extra length
    // check only guards marginal clustering disagreements.
    if pa.k() != pb.k() {
        return Ok(false);
    }
    let same = qe.positive_mu().is_some() && pa == pb;
    let flipped = qe.negative_mu().is_some() && pa == pb.reversed();
    Ok(same || flipped)
}

/// Number of isomorphism classes of calculi on C^N whose canonical generator
/// has k spectrum blocks: nonzero patterns of length k, taken up to reversal
/// when the spectrum is anti-selfsimilar.
pub fn count_classes(k: usize, anti_selfsimilar: bool) -> Result<u128> {
    if k == 0 {
        return Err(CalcError::Shape("block count must be at least 1".into()));
    }
    if k > 120 {
        return Err(CalcError::Resource(format!(
            "class count for k = {k} exceeds the supported range (k <= 120)"
        )));
    }
    let pow = |e: usize| -> Result<u128> {
        1u128
            .checked_shl(e as u32)
            .ok_or_else(|| CalcError::Resource("class count overflow".into()))
    };
    let count = if !anti_selfsimilar {
        pow(k)? - 1
    } else if k % 2 == 1 {
        // k = 2m + 1: 2^m (2^m + 1) - 1.
        let m = k / 2;
        pow(m)?
            .checked_mul(pow(m)? + 1)
            .ok_or_else(|| CalcError::Resource("class count overflow".into()))?
            - 1
    } else {
        // k = 2m: 2^(m-1) (2^m + 1) - 1.
        let m = k / 2;
        pow(m - 1)?
            .checked_mul(pow(m)? + 1)
            .ok_or_else(|| CalcError::Resource("class count overflow".into()))?
            - 1
    };
    Ok(count)
}

/// Reverses the low k bits of v.
fn bit_reverse(v: u32, k: usize) -> u32 {
    v.reverse_bits() >> (32 - k)
}

/// Enumerates one canonical representative per isomorphism class for k
/// spectrum blocks, in lexicographic order of the pattern bits.
///
/// Patterns are encoded as integers with the first block in the most
/// significant bit, so ascending integers are lexicographic. When the
/// spectrum is anti-selfsimilar, the representative of a class is the
/// lexicographically smaller of a pattern and its reversal.
pub fn enumerate_classes(k: usize, anti_selfsimilar: bool) -> Result<Vec<ZeroPattern>> {
    if k == 0 {
        return Err(CalcError::Shape("block count must be at least 1".into()));
    }
    if k > 24 {
        return Err(CalcError::Resource(format!(
            "enumeration for k = {k} exceeds the supported range (k <= 24)"
        )));
    }
    let total: u32 = 1 << k;
    let mut out = Vec::new();
    for v in 1..total {
        if anti_selfsimilar && bit_reverse(v, k) < v {
            continue;
        }
        let bits = (0..k).map(|j| (v >> (k - 1 - j)) & 1 == 1).collect();
        out.push(ZeroPattern(bits));
    }
    Ok(out)
}
