//! Connections on the supported modules and the Levi-Civita constructions:
//! existence on C^N, the closed form for aligned abelian calculi, and the
//! Koszul solve for free modules, plus a pseudo-Riemannian verifier.

use crate::calculus::{module_action, CalculusInstance, FreeCalculusInstance};
use crate::error::{CalcError, Result};
use crate::matrix::{commutator, CVector, ComplexMatrix, C64};
use crate::metric::{
    eval_aligned_metric, eval_free_metric, eval_scalar_metric, AlignedMetric, FreeMetric,
    MetricSpec, ScalarMetric,
};
use crate::spectrum::singular_values;
use crate::tol::Tolerance;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A connection, tagged for serialization. `lambdas[i][j][k]` holds the
/// coefficient of e_k in ∇_i e_j, and `gammas[i][j][k]` the N x N matrix
/// coefficient of ê_k in ∇_i ê_j.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConnectionSpec {
    LambdaScalar { lambda: C64 },
    LambdaTensor { lambdas: Vec<Vec<Vec<C64>>> },
    Christoffel { gammas: Vec<Vec<Vec<ComplexMatrix>>> },
}

impl ConnectionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ConnectionSpec::LambdaScalar { .. } => "lambda_scalar",
            ConnectionSpec::LambdaTensor { .. } => "lambda_tensor",
            ConnectionSpec::Christoffel { .. } => "christoffel",
        }
    }
}

fn check_cube_shape<T>(cube: &[Vec<Vec<T>>], n: usize, what: &str) -> Result<()> {
    if cube.len() != n
        || cube.iter().any(|p| p.len() != n)
        || cube.iter().flatten().any(|r| r.len() != n)
    {
        return Err(CalcError::Shape(format!("{what} must be an {n}x{n}x{n} array")));
    }
    Ok(())
}

fn require_vector_1d(c: &CalculusInstance) -> Result<()> {
    c.check_shapes()?;
    if c.lie_dim() != 1 || c.module_rank != 1 {
        return Err(CalcError::Unsupported(
            "this operation needs a one-dimensional lie algebra acting on C^N".into(),
        ));
    }
    Ok(())
}

/// The connection ∇(v0 B) = v0 (λ + [D, p]) B + v0 [D, B] on the module C^N,
/// where p is the orthogonal projection onto the anchor v0. The canonical
/// representative B = v0†v / |v0|^2 reconstructs v exactly, so the value does
/// not depend on the choice of B.
pub fn connection_on_cn(c: &CalculusInstance, lambda: C64, v: &CVector) -> Result<CVector> {
    require_vector_1d(c)?;
    if v.len() != c.n_dim() {
        return Err(CalcError::Shape(format!(
            "vector length {} does not match N = {}",
            v.len(),
            c.n_dim()
        )));
    }
    let v0 = &c.phi[0];
    let nsq = v0.norm().powi(2);
    if nsq == 0.0 {
        return Err(CalcError::Degenerate("anchor vector vanishes".into()));
    }
    let d = &c.rep.dhat[0];
    let inv = C64::new(1.0 / nsq, 0.0);
    let p = v0.dagger_dot(v0).scale(inv);
    let b = v0.dagger_dot(v).scale(inv);
    let dp = commutator(d, &p)?;
    let db = commutator(d, &b)?;
    let tail = v0.mat_mul(&dp.matmul(&b)?.add(&db)?)?;
    v.scale(lambda).add(&tail)
}

/// Tests the eigenvector criterion for a Levi-Civita connection on C^N and
/// returns the eigenvalue λ_∂ of the anchor when it holds.
pub fn lc_exists_1d(c: &CalculusInstance, tol: &Tolerance) -> Result<Option<C64>> {
    require_vector_1d(c)?;
    let v0 = &c.phi[0];
    let nsq = v0.norm().powi(2);
    if nsq == 0.0 {
        return Err(CalcError::Degenerate("anchor vector vanishes".into()));
    }
    let d = &c.rep.dhat[0];
    let w = v0.mat_mul(d)?;
    let lambda = w.dot_dagger(v0) / nsq;
    let resid = w.sub(&v0.scale(lambda))?.norm();
    if resid > tol.threshold(v0.norm() * d.max_abs()) {
        return Ok(None);
    }
    if lambda.re.abs() > tol.threshold(d.max_abs()) {
        return Err(CalcError::Invalid(
            "anchor eigenvalue has a real part; the lift is not anti-hermitian".into(),
        ));
    }
    Ok(Some(C64::new(0.0, lambda.im)))
}

/// The Levi-Civita connection on C^N in closed form: ∇v = λ_∂ v - v D.
#[derive(Clone, Debug, Serialize)]
pub struct Lc1d {
    pub lambda_partial: C64,
    dhat: ComplexMatrix,
}

impl Lc1d {
    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dhat.rows() {
            return Err(CalcError::Shape(format!(
                "vector length {} does not match N = {}",
                v.len(),
                self.dhat.rows()
            )));
        }
        v.scale(self.lambda_partial).sub(&v.mat_mul(&self.dhat)?)
    }
}

/// Builds the Levi-Civita connection on C^N; fails with `NoConnection` when
/// the anchor is not an eigenvector of the lift.
pub fn lc_connection_1d(c: &CalculusInstance, tol: &Tolerance) -> Result<Lc1d> {
    match lc_exists_1d(c, tol)? {
        Some(lambda_partial) => Ok(Lc1d {
            lambda_partial,
            dhat: c.rep.dhat[0].clone(),
        }),
        None => Err(CalcError::NoConnection(
            "the anchor is not an eigenvector of the lift".into(),
        )),
    }
}

/// Levi-Civita data for an aligned abelian calculus: the connection has a
/// vanishing coefficient tensor in the aligned basis, and on elements it acts
/// as ∇_i v = λ_i v - v D_i with λ_i the anchor eigenvalue of D_i.
#[derive(Clone, Debug, Serialize)]
pub struct LcAbelian {
    pub lambdas: Vec<C64>,
    pub connection: ConnectionSpec,
    dhat: Vec<ComplexMatrix>,
    n_dim: usize,
}

impl LcAbelian {
    pub fn apply(&self, i: usize, v: &CVector) -> Result<CVector> {
        if i >= self.lambdas.len() {
            return Err(CalcError::Shape(format!("direction {i} out of range")));
        }
        let moved = module_action(v, &self.dhat[i], self.n_dim)?;
        v.scale(self.lambdas[i]).sub(&moved)
    }
}

/// Levi-Civita connection for an abelian calculus whose anchors are aligned
/// along a common eigenvector of all the lifts, with the given aligned metric.
pub fn lc_abelian(c: &CalculusInstance, metric: &AlignedMetric, tol: &Tolerance) -> Result<LcAbelian> {
    c.check_shapes()?;
    metric.validate(tol)?;
    let n = c.lie_dim();
    let nd = c.n_dim();
    if !c.rep.lie.is_abelian(tol) {
        return Err(CalcError::Unsupported(
            "the closed-form connection needs an abelian lie algebra".into(),
        ));
    }
    if c.module_rank != n || metric.rank() != n || metric.n_dim() != nd {
        return Err(CalcError::Shape(
            "metric shape does not match the instance".into(),
        ));
    }
    let u0 = &metric.v0;
    for i in 0..n {
        let phi = &c.phi[i];
        let scale = phi.norm();
        for j in 0..n {
            if j != i && phi.block(j, nd)?.norm() > tol.threshold(scale) {
                return Err(CalcError::Invalid(format!(
                    "anchor {i} is not supported on slot {i} alone"
                )));
            }
        }
        let w = phi.block(i, nd)?;
        let alpha = w.dot_dagger(u0);
        if alpha.im.abs() > tol.threshold(alpha.norm()) || alpha.re.abs() <= tol.eps() {
            return Err(CalcError::Invalid(format!(
                "anchor {i} is not a nonzero real multiple of v0"
            )));
        }
        if w.sub(&u0.scale(alpha))?.norm() > tol.threshold(scale) {
            return Err(CalcError::Invalid(format!("anchor {i} is not aligned with v0")));
        }
        if (alpha.re - metric.alphas[i]).abs() > tol.threshold(metric.alphas[i].abs()) {
            return Err(CalcError::Invalid(format!(
                "metric alpha {i} does not match the anchor"
            )));
        }
    }
    let mut lambdas = Vec::with_capacity(n);
    for i in 0..n {
        let d = &c.rep.dhat[i];
        let w = u0.mat_mul(d)?;
        let lambda = w.dot_dagger(u0) / u0.norm().powi(2);
        if w.sub(&u0.scale(lambda))?.norm() > tol.threshold(d.max_abs()) {
            return Err(CalcError::NoConnection(format!(
                "v0 is not an eigenvector of the lift in direction {i}"
            )));
        }
        if lambda.re.abs() > tol.threshold(d.max_abs()) {
            return Err(CalcError::Invalid(
                "anchor eigenvalue has a real part; the lift is not anti-hermitian".into(),
            ));
        }
        lambdas.push(C64::new(0.0, lambda.im));
    }
    let zero = C64::new(0.0, 0.0);
    let lambdas_tensor = vec![vec![vec![zero; n]; n]; n];
    Ok(LcAbelian {
        lambdas,
        connection: ConnectionSpec::LambdaTensor {
            lambdas: lambdas_tensor,
        },
        dhat: c.rep.dhat.clone(),
        n_dim: nd,
    })
}

fn check_free_pair(f: &FreeCalculusInstance, h: &FreeMetric) -> Result<()> {
    f.check_shapes()?;
    h.check_shapes()?;
    if h.rank() != f.lie_dim() || h.n_dim() != f.n_dim() {
        return Err(CalcError::Shape(
            "metric blocks do not match the free module shape".into(),
        ));
    }
    Ok(())
}

/// Right-hand side of the Koszul identity 2 h(∇_i ê_j, ê_k) for a free
/// calculus, with ∂_a acting as the commutator with the lift of ∂_a.
pub fn koszul_rhs(
    f: &FreeCalculusInstance,
    h: &FreeMetric,
    i: usize,
    j: usize,
    k: usize,
) -> Result<ComplexMatrix> {
    check_free_pair(f, h)?;
    let n = f.lie_dim();
    if i >= n || j >= n || k >= n {
        return Err(CalcError::Shape(format!(
            "indices ({i}, {j}, {k}) out of range for n = {n}"
        )));
    }
    let d = &f.rep.dhat;
    let mut out = commutator(&d[i], &h.hblocks[j][k])?;
    out = out.add(&commutator(&d[j], &h.hblocks[i][k])?)?;
    out = out.sub(&commutator(&d[k], &h.hblocks[i][j])?)?;
    for l in 0..n {
        let cjk = f.rep.lie.c(j, k, l);
        if cjk != 0.0 {
            out = out.sub(&h.hblocks[i][l].scale(C64::new(cjk, 0.0)))?;
        }
        let cki = f.rep.lie.c(k, i, l);
        if cki != 0.0 {
            out = out.add(&h.hblocks[j][l].scale(C64::new(cki, 0.0)))?;
        }
        let cij = f.rep.lie.c(i, j, l);
        if cij != 0.0 {
            out = out.add(&h.hblocks[k][l].scale(C64::new(cij, 0.0)))?;
        }
    }
    Ok(out)
}

/// Solves the Koszul identity for the Christoffel coefficients of the
/// Levi-Civita connection of a free real metric calculus. The pairing
/// property turns the identity into Σ_l h_{kl} Γ^l_{ij} = (rhs_{ijk}/2)†,
/// a linear solve against the stacked metric block matrix.
pub fn christoffel_free(
    f: &FreeCalculusInstance,
    h: &FreeMetric,
    tol: &Tolerance,
) -> Result<ConnectionSpec> {
    check_free_pair(f, h)?;
    let n = f.lie_dim();
    let nd = f.n_dim();
    let scale = h
        .hblocks
        .iter()
        .flatten()
        .fold(0.0f64, |m, b| m.max(b.max_abs()));
    let thr = tol.threshold(scale);
    if h.pairing_residual() > thr || h.hermitian_values_residual() > thr {
        return Err(CalcError::Invalid(
            "the metric does not define a real metric calculus".into(),
        ));
    }
    let big = h.big_matrix()?;
    let sv = singular_values(&big);
    match (sv.first(), sv.last()) {
        (Some(&smax), Some(&smin)) if smin > tol.threshold(smax) => {}
        _ => {
            return Err(CalcError::SingularMetric(
                "the stacked metric block matrix is singular".into(),
            ))
        }
    }
    let big_inv = big.try_inverse().ok_or_else(|| {
        CalcError::SingularMetric("the stacked metric block matrix is singular".into())
    })?;
    let half = C64::new(0.5, 0.0);
    let mut gammas = vec![vec![Vec::with_capacity(n); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut rhs = ComplexMatrix::zeros(n * nd, nd);
            for k in 0..n {
                let r = koszul_rhs(f, h, i, j, k)?.scale(half).adjoint();
                rhs.set_block(k * nd, 0, &r)?;
            }
            let stacked = big_inv.matmul(&rhs)?;
            for l in 0..n {
                gammas[i][j].push(stacked.block(l * nd, 0, nd, nd)?);
            }
        }
    }
    Ok(ConnectionSpec::Christoffel { gammas })
}

/// What a pseudo-Riemannian verification runs against: a calculus on (C^N)^m
/// or a free calculus on A^n.
#[derive(Clone, Copy, Debug)]
pub enum VerifyTarget<'a> {
    Vector(&'a CalculusInstance),
    Free(&'a FreeCalculusInstance),
}

/// Residuals of the three pseudo-Riemannian conditions: hermiticity of
/// h(∇_i g_j, g_l) on generators, metric compatibility on generator and
/// random element pairs, and vanishing torsion on generator pairs.
#[derive(Clone, Debug, Serialize)]
pub struct PsrReport {
    pub symmetry_residual: f64,
    pub metric_residual: f64,
    pub torsion_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn assemble_report(sym: f64, met: f64, tor: f64, scale: f64, tol: &Tolerance) -> PsrReport {
    let threshold = tol.threshold(scale);
    PsrReport {
        symmetry_residual: sym,
        metric_residual: met,
        torsion_residual: tor,
        threshold,
        pass: sym <= threshold && met <= threshold && tor <= threshold,
    }
}

const RANDOM_PAIRS: usize = 16;

fn random_cvector(rng: &mut ChaCha8Rng, len: usize) -> CVector {
    CVector(
        (0..len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(
                i,
                j,
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
        }
    }
    m
}

/// Checks the pseudo-Riemannian conditions for a matched (target, metric,
/// connection) triple. Violations show up as residuals in the report, not as
/// errors; errors are reserved for shape mismatches and unsupported pairings.
pub fn verify_pseudo_riemannian(
    target: VerifyTarget<'_>,
    metric: &MetricSpec,
    conn: &ConnectionSpec,
    tol: &Tolerance,
    seed: u64,
) -> Result<PsrReport> {
    match (target, metric, conn) {
        (VerifyTarget::Vector(c), MetricSpec::Scalar(s), ConnectionSpec::LambdaScalar { lambda }) => {
            verify_scalar(c, s, *lambda, tol, seed)
        }
        (VerifyTarget::Vector(c), MetricSpec::Aligned(a), ConnectionSpec::LambdaTensor { lambdas }) => {
            verify_aligned(c, a, lambdas, tol, seed)
        }
        (VerifyTarget::Free(f), MetricSpec::Free(h), ConnectionSpec::Christoffel { gammas }) => {
            verify_free(f, h, gammas, tol, seed)
        }
        _ => Err(CalcError::Unsupported(
            "unsupported pairing of target, metric, and connection kinds".into(),
        )),
    }
}

fn verify_scalar(
    c: &CalculusInstance,
    s: &ScalarMetric,
    lambda: C64,
    tol: &Tolerance,
    seed: u64,
) -> Result<PsrReport> {
    require_vector_1d(c)?;
    s.validate(tol)?;
    let v0 = &c.phi[0];
    let d = &c.rep.dhat[0];
    let nabla = |v: &CVector| connection_on_cn(c, lambda, v);

    let h00 = eval_scalar_metric(s, v0, v0)?;
    let sym = eval_scalar_metric(s, &nabla(v0)?, v0)?.hermitian_residual();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = vec![(v0.clone(), v0.clone())];
    for _ in 0..RANDOM_PAIRS {
        pairs.push((
            random_cvector(&mut rng, c.n_dim()),
            random_cvector(&mut rng, c.n_dim()),
        ));
    }
    let mut met = 0.0f64;
    for (u, v) in &pairs {
        let lhs = commutator(d, &eval_scalar_metric(s, u, v)?)?;
        let rhs = eval_scalar_metric(s, &nabla(u)?, v)?.add(&eval_scalar_metric(s, u, &nabla(v)?)?)?;
        met = met.max(lhs.sub(&rhs)?.max_abs());
    }

    // A single direction leaves no torsion condition to check.
    let tor = 0.0;
    let scale = 1.0f64
        .max(h00.max_abs())
        .max(d.max_abs())
        .max(lambda.norm())
        .max(v0.max_abs());
    Ok(assemble_report(sym, met, tor, scale, tol))
}

/// ∇_i on (C^N)^n in aligned coordinates: block k of ∇_i v is
/// α_k v0 (Σ_j λ^k_{ij} B^j + [D_i, B^k]) with B^k = v0†v_k / (α_k |v0|²).
fn aligned_nabla(
    c: &CalculusInstance,
    a: &AlignedMetric,
    lambdas: &[Vec<Vec<C64>>],
    i: usize,
    v: &CVector,
) -> Result<CVector> {
    let n = a.rank();
    let nd = a.n_dim();
    let v0 = &a.v0;
    let nsq = v0.norm().powi(2);
    let d = &c.rep.dhat[i];
    let mut bs = Vec::with_capacity(n);
    for k in 0..n {
        let vk = v.block(k, nd)?;
        bs.push(
            v0.dagger_dot(&vk)
                .scale(C64::new(1.0 / (a.alphas[k] * nsq), 0.0)),
        );
    }
    let mut out = CVector::zeros(n * nd);
    for k in 0..n {
        let mut coeff = commutator(d, &bs[k])?;
        for (j, b) in bs.iter().enumerate() {
            let lam = lambdas[i][j][k];
            if lam != C64::new(0.0, 0.0) {
                coeff = coeff.add(&b.scale(lam))?;
            }
        }
        let block = v0.mat_mul(&coeff)?.scale(C64::new(a.alphas[k], 0.0));
        out.set_block(k, &block)?;
    }
    Ok(out)
}

fn verify_aligned(
    c: &CalculusInstance,
    a: &AlignedMetric,
    lambdas: &[Vec<Vec<C64>>],
    tol: &Tolerance,
    seed: u64,
) -> Result<PsrReport> {
    c.check_shapes()?;
    a.validate(tol)?;
    let n = c.lie_dim();
    let nd = c.n_dim();
    if c.module_rank != n || a.rank() != n || a.n_dim() != nd {
        return Err(CalcError::Shape(
            "aligned verification needs module rank = lie dimension = metric rank".into(),
        ));
    }
    check_cube_shape(lambdas, n, "lambda tensor")?;

    let nabla = |i: usize, v: &CVector| aligned_nabla(c, a, lambdas, i, v);
    let h = |u: &CVector, v: &CVector| eval_aligned_metric(a, u, v);

    let mut scale = 1.0f64;
    for d in &c.rep.dhat {
        scale = scale.max(d.max_abs());
    }
    for row in lambdas.iter().flatten() {
        for lam in row {
            scale = scale.max(lam.norm());
        }
    }

    let mut sym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let nij = nabla(i, &c.phi[j])?;
            for l in 0..n {
                let m = h(&nij, &c.phi[l])?;
                sym = sym.max(m.hermitian_residual());
                scale = scale.max(m.max_abs());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(CVector, CVector)> = Vec::new();
    for j in 0..n {
        for l in 0..n {
            pairs.push((c.phi[j].clone(), c.phi[l].clone()));
        }
    }
    for _ in 0..RANDOM_PAIRS {
        pairs.push((random_cvector(&mut rng, n * nd), random_cvector(&mut rng, n * nd)));
    }
    let mut met = 0.0f64;
    for i in 0..n {
        let d = &c.rep.dhat[i];
        for (u, v) in &pairs {
            let lhs = commutator(d, &h(u, v)?)?;
            let rhs = h(&nabla(i, u)?, v)?.add(&h(u, &nabla(i, v)?)?)?;
            met = met.max(lhs.sub(&rhs)?.max_abs());
        }
    }

    let mut tor = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut t = nabla(i, &c.phi[j])?.sub(&nabla(j, &c.phi[i])?)?;
            for k in 0..n {
                let cijk = c.rep.lie.c(i, j, k);
                if cijk != 0.0 {
                    t = t.sub(&c.phi[k].scale(C64::new(cijk, 0.0)))?;
                }
            }
            tor = tor.max(t.max_abs());
        }
    }
    Ok(assemble_report(sym, met, tor, scale, tol))
}

/// ∇_i in free coordinates: (∇_i m)^k = Σ_j Γ^k_{ij} A^j + [D_i, A^k].
fn free_nabla(
    f: &FreeCalculusInstance,
    gammas: &[Vec<Vec<ComplexMatrix>>],
    i: usize,
    coords: &[ComplexMatrix],
) -> Result<Vec<ComplexMatrix>> {
    let n = f.lie_dim();
    let d = &f.rep.dhat[i];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut m = commutator(d, &coords[k])?;
        for (j, a) in coords.iter().enumerate() {
            m = m.add(&gammas[i][j][k].matmul(a)?)?;
        }
        out.push(m);
    }
    Ok(out)
}

fn verify_free(
    f: &FreeCalculusInstance,
    h: &FreeMetric,
    gammas: &[Vec<Vec<ComplexMatrix>>],
    tol: &Tolerance,
    seed: u64,
) -> Result<PsrReport> {
    check_free_pair(f, h)?;
    let n = f.lie_dim();
    let nd = f.n_dim();
    check_cube_shape(gammas, n, "christoffel tensor")?;
    for g in gammas.iter().flatten().flatten() {
        if g.rows() != nd || g.cols() != nd {
            return Err(CalcError::Shape(format!(
                "christoffel blocks must be {nd}x{nd} matrices"
            )));
        }
    }

    let basis = |j: usize| -> Vec<ComplexMatrix> {
        (0..n)
            .map(|l| {
                if l == j {
                    ComplexMatrix::identity(nd)
                } else {
                    ComplexMatrix::zeros(nd, nd)
                }
            })
            .collect()
    };

    let mut scale = 1.0f64;
    for d in &f.rep.dhat {
        scale = scale.max(d.max_abs());
    }
    for g in gammas.iter().flatten().flatten() {
        scale = scale.max(g.max_abs());
    }
    for b in h.hblocks.iter().flatten() {
        scale = scale.max(b.max_abs());
    }

    let mut sym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let nij = free_nabla(f, gammas, i, &basis(j))?;
            for l in 0..n {
                let m = eval_free_metric(h, &nij, &basis(l))?;
                sym = sym.max(m.hermitian_residual());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> = Vec::new();
    for j in 0..n {
        for l in 0..n {
            pairs.push((basis(j), basis(l)));
        }
    }
    for _ in 0..RANDOM_PAIRS {
        let u: Vec<ComplexMatrix> = (0..n).map(|_| random_matrix(&mut rng, nd)).collect();
        let v: Vec<ComplexMatrix> = (0..n).map(|_| random_matrix(&mut rng, nd)).collect();
        pairs.push((u, v));
    }
    let mut met = 0.0f64;
    for i in 0..n {
        let d = &f.rep.dhat[i];
        for (u, v) in &pairs {
            let lhs = commutator(d, &eval_free_metric(h, u, v)?)?;
            let rhs = eval_free_metric(h, &free_nabla(f, gammas, i, u)?, v)?
                .add(&eval_free_metric(h, u, &free_nabla(f, gammas, i, v)?)?)?;
            met = met.max(lhs.sub(&rhs)?.max_abs());
        }
    }

    let mut tor = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                let mut t = gammas[i][j][k].sub(&gammas[j][i][k])?;
                let cijk = f.rep.lie.c(i, j, k);
                if cijk != 0.0 {
                    t = t.sub(&ComplexMatrix::identity(nd).scale(C64::new(cijk, 0.0)))?;
                }
                tor = tor.max(t.max_abs());
            }
        }
    }
    Ok(assemble_report(sym, met, tor, scale, tol))
}
