//! Cross-checks of the solvers against independent formulations: witness
//! equations recomputed from scratch, closed-form uniqueness, transport of
//! metric compatibility through projections, and counting against a Burnside
//! oracle.

mod common;

use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use realcalc::{
    christoffel_free, commutator, count_classes, enumerate_classes, eval_free_metric,
    is_orthogonal_projection, kron, lc_connection_1d, project_connection, projection_from_anchor,
    restrict_metric, search_witness, verify_pseudo_riemannian, CVector, ComplexMatrix,
    ConnectionSpec, FreeCalculusInstance, FreeMetric, LieAlgebraSpec, MatrixRep, MetricSpec,
    ProjectionSpec, ScalarMetric, Tolerance, VerifyTarget,
};

/// Witness equations recomputed without the library's checker: the Lie map is
/// the scalar mu, the conjugation identity is stated inverse-free, and the
/// module identity is evaluated through an explicit Kronecker product.
#[test]
fn witness_soundness_against_direct_equations() {
    let tol = Tolerance::new(1e-9).unwrap();
    let mut r = rng(11);

    for case in 0..25usize {
        let n_dim = r.random_range(2..=5);
        let sample = random_vector_instance(&mut r, n_dim);
        let a = &sample.instance;
        let mu = random_real_mu(&mut r);
        let x = random_nonzero_scalar(&mut r);
        let b = transform_instance(&mut r, a, mu, x);

        let w = search_witness(a, &b, 4, case as u64, &tol)
            .unwrap()
            .unwrap_or_else(|| panic!("case {case}: no witness found for an isomorphic pair"));

        // psi is a 1x1 invertible real matrix.
        assert_eq!(w.psi.len(), 1);
        let mu_w = w.psi[0][0];
        assert!(mu_w.abs() > 1e-12, "case {case}: witness scalar vanishes");

        // U Dhat_b = Dhat_a(psi d) U, avoiding the inverse entirely.
        let lhs = w.u.matmul(&b.rep.dhat[0]).unwrap();
        let rhs = a.rep.dhat[0].scale(c(mu_w, 0.0)).matmul(&w.u).unwrap();
        let scale = lhs.max_abs().max(rhs.max_abs());
        assert!(
            lhs.sub(&rhs).unwrap().max_abs() <= tol.threshold(scale),
            "case {case}: conjugation equation fails"
        );

        // phi_b = phi_a(psi d) (X (x) U) as a literal row-vector product.
        let pulled = a.phi[0].scale(c(mu_w, 0.0));
        let moved = pulled
            .as_row_matrix()
            .matmul(&kron(&w.x, &w.u))
            .unwrap();
        let want = b.phi[0].as_row_matrix();
        let mscale = moved.max_abs().max(want.max_abs());
        assert!(
            moved.sub(&want).unwrap().max_abs() <= tol.threshold(mscale),
            "case {case}: module equation fails"
        );
    }
}

/// On C^N the Levi-Civita connection is the lambda = 0 point: every other
/// lambda bounded away from zero breaks symmetry or metric compatibility.
#[test]
fn lc_uniqueness_on_cn() {
    let tol = Tolerance::default();
    let mut r = rng(12);

    let d = diag_lift(&[(2.0, 1), (-0.5, 2), (-1.0, 1)]);
    let mut phi = CVector::zeros(4);
    phi.0[1] = c(0.8, 0.3);
    phi.0[2] = c(-0.2, 0.5);
    let inst = vector_instance_1d(d, phi);
    let metric = MetricSpec::Scalar(ScalarMetric { x: -1.2 });

    let zero = ConnectionSpec::LambdaScalar { lambda: c(0.0, 0.0) };
    let rep = verify_pseudo_riemannian(VerifyTarget::Vector(&inst), &metric, &zero, &tol, 7).unwrap();
    assert!(rep.pass, "the zero-lambda connection must verify");
    assert_eq!(
        lc_connection_1d(&inst, &tol).unwrap().lambda_partial,
        c(0.0, -0.5),
        "the anchor sits in the -0.5i eigenblock"
    );

    for case in 0..20 {
        let mut lambda = rand_c(&mut r);
        if lambda.norm() < 1e-3 {
            lambda += c(0.5, 0.5);
        }
        let conn = ConnectionSpec::LambdaScalar { lambda };
        let rep =
            verify_pseudo_riemannian(VerifyTarget::Vector(&inst), &metric, &conn, &tol, case).unwrap();
        assert!(
            !rep.pass,
            "lambda {lambda} verified but differs from the Levi-Civita point"
        );
    }
}

/// Free abelian fixture whose metric blocks are polynomials in the anchor
/// projection: the projection is orthogonal by construction while the
/// generator action genuinely differentiates the metric.
struct ProjectedFixture {
    free: FreeCalculusInstance,
    metric: FreeMetric,
    projection: ProjectionSpec,
    p: ComplexMatrix,
}

fn projected_fixture(r: &mut ChaCha8Rng) -> ProjectedFixture {
    let n = r.random_range(1..=2usize);
    let n_dim = r.random_range(3..=4usize);
    let diags = independent_diagonals(r, n, n_dim);
    let q = random_unitary(r, n_dim);
    let dhat: Vec<ComplexMatrix> = diags
        .iter()
        .map(|row| {
            let lam = diag_lift(&row.iter().map(|&v| (v, 1)).collect::<Vec<_>>());
            q.matmul(&lam).unwrap().matmul(&q.adjoint()).unwrap()
        })
        .collect();
    let basis_images: Vec<Vec<ComplexMatrix>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        ComplexMatrix::identity(n_dim)
                    } else {
                        ComplexMatrix::zeros(n_dim, n_dim)
                    }
                })
                .collect()
        })
        .collect();
    let free = FreeCalculusInstance {
        rep: MatrixRep {
            lie: LieAlgebraSpec::abelian(n),
            n_dim,
            dhat,
        },
        basis_images,
    };

    let v0 = CVector((0..n_dim).map(|_| rand_c(r)).collect());
    let v0 = v0.scale(c(1.0 / v0.norm(), 0.0));
    let p = projection_from_anchor(&v0).unwrap();
    let projection = ProjectionSpec::diagonal(n, &p);

    loop {
        let cmat = random_symmetric_invertible(r, n);
        let mut dmat = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in i..n {
                dmat[i][j] = 0.3 * r.random_range(-1.0..1.0);
                dmat[j][i] = dmat[i][j];
            }
        }
        let mut hblocks = vec![vec![ComplexMatrix::zeros(n_dim, n_dim); n]; n];
        for i in 0..n {
            for j in 0..n {
                hblocks[i][j] = ComplexMatrix::identity(n_dim)
                    .scale(c(cmat[i][j], 0.0))
                    .add(&p.scale(c(dmat[i][j], 0.0)))
                    .unwrap();
            }
        }
        let metric = FreeMetric { hblocks };
        let sv = realcalc::singular_values(&metric.big_matrix().unwrap());
        if sv.last().copied().unwrap_or(0.0) > 0.05 {
            return ProjectedFixture {
                free,
                metric,
                projection,
                p,
            };
        }
    }
}

fn nabla_coords(
    gammas: &[Vec<Vec<ComplexMatrix>>],
    dhat: &[ComplexMatrix],
    i: usize,
    coords: &[ComplexMatrix],
) -> Vec<ComplexMatrix> {
    let n = coords.len();
    (0..n)
        .map(|k| {
            let mut acc = commutator(&dhat[i], &coords[k]).unwrap();
            for (j, a) in coords.iter().enumerate() {
                acc = acc.add(&gammas[i][j][k].matmul(a).unwrap()).unwrap();
            }
            acc
        })
        .collect()
}

fn random_coords(r: &mut ChaCha8Rng, n: usize, n_dim: usize) -> Vec<ComplexMatrix> {
    (0..n)
        .map(|_| {
            let mut m = ComplexMatrix::zeros(n_dim, n_dim);
            for a in 0..n_dim {
                for b in 0..n_dim {
                    m.set(a, b, rand_c(r));
                }
            }
            m
        })
        .collect()
}

/// Metric compatibility survives orthogonal projection: with the ambient
/// Levi-Civita connection, [D_i, h(Pm, Pn)] equals the sum of
/// h(P nabla_i Pm, Pn) and h(Pm, P nabla_i Pn) for arbitrary elements, and
/// the projected Christoffel coefficients reproduce P(nabla_i g_j) on the
/// generators.
#[test]
fn metric_compatibility_survives_projection() {
    let tol = Tolerance::default();
    let mut r = rng(13);

    for case in 0..12usize {
        let fx = projected_fixture(&mut r);
        let n = fx.free.lie_dim();
        let n_dim = fx.free.n_dim();
        let dhat = &fx.free.rep.dhat;

        let conn = christoffel_free(&fx.free, &fx.metric, &tol).unwrap();
        let ConnectionSpec::Christoffel { gammas } = &conn else {
            panic!("solver returned a non-christoffel connection");
        };
        let rep = verify_pseudo_riemannian(
            VerifyTarget::Free(&fx.free),
            &MetricSpec::Free(fx.metric.clone()),
            &conn,
            &tol,
            case as u64,
        )
        .unwrap();
        assert!(rep.pass, "case {case}: ambient connection fails verification");
        assert!(
            is_orthogonal_projection(&fx.projection, &fx.metric, &tol).unwrap(),
            "case {case}: fixture projection is not orthogonal"
        );

        for trial in 0..6 {
            let m = fx.projection.apply_coords(&random_coords(&mut r, n, n_dim)).unwrap();
            let w = fx.projection.apply_coords(&random_coords(&mut r, n, n_dim)).unwrap();
            for i in 0..n {
                let hmn = eval_free_metric(&fx.metric, &m, &w).unwrap();
                let lhs = commutator(&dhat[i], &hmn).unwrap();
                let dm = fx
                    .projection
                    .apply_coords(&nabla_coords(gammas, dhat, i, &m))
                    .unwrap();
                let dw = fx
                    .projection
                    .apply_coords(&nabla_coords(gammas, dhat, i, &w))
                    .unwrap();
                let rhs = eval_free_metric(&fx.metric, &dm, &w)
                    .unwrap()
                    .add(&eval_free_metric(&fx.metric, &m, &dw).unwrap())
                    .unwrap();
                let resid = lhs.sub(&rhs).unwrap().max_abs();
                assert!(
                    resid <= 1e-8,
                    "case {case} trial {trial} direction {i}: transported compatibility residual {resid:.3e}"
                );
            }
        }

        // Projected coefficients against the operational definition
        // P(nabla_i g_j) on each projected generator.
        let projected = project_connection(&fx.projection, &conn, &fx.free, &tol).unwrap();
        let ConnectionSpec::Christoffel { gammas: pg } = &projected else {
            panic!("projection changed the connection kind");
        };
        for i in 0..n {
            for j in 0..n {
                let gj: Vec<ComplexMatrix> = (0..n)
                    .map(|l| if l == j { fx.p.clone() } else { ComplexMatrix::zeros(n_dim, n_dim) })
                    .collect();
                let direct = fx
                    .projection
                    .apply_coords(&nabla_coords(gammas, dhat, i, &gj))
                    .unwrap();
                for l in 0..n {
                    let via_coeffs = fx.p.matmul(&pg[i][j][l]).unwrap();
                    let resid = via_coeffs.sub(&direct[l]).unwrap().max_abs();
                    assert!(
                        resid <= 1e-9,
                        "case {case}: projected coefficient ({i},{j},{l}) deviates by {resid:.3e}"
                    );
                }
            }
        }
    }
}

/// restrict_metric agrees with evaluating the ambient metric on projected
/// basis pairs; this needs both orthogonality and idempotency, so it is a
/// semantic check, not a restatement of the implementation.
#[test]
fn restricted_metric_matches_projected_evaluations() {
    let tol = Tolerance::default();
    let mut r = rng(14);

    for case in 0..12usize {
        let fx = projected_fixture(&mut r);
        let n = fx.free.lie_dim();
        let n_dim = fx.free.n_dim();
        let restricted = restrict_metric(&fx.projection, &fx.metric, &tol).unwrap();

        let basis = |j: usize| -> Vec<ComplexMatrix> {
            (0..n)
                .map(|l| {
                    if l == j {
                        ComplexMatrix::identity(n_dim)
                    } else {
                        ComplexMatrix::zeros(n_dim, n_dim)
                    }
                })
                .collect()
        };
        for i in 0..n {
            for j in 0..n {
                let pi = fx.projection.apply_coords(&basis(i)).unwrap();
                let pj = fx.projection.apply_coords(&basis(j)).unwrap();
                let direct = eval_free_metric(&fx.metric, &pi, &pj).unwrap();
                let resid = direct.sub(&restricted.hblocks[i][j]).unwrap().max_abs();
                assert!(
                    resid <= 1e-9,
                    "case {case}: restricted block ({i},{j}) deviates by {resid:.3e}"
                );
            }
        }
    }
}

/// For a rank-1 projected module the transported connection acts on the
/// anchor as v0 (lambda 1 - Dhat) with lambda solvable in closed form,
/// whatever the ambient Christoffel block is.
#[test]
fn projected_rank1_connection_has_eigen_form() {
    let tol = Tolerance::default();
    let mut r = rng(15);

    for case in 0..20usize {
        let n_dim = r.random_range(2..=5);
        let spectrum = random_spectrum(&mut r, n_dim);
        let q = random_unitary(&mut r, n_dim);
        let d = q
            .adjoint()
            .matmul(&diag_lift(&spectrum))
            .unwrap()
            .matmul(&q)
            .unwrap();
        let v0 = CVector((0..n_dim).map(|_| rand_c(&mut r)).collect());
        let v0 = v0.scale(c(1.0 / v0.norm(), 0.0));
        let p = projection_from_anchor(&v0).unwrap();

        let mut gamma = ComplexMatrix::zeros(n_dim, n_dim);
        for a in 0..n_dim {
            for b in 0..n_dim {
                gamma.set(a, b, rand_c(&mut r));
            }
        }
        let free = FreeCalculusInstance {
            rep: MatrixRep {
                lie: LieAlgebraSpec::abelian(1),
                n_dim,
                dhat: vec![d.clone()],
            },
            basis_images: vec![vec![ComplexMatrix::identity(n_dim)]],
        };
        let projected = project_connection(
            &ProjectionSpec::diagonal(1, &p),
            &ConnectionSpec::Christoffel {
                gammas: vec![vec![vec![gamma.clone()]]],
            },
            &free,
            &tol,
        )
        .unwrap();
        let ConnectionSpec::Christoffel { gammas: pg } = &projected else {
            panic!("projection changed the connection kind");
        };

        // The projected block is gamma p + [Dhat, p] literally.
        let direct = gamma
            .matmul(&p)
            .unwrap()
            .add(&commutator(&d, &p).unwrap())
            .unwrap();
        assert!(
            pg[0][0][0].sub(&direct).unwrap().max_abs() <= 1e-12,
            "case {case}: projected block differs from gamma p + [D, p]"
        );

        // v0 (gamma p + [D, p]) = lambda v0 - v0 Dhat with
        // lambda = v0 (gamma + Dhat) v0* / |v0|^2.
        let lambda = v0
            .mat_mul(&gamma.add(&d).unwrap())
            .unwrap()
            .dot_dagger(&v0)
            / v0.norm().powi(2);
        let lhs = v0.mat_mul(&pg[0][0][0]).unwrap();
        let rhs = v0.scale(lambda).sub(&v0.mat_mul(&d).unwrap()).unwrap();
        let resid = lhs.sub(&rhs).unwrap().norm();
        assert!(
            resid <= 1e-10,
            "case {case}: anchor action deviates from the eigen form by {resid:.3e}"
        );
    }
}

/// Class counting against a Burnside-style oracle derived independently:
/// without the reversal symmetry there are 2^k - 1 nonzero patterns; with it,
/// reversal fixes the 2^ceil(k/2) - 1 nonzero palindromes, so classes number
/// (2^k + 2^ceil(k/2)) / 2 - 1.
#[test]
fn counting_matches_burnside_oracle() {
    for k in 1..=24usize {
        let plain = count_classes(k, false).unwrap();
        assert_eq!(plain, (1u128 << k) - 1, "plain count at k={k}");

        let anti = count_classes(k, true).unwrap();
        let palindromes = (1u128 << k.div_ceil(2)) - 1;
        let oracle = ((1u128 << k) - 1 + palindromes) / 2;
        assert_eq!(anti, oracle, "anti-selfsimilar count at k={k}");
    }

    // The enumeration at small k agrees with a brute-force orbit count.
    for k in 1..=10usize {
        let mut orbit_reps = 0u128;
        for mask in 1u32..(1 << k) {
            let rev = {
                let mut r = 0u32;
                for t in 0..k {
                    if mask & (1 << t) != 0 {
                        r |= 1 << (k - 1 - t);
                    }
                }
                r
            };
            if mask <= rev {
                orbit_reps += 1;
            }
        }
        assert_eq!(
            enumerate_classes(k, true).unwrap().len() as u128,
            orbit_reps,
            "orbit enumeration at k={k}"
        );
    }
}

/// Serialization round trips preserve every artifact kind byte for byte.
/// Exact float parsing is enabled so reread artifacts verify at the same
/// residuals they were produced with.
#[test]
fn serde_roundtrips_are_stable() {
    let tol = Tolerance::default();
    let mut r = rng(16);

    let sample = random_vector_instance(&mut r, 4);
    let inst_json = serde_json::to_string(&sample.instance).unwrap();
    let inst_back: realcalc::CalculusInstance = serde_json::from_str(&inst_json).unwrap();
    assert_eq!(inst_json, serde_json::to_string(&inst_back).unwrap());

    let witness = search_witness(
        &sample.instance,
        &transform_instance(&mut r, &sample.instance, 1.3, c(0.4, 0.9)),
        4,
        0,
        &tol,
    )
    .unwrap()
    .expect("isomorphic by construction");
    let w_json = serde_json::to_string(&witness).unwrap();
    let w_back: realcalc::IsoWitness = serde_json::from_str(&w_json).unwrap();
    assert_eq!(w_json, serde_json::to_string(&w_back).unwrap());

    let metrics: Vec<MetricSpec> = vec![
        MetricSpec::Scalar(ScalarMetric { x: -2.5 }),
        MetricSpec::Aligned(realcalc::AlignedMetric {
            mtilde: vec![vec![1.0, 0.25], vec![0.25, 1.0]],
            v0: CVector::from_reals(&[1.0, 0.0, 0.0]),
            alphas: vec![2.0, -1.0],
        }),
        MetricSpec::Free(FreeMetric {
            hblocks: vec![vec![ComplexMatrix::identity(2)]],
        }),
    ];
    for m in &metrics {
        let j = serde_json::to_string(m).unwrap();
        let back: MetricSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(j, serde_json::to_string(&back).unwrap());
        assert_eq!(m.kind_name(), back.kind_name());
    }

    let conns: Vec<ConnectionSpec> = vec![
        ConnectionSpec::LambdaScalar { lambda: c(0.0, 1.0) },
        ConnectionSpec::LambdaTensor {
            lambdas: vec![vec![vec![c(0.5, -0.5)]]],
        },
        ConnectionSpec::Christoffel {
            gammas: vec![vec![vec![ComplexMatrix::identity(2)]]],
        },
    ];
    for conn in &conns {
        let j = serde_json::to_string(conn).unwrap();
        let back: ConnectionSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(j, serde_json::to_string(&back).unwrap());
        assert_eq!(conn.kind_name(), back.kind_name());
    }
}
