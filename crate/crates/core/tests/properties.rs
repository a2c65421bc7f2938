//! Property suites for geometry, operators, covers, cutoffs and estimates.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphere_jacobi::cutoff::{
    cover_singular_set, intersection_bound_check, vitali_discard, Ball, BallCover, BallMetric,
    CoverParams, CutoffField,
};
use sphere_jacobi::estimates::{
    cone_stability_table, l4_identity_check, local_a_bound, ssy_constants, ConeVerdict,
};
use sphere_jacobi::geometry::{Sheared, POLE_MARGIN};
use sphere_jacobi::operators::GridField;
use sphere_jacobi::quadrature::SurfaceSample;
use sphere_jacobi::cutoff::SamplingOptions;
use sphere_jacobi::spectrum::{
    rayleigh_quotient, smallest_eigenpairs, test_function_a, SolverOptions,
};
use sphere_jacobi::{
    assemble_jacobi, clifford_hypersurface, equator, CliffordSpec, ParametrizedHypersurface,
};

fn clifford(k: u32, l: u32) -> ParametrizedHypersurface {
    clifford_hypersurface(CliffordSpec::new(k, l).unwrap())
}

fn point_in(m: &ParametrizedHypersurface, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    m.charts()[0].sample_interior(&mut rng, POLE_MARGIN)
}

fn trace_g_a(m: &ParametrizedHypersurface, u: &[f64]) -> (f64, f64) {
    let s = m.shape_at(0, u).unwrap();
    ((&s.metric_inverse * &s.second_fundamental_form).trace(), s.mean_curvature)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_families_are_minimal_with_norm_n(k in 1u32..=3, l in 1u32..=3, seed in any::<u64>()) {
        let m = clifford(k, l);
        let u = point_in(&m, seed);
        let s = m.shape_at(0, &u).unwrap();
        prop_assert!(s.mean_curvature.abs() <= 1e-10);
        prop_assert!((s.norm_a2 - (k + l) as f64).abs() <= 1e-10);
    }

    #[test]
    fn equators_are_totally_geodesic(n in 1u32..=5, seed in any::<u64>()) {
        let m = equator(n);
        let u = point_in(&m, seed);
        prop_assert!(m.shape_at(0, &u).unwrap().norm_a2 <= 1e-12);
    }

    #[test]
    fn mean_curvature_is_the_metric_trace(k in 1u32..=2, l in 1u32..=2, amp in -0.6f64..0.6, seed in any::<u64>()) {
        let base = clifford(k, l);
        let surfaces = [
            Sheared::surface(&clifford(1, 1), 0, 1, amp).unwrap(),
            equator(k + l),
        ];
        for m in surfaces.iter().chain(std::iter::once(&base)) {
            let u = point_in(m, seed);
            let (trace, h) = trace_g_a(m, &u);
            prop_assert!((trace - h).abs() <= 1e-10, "{} vs {}", trace, h);
        }
    }

    #[test]
    fn shape_invariants_are_chart_independent(amp in -0.8f64..0.8, seed in any::<u64>()) {
        // The sheared chart reparametrizes the same torus: u ↦ u + amp·sin(u₁)e₀.
        let base = clifford(1, 1);
        let sheared = Sheared::surface(&base, 0, 1, amp).unwrap();
        let u = point_in(&sheared, seed);
        let mut w = u.clone();
        w[0] += amp * u[1].sin();
        let a = sheared.shape_at(0, &u).unwrap();
        let b = base.shape_at(0, &w).unwrap();
        prop_assert!((a.norm_a2 - b.norm_a2).abs() <= 1e-8);
        prop_assert!((a.mean_curvature - b.mean_curvature).abs() <= 1e-8);
        prop_assert!((&a.point - &b.point).norm() <= 1e-12);
    }

    #[test]
    fn rayleigh_quotient_is_scale_invariant(c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3], freq in 1i32..4) {
        let op = assemble_jacobi(&clifford(1, 1), 16).unwrap();
        let f = GridField::from_params(&op, |u| 1.5 + (freq as f64 * u[0]).cos() * u[1].sin());
        let q = rayleigh_quotient(&op, &f).unwrap();
        let qc = rayleigh_quotient(&op, &f.scaled(c)).unwrap();
        prop_assert!((q - qc).abs() <= 1e-12 * q.abs().max(1.0), "{} vs {}", q, qc);
    }

    #[test]
    fn potential_shift_moves_every_eigenvalue(c in -3.0f64..3.0) {
        let op = assemble_jacobi(&clifford(1, 1), 12).unwrap();
        let opts = SolverOptions::default();
        let base = smallest_eigenpairs(&op, 3, &opts).unwrap();
        let shifted = smallest_eigenpairs(&op.shift_potential(c), 3, &opts).unwrap();
        for (a, b) in base.values.iter().zip(&shifted.values) {
            prop_assert!((b - (a - c)).abs() <= 1e-10);
        }
    }

    #[test]
    fn covers_meet_the_budget(count in 1usize..12, q in 0usize..2, eps in 1e-3f64..0.5, seed in any::<u64>(), inf in any::<bool>()) {
        let m = clifford(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = &m.charts()[0];
        let points: Vec<DVector<f64>> = (0..count)
            .map(|_| chart.point(&chart.sample_interior(&mut rng, POLE_MARGIN)))
            .collect();
        let params = if inf { CoverParams::inf(2, q, eps) } else { CoverParams::product(2, q, eps) };
        let cover = cover_singular_set(&points, &params).unwrap();
        prop_assert!(cover.satisfied);
        prop_assert!(cover.budget_sum() < eps);
        prop_assert!(cover.balls.iter().all(|b| b.radius < 1.0));
        for p in &points {
            prop_assert!(cover.balls.iter().any(|b| cover.metric.distance(p, &b.center) < b.radius));
        }
    }

    #[test]
    fn inf_cutoff_gradient_is_bounded(count in 1usize..6, seed in any::<u64>(), eps in 1e-3f64..0.3) {
        let m = clifford(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = &m.charts()[0];
        let points: Vec<DVector<f64>> = (0..count)
            .map(|_| chart.point(&chart.sample_interior(&mut rng, POLE_MARGIN)))
            .collect();
        let cover = cover_singular_set(&points, &CoverParams::inf(2, 1, eps)).unwrap();
        let field = CutoffField::inf(&cover);
        let bound = cover.balls.iter().map(|b| 2.0 / b.radius).fold(0.0, f64::max);
        for _ in 0..200 {
            let u = chart.sample_interior(&mut rng, POLE_MARGIN);
            let s = SurfaceSample::new(&m, 0, u).unwrap();
            let g = field.on_surface(&s).gradient.norm();
            prop_assert!(g <= bound * (1.0 + 1e-9), "{} > {}", g, bound);
        }
    }

    #[test]
    fn vitali_is_order_independent(seed in any::<u64>(), count in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let balls: Vec<Ball> = (0..count)
            .map(|i| {
                let c = DVector::from_fn(3, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
                // Distinct radii.
                Ball::new(c, 0.05 + 0.3 * (i as f64 + rand::Rng::random_range(&mut rng, 0.0..0.5)) / count as f64)
            })
            .collect();
        let mut shuffled = balls.clone();
        shuffled.shuffle(&mut rng);
        let a = vitali_discard(&BallCover::from_balls(balls, BallMetric::Euclidean, 1, 0, 10.0));
        let b = vitali_discard(&BallCover::from_balls(shuffled, BallMetric::Euclidean, 1, 0, 10.0));
        prop_assert_eq!(a.balls, b.balls);
    }

    #[test]
    fn intersection_degree_is_bounded(seed in any::<u64>(), dim in 1usize..=3, alpha in 1u32..=3, beta in 1u32..=2) {
        let (alpha, beta) = (alpha as f64, beta as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut balls: Vec<Ball> = Vec::new();
        for _ in 0..400 {
            let r = rand::Rng::random_range(&mut rng, 1.0..=beta);
            let c = DVector::from_fn(dim, |_, _| rand::Rng::random_range(&mut rng, 0.0..6.0 * beta));
            if balls.iter().all(|b| (&b.center - &c).norm() >= (b.radius + r) / alpha) {
                balls.push(Ball::new(c, r));
            }
        }
        let report = intersection_bound_check(&balls, alpha, beta).unwrap();
        prop_assert!(report.max_degree as f64 <= report.bound);
    }

    #[test]
    fn ssy_admissibility_is_monotone(n in 1usize..12, a in 1e-4f64..2.0, t in 0.0f64..1.0) {
        let hi = ssy_constants(n, a, 1.0).unwrap();
        let lo = ssy_constants(n, a * (1.0 - t).max(1e-6), 1.0).unwrap();
        if hi.admissible {
            prop_assert!(lo.admissible);
        }
        prop_assert_eq!(hi.admissible, a < 1.0 / n as f64);
    }
}

#[test]
fn cone_verdicts_follow_the_integer_quadratic() {
    for v in cone_stability_table(1000) {
        let n = v.n as i64;
        assert_eq!(v.stable_possible, n * n - 6 * n + 1 >= 0, "n = {n}");
        assert_eq!(v.margin, ConeVerdict::new(v.n).margin);
    }
}

#[test]
fn normal_derivative_matches_second_derivatives() {
    // A_ij = ⟨∂_i ν, ∂_j X⟩, with ∂_i ν by central differences.
    let base = clifford(1, 2);
    let m = Sheared::surface(&base, 0, 2, 0.4).unwrap();
    let u = vec![0.7, 1.1, 2.3];
    let exact = m.shape_at(0, &u).unwrap().second_fundamental_form;
    let jet = m.charts()[0].jet(&u);
    let error = |h: f64| {
        let mut worst = 0.0f64;
        for i in 0..3 {
            let mut up = u.clone();
            let mut down = u.clone();
            up[i] += h;
            down[i] -= h;
            let dn = (m.shape_at(0, &up).unwrap().normal - m.shape_at(0, &down).unwrap().normal) / (2.0 * h);
            for j in 0..3 {
                worst = worst.max((dn.dot(&jet.first[j]) - exact[(i, j)]).abs());
            }
        }
        worst
    };
    let (e1, e2) = (error(1e-2), error(5e-3));
    let order = (e1 / e2).log2();
    assert!(e2 < 1e-4, "{e1} {e2}");
    assert!(order > 1.8, "order {order}");
}

#[test]
fn stiffness_is_exactly_symmetric() {
    for m in [
        clifford(1, 1),
        equator(2),
        Sheared::surface(&clifford(1, 1), 0, 1, 0.5).unwrap(),
        clifford(1, 2),
    ] {
        for res in [8, 13, 20] {
            assert_eq!(assemble_jacobi(&m, res).unwrap().symmetry_defect(), 0.0);
        }
    }
}

#[test]
fn first_eigenvalue_obeys_the_simons_bound() {
    for m in [clifford(1, 1), clifford(1, 2), clifford(2, 1)] {
        let n = m.dim() as f64;
        let op = assemble_jacobi(&m, if n > 2.0 { 12 } else { 48 }).unwrap();
        let lambda1 = smallest_eigenpairs(&op, 1, &SolverOptions::default()).unwrap().values[0];
        assert!(lambda1 <= -2.0 * n + 1e-8, "{lambda1}");
        let q = rayleigh_quotient(&op, &test_function_a(&op)).unwrap();
        assert!(q >= lambda1 - 1e-10);
    }
}

#[test]
fn l4_identity_on_clifford_families() {
    for n in 2..=6u32 {
        for k in 1..n {
            let report = l4_identity_check(&clifford(k, n - k)).unwrap();
            assert!(report.passed, "({k},{}) {report:?}", n - k);
        }
    }
}

#[test]
fn local_curvature_bound_on_builtin_families() {
    let radii = [0.1, 0.25, 0.5, 1.0];
    let families = [
        (equator(2), -2.0),
        (equator(3), -3.0),
        (clifford(1, 1), -4.0),
        (clifford(1, 2), -6.0),
        (clifford(2, 1), -6.0),
    ];
    for (m, lambda1) in &families {
        let opts = SamplingOptions {
            cells_per_axis: 8,
            refine_ratio: 0.5,
            replicates: 8,
            ..SamplingOptions::default()
        };
        let c_v = sphere_jacobi::quadrature::volume_growth_constant(
            m,
            BallMetric::Euclidean,
            &Default::default(),
        )
        .unwrap();
        let opts = SamplingOptions {
            volume_growth: Some(c_v),
            ..opts
        };
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let chart = &m.charts()[0];
        for _ in 0..10 {
            let p = chart.point(&chart.sample_interior(&mut rng, POLE_MARGIN));
            for r in radii {
                let report = local_a_bound(m, &p, r, *lambda1, &opts).unwrap();
                assert!(report.passed, "{} r = {r}: {report:?}", m.label());
            }
        }
    }
}
