use fhmin::diagnostics::{classify, kappa_c, nehari_residual, Classification};
use fhmin::dynamics::{self, SolverConfig};
use fhmin::field::UNIT_LAMBDA_LENGTH;
use fhmin::potential::GuardMode;
use fhmin::{GridGeometry, ModifiedPotential, PotentialParams, ScalarField};
use proptest::prelude::*;

const N: usize = 8;

fn grid() -> GridGeometry {
    GridGeometry::new(UNIT_LAMBDA_LENGTH, N).unwrap()
}

/// A field with the given interior values (row-major over `1..N`).
fn field_from(interior: &[f64]) -> ScalarField {
    let g = grid();
    let mut u = ScalarField::zeros(g);
    for j in 1..N {
        for i in 1..N {
            u.set(i, j, interior[(j - 1) * (N - 1) + (i - 1)]);
        }
    }
    u
}

fn interior(bound: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-bound..bound, (N - 1) * (N - 1))
}

/// Five-point central difference of `f` at `x` with step `h`.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, x in interior(1.0), y in interior(1.0)) {
        let (u, v) = (field_from(&x), field_from(&y));
        let combo = u.scaled(a).axpy(b, &v).unwrap().laplacian();
        let split = u.laplacian().scaled(a).axpy(b, &v.laplacian()).unwrap();
        let scale = 1.0 + combo.inf_norm();
        prop_assert!(combo.axpy(-1.0, &split).unwrap().inf_norm() <= 1e-12 * scale);
    }

    #[test]
    fn greens_identity(x in interior(1.0), y in interior(1.0)) {
        let (u, v) = (field_from(&x), field_from(&y));
        let lhs = -u.laplacian().dot(&v).unwrap();
        let rhs = u.edge_gradient_dot(&v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn laplacian_is_negative_semidefinite(x in interior(1.0)) {
        let u = field_from(&x);
        let q = -u.laplacian().dot(&u).unwrap();
        let lower = grid().discrete_lambda1() * u.dot(&u).unwrap();
        prop_assert!(q >= lower * (1.0 - 1e-12));
    }

    #[test]
    fn potential_derivatives_match_differences(theta in 0.05..0.99f64, u in -0.99..0.99f64) {
        let p = PotentialParams::new(theta).unwrap();
        let h = 1e-3 * (1.0 - u.abs());
        let w = |x: f64| p.w(x).unwrap();
        let dw = |x: f64| p.dw(x, GuardMode::Strict).unwrap();
        let fd1 = d5(w, u, h);
        let fd2 = d5(dw, u, h);
        let (a1, a2) = (dw(u), p.d2w(u, GuardMode::Strict).unwrap());
        prop_assert!((fd1 - a1).abs() <= 1e-6 * a1.abs().max(1e-3), "W' {} vs {}", fd1, a1);
        prop_assert!((fd2 - a2).abs() <= 1e-6 * a2.abs().max(1e-3), "W'' {} vs {}", fd2, a2);
    }

    #[test]
    fn potential_is_even_and_derivative_odd(theta in 0.05..0.99f64, u in -0.999..0.999f64) {
        let p = PotentialParams::new(theta).unwrap();
        prop_assert_eq!(p.w(u).unwrap(), p.w(-u).unwrap());
        prop_assert_eq!(p.dw(u, GuardMode::Strict).unwrap(), -p.dw(-u, GuardMode::Strict).unwrap());
    }

    #[test]
    fn modified_potential_sandwich(theta in 0.3..0.95f64, u in -3.0..3.0f64) {
        let p = PotentialParams::new(theta).unwrap();
        let m = ModifiedPotential::build(&p, 1.5).unwrap();
        prop_assert_eq!(m.value(u), m.value(-u));
        prop_assert_eq!(m.derivative(u), -m.derivative(-u));
        if u.abs() <= m.u_hat() {
            prop_assert!((m.value(u) - p.w(u).unwrap()).abs() <= 1e-14);
        } else if u.abs() <= 1.0 {
            prop_assert!(m.value(u) <= p.w(u).unwrap());
        }
        // W̃ + u²/2 is convex away from the anchor kink.
        if (u.abs() - m.u_hat()).abs() > 1e-9 {
            prop_assert!(m.second_derivative(u) + 1.0 >= 0.0);
        }
        prop_assert!(!m.value(u).is_nan() && !m.derivative(u).is_nan());
        // Global minimum value is attained at ±u_θ.
        prop_assert!(m.value(u) >= m.value(m.u_theta()) - 1e-15);
    }

    #[test]
    fn modified_derivative_matches_differences(theta in 0.3..0.95f64, u in -2.5..2.5f64) {
        let p = PotentialParams::new(theta).unwrap();
        let m = ModifiedPotential::build(&p, 1.5).unwrap();
        // the series varies on the scale 1/k
        let h = 1e-3 / (2 * m.order() + 2) as f64;
        prop_assume!((u.abs() - m.u_hat()).abs() > 3.0 * h);
        // for small θ the order k is large and the series overflows to +∞
        prop_assume!(m.value(u.abs() + 2.0 * h).is_finite());
        let fd = d5(|x| m.value(x), u, h);
        let a = m.derivative(u);
        prop_assert!((fd - a).abs() <= 1e-6 * a.abs().max(1e-3), "{} vs {}", fd, a);
    }

    #[test]
    fn nehari_positive_above_discrete_threshold(theta in 0.1..0.9f64, extra in 0.0..0.5f64, x in interior(0.99)) {
        let p = PotentialParams::new(theta).unwrap();
        let u = field_from(&x);
        prop_assume!(u.inf_norm() > 0.0);
        let kc = kappa_c(theta, grid().discrete_lambda1()).unwrap();
        let kappa = kc * (1.0 + extra);
        prop_assert!(nehari_residual(&u, kappa, &p).unwrap() > 0.0);
    }

    #[test]
    fn classification_is_odd(max_u in 0.0..1.0f64, min_u in -1.0..0.0f64) {
        let c = classify(max_u, min_u, 1e-3);
        prop_assert_eq!(classify(-min_u, -max_u, 1e-3), c.negated());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_step_is_odd(seed in any::<u64>(), kappa in 0.01..0.5f64) {
        let mut cfg = SolverConfig::new(0.7, kappa);
        cfg.grid = grid();
        cfg.dt = 0.9 * cfg.stability_bound();
        cfg.seed = seed;
        let u = dynamics::init_random(&cfg);
        let (a, ra) = dynamics::step(&u, &cfg).unwrap();
        let (b, rb) = dynamics::step(&u.scaled(-1.0), &cfg).unwrap();
        prop_assert_eq!(ra, rb);
        prop_assert_eq!(a.scaled(-1.0), b);
    }

    #[test]
    fn energy_never_increases(seed in any::<u64>(), theta in 0.3..0.95f64, kappa in 0.01..0.4f64) {
        let mut cfg = SolverConfig::new(theta, kappa);
        cfg.grid = grid();
        cfg.dt = 0.5 * cfg.stability_bound().min(0.05);
        cfg.seed = seed;
        cfg.t_min = 1.0;
        cfg.t_max = 40.0;
        cfg.checkpoint_period = 0.5;
        let run = dynamics::run_to_equilibrium(&cfg).unwrap();
        prop_assert!(run.energy_monotone(), "{:?}", run.flags);
        if run.classification == Classification::NontrivialPositive {
            prop_assert!(run.min_u >= -1e-12);
        }
    }
}

/// Smallest eigenvalue of `-Δ_h` by power iteration on `σI + Δ_h`.
fn power_iteration_lambda1(g: GridGeometry) -> f64 {
    let h = g.spacing();
    let sigma = 8.0 / (h * h);
    let mut v = g.sample(|x, y| 1.0 + 0.3 * (x * 1.3).sin() * (y * 0.7).cos()).unwrap();
    let mut rq = 0.0;
    for _ in 0..40_000 {
        let w = v.scaled(sigma).axpy(1.0, &v.laplacian()).unwrap();
        rq = w.dot(&v).unwrap() / v.dot(&v).unwrap();
        v = w.scaled(1.0 / w.inf_norm());
    }
    sigma - rq
}

#[test]
fn discrete_lambda1_matches_power_iteration() {
    for n in [8, 16, 32] {
        let g = GridGeometry::new(UNIT_LAMBDA_LENGTH, n).unwrap();
        let oracle = power_iteration_lambda1(g);
        assert!((oracle - g.discrete_lambda1()).abs() < 1e-8, "N={n}: {oracle} vs {}", g.discrete_lambda1());
    }
}
