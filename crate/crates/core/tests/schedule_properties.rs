use proptest::prelude::*;
use rmrk_core::matrix::lp_norm;
use rmrk_core::schedules::*;

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `α/2‖x + y‖² + δ/2‖x‖²` on a pair of vectors.
fn two_block(alpha: f64, delta: f64, x: &[f64], y: &[f64]) -> f64 {
    let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    0.5 * alpha * sq(&s) + 0.5 * delta * sq(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composed_constant_lies_below_both(alpha in 1e-3f64..1e3, delta in 1e-3f64..1e3) {
        let tau = composed_strong_convexity(alpha, delta).unwrap();
        prop_assert!(tau > 0.0 && tau < alpha.min(delta));
    }

    #[test]
    fn composed_constant_is_a_strong_convexity_modulus(
        alpha in 0.01f64..10.0,
        delta in 0.01f64..10.0,
        q1 in prop::collection::vec(-3.0f64..3.0, 8),
        q2 in prop::collection::vec(-3.0f64..3.0, 8),
        lambda in 0.0f64..1.0,
    ) {
        let tau = composed_strong_convexity(alpha, delta).unwrap();
        let f = |q: &[f64]| two_block(alpha, delta, &q[..4], &q[4..]);
        let mid: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let diff: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| a - b).collect();
        let rhs = lambda * f(&q1) + (1.0 - lambda) * f(&q2) - 0.5 * tau * lambda * (1.0 - lambda) * sq(&diff);
        let scale = 1.0 + f(&q1).abs() + f(&q2).abs();
        prop_assert!(f(&mid) <= rhs + 1e-10 * scale);
    }

    #[test]
    fn composed_constant_is_tight(alpha in 0.01f64..10.0, delta in 0.01f64..10.0) {
        // The Hessian [[α+δ, α], [α, α]] has smallest eigenvalue τ; along its
        // eigenvector the inequality holds with equality.
        let tau = composed_strong_convexity(alpha, delta).unwrap();
        let (a, b) = (alpha + delta - tau, alpha);
        let norm = (a * a + b * b).sqrt();
        let e = (-b / norm, a / norm);
        let hv = ((alpha + delta) * e.0 + alpha * e.1, alpha * e.0 + alpha * e.1);
        prop_assert!((hv.0 - tau * e.0).abs() <= 1e-9 * (alpha + delta));
        prop_assert!((hv.1 - tau * e.1).abs() <= 1e-9 * (alpha + delta));
    }

    #[test]
    fn gradient_bounds_the_gap(z in prop::collection::vec(-10.0f64..10.0, 1..20), m in prop::collection::vec(-10.0f64..10.0, 20)) {
        // g(z) = ½‖z − m‖², α = 1, z* = m.
        let r: Vec<f64> = z.iter().zip(&m).map(|(a, b)| a - b).collect();
        let gap = 0.5 * sq(&r);
        let grad_norm = sq(&r).sqrt();
        prop_assert!(grad_norm + 1e-12 >= (0.5f64).sqrt() * gap.sqrt());
        // For this loss the quadratic-growth identity ‖∇g‖² = 2α(g − g*) is exact.
        prop_assert!((grad_norm * grad_norm - 2.0 * gap).abs() <= 1e-12 * (1.0 + gap));
    }

    #[test]
    fn schedules_stay_in_unit_interval(alpha in 0.01f64..1.0, c in 0.01f64..1e3, d in 0.01f64..1e2, t in 1u64..100_000) {
        let beta = 1.0;
        for s in [
            make_min_diam_schedule(alpha, beta, c, d).unwrap(),
            make_strong_set_schedule(alpha, beta).unwrap(),
            StepSchedule::OpenLoop,
        ] {
            let eta = s.eta(t);
            prop_assert!(eta > 0.0 && eta <= 1.0, "{s:?} at {t}: {eta}");
        }
    }

    #[test]
    fn lp_ball_is_strongly_convex_with_reported_constant(
        a in prop::collection::vec(-2.0f64..2.0, 6),
        b in prop::collection::vec(-2.0f64..2.0, 6),
        dir in prop::collection::vec(-1.0f64..1.0, 6),
        p in 1.1f64..2.0,
        s in 0.5f64..4.0,
        lambda in 0.0f64..1.0,
    ) {
        let n = a.len();
        prop_assume!(lp_norm(&a, p) > 1e-6 && lp_norm(&b, p) > 1e-6 && sq(&dir) > 1e-6);
        let x: Vec<f64> = a.iter().map(|v| v * s / lp_norm(&a, p)).collect();
        let y: Vec<f64> = b.iter().map(|v| v * s / lp_norm(&b, p)).collect();
        let gamma = lp_ball_strong_convexity(p, s, n).unwrap();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u - v).collect();
        let radius = 0.5 * gamma * lambda * (1.0 - lambda) * sq(&diff);
        let unit = sq(&dir).sqrt();
        // λx + (1−λ)y + radius·z stays in the ball for any Euclidean unit z.
        let probe: Vec<f64> = x
            .iter()
            .zip(&y)
            .zip(&dir)
            .map(|((u, v), d)| lambda * u + (1.0 - lambda) * v + radius * d / unit)
            .collect();
        prop_assert!(lp_norm(&probe, p) <= s * (1.0 + 1e-12));
    }
}

#[test]
fn recursions_hold_for_random_constants() {
    let mut rng = rmrk_core::rng::SeededRng::new(2024);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let alpha = 0.05 + 0.95 * rng.uniform();
        let beta = 1.0 + 4.0 * rng.uniform();
        let alpha = alpha.min(beta);
        let d_y = 0.1 + 20.0 * rng.uniform();
        let c = 1e-3 + 1e3 * rng.uniform();
        let h1 = c * rng.uniform();
        let rep = simulate_recursion(RecursionLemma::MinDiam { alpha, beta, d_y, h1, c }, 10_000).unwrap();
        worst = worst.max(rep.max_violation);

        let c1 = 1e-2 + 10.0 * rng.uniform();
        let c2 = 1e-3 + (1.0 - 1e-3) * rng.uniform();
        let h1 = 100.0 * rng.uniform();
        let rep = simulate_recursion(RecursionLemma::StrongSet { c1, c2, h1 }, 10_000).unwrap();
        worst = worst.max(rep.max_violation);
    }
    assert!(worst <= 1e-12, "max violation {worst}");
}
