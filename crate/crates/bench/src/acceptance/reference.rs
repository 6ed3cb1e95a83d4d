//! Slow, independent reference routines the acceptance checks compare the
//! library oracles against. None of them share code with the oracles.

use rmrk_core::svd;
use rmrk_core::DenseMatrix;

/// Euclidean projection of a nonnegative vector onto `{w ≥ 0, Σw ≤ tau}`
/// by sorting, the textbook route.
fn project_capped_simplex(values: &[f64], tau: f64) -> Vec<f64> {
    if values.iter().sum::<f64>() <= tau {
        return values.to_vec();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - tau) / (i + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    values.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto the nuclear ball from a full dense SVD.
pub fn nuclear_projection(center: &DenseMatrix, tau: f64) -> DenseMatrix {
    let svd = svd::full_svd(center).expect("dense SVD of a finite matrix");
    let shrunk = project_capped_simplex(&svd.s, tau);
    svd.compose_with(&shrunk)
}

fn soft(x: f64, theta: f64) -> f64 {
    x.signum() * (x.abs() - theta).max(0.0)
}

/// ℓ1-ball projection by a quadratic penalty: minimises
/// `½‖x − v‖² + (ρ/2)·max(‖x‖₁ − s, 0)²`. The minimiser is `soft(v, θ)` with
/// `θ = ρ·max(‖x‖₁ − s, 0)`, a monotone fixed point found by bisection.
/// The constraint violation is `θ/ρ`, so a large `ρ` gives the projection.
pub fn l1_projection_penalty(v: &[f64], s: f64) -> Vec<f64> {
    const RHO: f64 = 1e10;
    let excess = |theta: f64| v.iter().map(|&x| soft(x, theta).abs()).sum::<f64>() - s;
    let (mut lo, mut hi) = (0.0, v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    if excess(0.0) <= 0.0 {
        return v.to_vec();
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - RHO * excess(mid).max(0.0) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v.iter().map(|&x| soft(x, 0.5 * (lo + hi))).collect()
}

/// Minimiser of `g·w + λ₁|w| + λ₂w²` over a grid: a coarse sweep of
/// `[-radius, radius]` followed by two refinements around the best point.
pub fn elastic_net_grid(g: f64, lambda1: f64, lambda2: f64) -> f64 {
    let obj = |w: f64| g * w + lambda1 * w.abs() + lambda2 * w * w;
    let radius = (g.abs() + lambda1) / lambda2 + 1.0;
    let mut best = 0.0;
    let (mut lo, mut hi) = (-radius, radius);
    for _ in 0..3 {
        let steps = 20_000;
        let h = (hi - lo) / steps as f64;
        for k in 0..=steps {
            let w = lo + k as f64 * h;
            if obj(w) < obj(best) {
                best = w;
            }
        }
        lo = best - 2.0 * h;
        hi = best + 2.0 * h;
    }
    best
}
