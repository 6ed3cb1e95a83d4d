//! Step-size rules, the computable gap bound `C`, strong-convexity constants
//! and worst-case simulators for the two scalar recursions behind the rates.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::oracles::{generalized_lmo, regularizer_value};
use crate::problem::ProblemSpec;

/// Step-size rule `t ↦ η_t`, `t ≥ 1`. Every rule is clamped into `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    /// `α/(2β)` for `t ≤ t0`, then `2/(t − t0 + 4β/α)`.
    MinDiamTwoPhase { alpha: f64, beta: f64, t0: u64 },
    /// `1/(t − 1 + 6β/α)`.
    StrongSetDecaying { alpha: f64, beta: f64 },
    FixedStep { eta: f64 },
    /// `2/(t + 1)`, the usual open-loop conditional-gradient rule.
    OpenLoop,
}

impl StepSchedule {
    pub fn eta(&self, t: u64) -> f64 {
        let t = t.max(1) as f64;
        let eta = match *self {
            StepSchedule::MinDiamTwoPhase { alpha, beta, t0 } => {
                if t <= t0 as f64 {
                    alpha / (2.0 * beta)
                } else {
                    2.0 / (t - t0 as f64 + 4.0 * beta / alpha)
                }
            }
            StepSchedule::StrongSetDecaying { alpha, beta } => 1.0 / (t - 1.0 + 6.0 * beta / alpha),
            StepSchedule::FixedStep { eta } => eta,
            StepSchedule::OpenLoop => 2.0 / (t + 1.0),
        };
        eta.min(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSchedule::MinDiamTwoPhase { alpha, beta, .. } | StepSchedule::StrongSetDecaying { alpha, beta } => {
                check_alpha_beta(alpha, beta)
            }
            StepSchedule::FixedStep { eta } => {
                if eta > 0.0 && eta <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConstants("fixed step must lie in (0, 1]"))
                }
            }
            StepSchedule::OpenLoop => Ok(()),
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn check_alpha_beta(alpha: f64, beta: f64) -> Result<()> {
    if !positive(alpha) || !positive(beta) {
        return Err(Error::InvalidConstants("alpha and beta must be positive"));
    }
    if alpha > beta {
        return Err(Error::InvalidConstants("alpha must not exceed beta"));
    }
    Ok(())
}

/// `t0 = max{0, ⌈(2β/α) ln(2C/(α D²))⌉}`.
pub fn min_diam_t0(alpha: f64, beta: f64, c: f64, d_y: f64) -> Result<u64> {
    check_alpha_beta(alpha, beta)?;
    if !positive(c) || !positive(d_y) {
        return Err(Error::InvalidConstants("C and D_Y must be positive"));
    }
    let raw = 2.0 * beta / alpha * libm::log(2.0 * c / (alpha * d_y * d_y));
    Ok(if raw > 0.0 { libm::ceil(raw) as u64 } else { 0 })
}

pub fn make_min_diam_schedule(alpha: f64, beta: f64, c: f64, d_y: f64) -> Result<StepSchedule> {
    let t0 = min_diam_t0(alpha, beta, c, d_y)?;
    Ok(StepSchedule::MinDiamTwoPhase { alpha, beta, t0 })
}

pub fn make_strong_set_schedule(alpha: f64, beta: f64) -> Result<StepSchedule> {
    check_alpha_beta(alpha, beta)?;
    Ok(StepSchedule::StrongSetDecaying { alpha, beta })
}

/// Constant step `min{α/(2β), γG/(8β)}` for strongly convex sets with
/// gradients bounded below by `G`.
pub fn fixed_step_strong_set(alpha: f64, beta: f64, gamma: f64, g: f64) -> Result<StepSchedule> {
    if ![alpha, beta, gamma, g].iter().all(|&x| positive(x)) {
        return Err(Error::InvalidConstants("all constants must be positive"));
    }
    let eta = (alpha / (2.0 * beta)).min(gamma * g / (8.0 * beta)).min(1.0);
    Ok(StepSchedule::FixedStep { eta })
}

/// Constant step `min{α, δ}/(2β)` for a `δ`-strongly convex regularizer.
pub fn fixed_step_strong_reg(alpha: f64, delta: f64, beta: f64) -> Result<StepSchedule> {
    if ![alpha, delta, beta].iter().all(|&x| positive(x)) {
        return Err(Error::InvalidConstants("all constants must be positive"));
    }
    Ok(StepSchedule::FixedStep {
        eta: (alpha.min(delta) / (2.0 * beta)).min(1.0),
    })
}

/// Strong convexity of `(X, Y) ↦ g(X + Y) + R_X(X) + R_Y(Y)` when `g` is
/// `α`-strongly convex and one regularizer is `δ`-strongly convex:
/// `τ = (δ + 2α − √(δ² + 4α²))/2`.
pub fn composed_strong_convexity(alpha: f64, delta: f64) -> Result<f64> {
    if !positive(alpha) || !positive(delta) {
        return Err(Error::InvalidConstants("alpha and delta must be positive"));
    }
    // Rationalized to avoid cancellation when δ ≪ α.
    let root = libm::sqrt(delta * delta + 4.0 * alpha * alpha);
    Ok(2.0 * alpha * delta / (delta + 2.0 * alpha + root))
}

/// Euclidean strong-convexity constant of the ℓp ball of radius `s` in
/// dimension `n_entries`: `(p − 1)/s · N^{1/2 − 1/p}`.
pub fn lp_ball_strong_convexity(p: f64, s: f64, n_entries: usize) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) || !positive(s) || n_entries == 0 {
        return Err(Error::InvalidConstants("need p in (1, 2], s > 0, N >= 1"));
    }
    Ok((p - 1.0) / s * libm::pow(n_entries as f64, 0.5 - 1.0 / p))
}

/// Upper bound on `f(x1, y1) − f*` computable from one pair of LMO calls.
pub fn gap_bound_c(problem: &ProblemSpec, x1: &DenseMatrix, y1: &DenseMatrix, seed: u64) -> Result<f64> {
    let rx1 = regularizer_value(&problem.reg_x, x1)?;
    if rx1.is_infinite() {
        return Err(Error::InfeasibleStart("x"));
    }
    let ry1 = regularizer_value(&problem.reg_y, y1)?;
    if ry1.is_infinite() {
        return Err(Error::InfeasibleStart("y"));
    }
    let z = x1.add(y1);
    let grad = problem.gradient(&z);
    let w1 = generalized_lmo(&problem.reg_y, &grad, seed)?.point;
    let v1 = generalized_lmo(&problem.reg_x, &grad, seed.wrapping_add(1))?.point;
    let rw = regularizer_value(&problem.reg_y, &w1)?;
    let rv = regularizer_value(&problem.reg_x, &v1)?;
    let lin = z.sub(&w1.add(&v1)).dot(&grad);
    Ok((lin + ry1 + rx1 - rw - rv).max(0.0))
}

/// Scalar recursion to simulate at equality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RecursionLemma {
    /// `h_{t+1} = (1 − η_t) h_t + η_t² β D²` with the two-phase steps built
    /// from `C ≥ h1`.
    MinDiam { alpha: f64, beta: f64, d_y: f64, h1: f64, c: f64 },
    /// `h_{t+1} = (1 − η_t) h_t` with `η_t = 3/(t − 1 + 3/c2)`.
    StrongSet { c1: f64, c2: f64, h1: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionReport {
    pub horizon: usize,
    /// `max_t (h_t − bound_t)`; non-positive when the closed form holds.
    pub max_violation: f64,
    /// Closed-form bound per `t`; `+∞` where the bound makes no claim.
    pub bound_values: Vec<f64>,
    pub sequence_values: Vec<f64>,
}

pub fn simulate_recursion(lemma: RecursionLemma, horizon: usize) -> Result<RecursionReport> {
    if horizon == 0 {
        return Err(Error::InvalidConstants("horizon must be at least 1"));
    }
    let mut seq = Vec::with_capacity(horizon);
    let mut bound = Vec::with_capacity(horizon);
    match lemma {
        RecursionLemma::MinDiam { alpha, beta, d_y, h1, c } => {
            if !(h1 >= 0.0) || c < h1 {
                return Err(Error::InvalidConstants("need 0 <= h1 <= C"));
            }
            let sched = make_min_diam_schedule(alpha, beta, c, d_y)?;
            let StepSchedule::MinDiamTwoPhase { t0, .. } = sched else {
                unreachable!()
            };
            let mut h = h1;
            for t in 1..=horizon as u64 {
                seq.push(h);
                bound.push(if t > t0 {
                    4.0 * beta * d_y * d_y / ((t - t0) as f64 - 1.0 + 4.0 * beta / alpha)
                } else {
                    f64::INFINITY
                });
                let eta = sched.eta(t);
                h = (1.0 - eta) * h + eta * eta * beta * d_y * d_y;
            }
        }
        RecursionLemma::StrongSet { c1, c2, h1 } => {
            if !positive(c1) || !(c2 > 0.0 && c2 <= 1.0) || !(h1 >= 0.0) {
                return Err(Error::InvalidConstants("need c1 > 0, 0 < c2 <= 1, h1 >= 0"));
            }
            let a = 9.0 * (1.0 / (c1 * c1)).max(h1 / (c2 * c2));
            let b = 3.0 / c2 - 1.0;
            let mut h = h1;
            for t in 1..=horizon {
                let tb = t as f64 + b;
                seq.push(h);
                bound.push(a / (tb * tb));
                h *= 1.0 - 3.0 / tb;
            }
        }
    }
    let max_violation = seq
        .iter()
        .zip(&bound)
        .map(|(h, b)| h - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RecursionReport {
        horizon,
        max_violation,
        bound_values: bound,
        sequence_values: seq,
    })
}
