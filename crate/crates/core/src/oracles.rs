//! Linear-minimization and proximal oracles for the supported regularizers.
//!
//! The conditional-gradient block calls [`generalized_lmo`], which minimizes
//! `R(W) + ⟨W, ∇⟩` over the whole space. The proximal block calls
//! [`prox_step`], which minimizes
//!
//! ```text
//! φ(V) = R(V) + ⟨V, ∇⟩ + (ηβ/2)‖V + W − Z‖²_F
//! ```
//!
//! by completing the square into a projection (or shrinkage) of the center
//! `A = Z − W − ∇/(ηβ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{lp_norm, DenseMatrix};
use crate::svd::{self, SvdTriple};

/// Relative slack under which a point counts as inside a ball.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Regularizer attached to one block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    /// Indicator of `{X : ‖X‖_nuc ≤ tau}`. `rank_cap` restricts proximal
    /// steps to rank-`r` SVDs; `None` means full-rank projections.
    NuclearBall { tau: f64, rank_cap: Option<usize> },
    /// Indicator of the entrywise ℓ1 ball of radius `s`.
    L1Ball { s: f64 },
    /// Indicator of the entrywise ℓp ball of radius `s`, `p ∈ (1, 2]`.
    LpBall { p: f64, s: f64 },
    /// `lambda1‖X‖₁ + lambda2‖X‖²_F`.
    ElasticNet { lambda1: f64, lambda2: f64 },
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            Regularizer::NuclearBall { tau, rank_cap } => {
                if !ok(tau) {
                    return Err(Error::InvalidRegularizer("nuclear radius must be positive"));
                }
                if rank_cap == Some(0) {
                    return Err(Error::InvalidRegularizer("rank cap must be at least 1"));
                }
            }
            Regularizer::L1Ball { s } => {
                if !ok(s) {
                    return Err(Error::InvalidRegularizer("l1 radius must be positive"));
                }
            }
            Regularizer::LpBall { p, s } => {
                if !ok(s) {
                    return Err(Error::InvalidRegularizer("lp radius must be positive"));
                }
                if !(p > 1.0 && p <= 2.0) {
                    return Err(Error::InvalidRegularizer("lp exponent must lie in (1, 2]"));
                }
            }
            Regularizer::ElasticNet { lambda1, lambda2 } => {
                if !ok(lambda1) || !ok(lambda2) {
                    return Err(Error::InvalidRegularizer("elastic-net weights must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn is_indicator(&self) -> bool {
        !matches!(self, Regularizer::ElasticNet { .. })
    }

    /// Ball radius, `None` for the elastic net.
    pub fn radius(&self) -> Option<f64> {
        match *self {
            Regularizer::NuclearBall { tau, .. } => Some(tau),
            Regularizer::L1Ball { s } | Regularizer::LpBall { s, .. } => Some(s),
            Regularizer::ElasticNet { .. } => None,
        }
    }

    /// Euclidean diameter of the ball (twice the radius: attained on axis points).
    pub fn diameter(&self) -> Option<f64> {
        self.radius().map(|r| 2.0 * r)
    }

    /// Norm defining the ball, evaluated at `x`.
    pub fn ball_norm(&self, x: &DenseMatrix) -> Result<Option<f64>> {
        Ok(match *self {
            Regularizer::NuclearBall { .. } => Some(svd::nuclear_norm(x)?),
            Regularizer::L1Ball { .. } => Some(x.l1_norm()),
            Regularizer::LpBall { p, .. } => Some(x.lp_norm(p)),
            Regularizer::ElasticNet { .. } => None,
        })
    }
}

/// Relative amount by which `norm` exceeds the radius of `r` (0 when inside).
pub fn residual_from_norm(r: &Regularizer, norm: Option<f64>) -> f64 {
    match (r.radius(), norm) {
        (Some(rad), Some(n)) => ((n - rad) / rad).max(0.0),
        _ => 0.0,
    }
}

/// Relative constraint violation `max(0, ‖x‖ − radius)/radius`.
pub fn feasibility_residual(r: &Regularizer, x: &DenseMatrix) -> Result<f64> {
    Ok(residual_from_norm(r, r.ball_norm(x)?))
}

/// Value of the regularizer given the norm of `x` (for indicators) and `x`.
pub(crate) fn value_from_norm(r: &Regularizer, x: &DenseMatrix, norm: Option<f64>) -> f64 {
    match *r {
        Regularizer::ElasticNet { lambda1, lambda2 } => lambda1 * x.l1_norm() + lambda2 * x.frobenius_norm_sq(),
        _ => {
            let rad = r.radius().expect("indicator has a radius");
            match norm {
                Some(n) if n <= rad * (1.0 + FEASIBILITY_SLACK) => 0.0,
                _ => f64::INFINITY,
            }
        }
    }
}

/// `R(x)`: 0 or `+∞` for indicators, the penalty value for the elastic net.
pub fn regularizer_value(r: &Regularizer, x: &DenseMatrix) -> Result<f64> {
    let norm = r.ball_norm(x)?;
    Ok(value_from_norm(r, x, norm))
}

/// SVD accuracy settings used by the oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Low-rank routines switch to a dense SVD when `min(rows, cols)` is at
    /// most this.
    pub dense_below: usize,
}

impl Default for SvdSettings {
    fn default() -> Self {
        Self {
            tol: svd::DEFAULT_TOL,
            max_iter: svd::DEFAULT_MAX_ITER,
            dense_below: svd::DENSE_CROSSOVER,
        }
    }
}

/// Output of the generalized LMO.
#[derive(Clone, Debug)]
pub struct LmoOutput {
    pub point: DenseMatrix,
    /// Set when a ball LMO saw an exactly zero gradient; `point` is then 0.
    pub zero_gradient: bool,
}

/// `argmin_W R(W) + ⟨W, grad⟩`.
pub fn generalized_lmo(r: &Regularizer, grad: &DenseMatrix, seed: u64) -> Result<LmoOutput> {
    generalized_lmo_with(r, grad, seed, SvdSettings::default())
}

pub fn generalized_lmo_with(r: &Regularizer, grad: &DenseMatrix, seed: u64, svd_settings: SvdSettings) -> Result<LmoOutput> {
    r.validate()?;
    let (m, n) = grad.shape();
    if r.is_indicator() && grad.max_abs() == 0.0 {
        return Ok(LmoOutput {
            point: DenseMatrix::zeros(m, n),
            zero_gradient: true,
        });
    }
    let point = match *r {
        Regularizer::NuclearBall { tau, .. } => {
            let (u, _, v) = svd::top_singular_pair(grad, svd_settings.tol, svd_settings.max_iter, seed)?;
            DenseMatrix::outer(&u, &v, -tau)
        }
        Regularizer::L1Ball { s } => {
            let g = grad.as_slice();
            let mut best = 0;
            for (i, x) in g.iter().enumerate() {
                if x.abs() > g[best].abs() {
                    best = i;
                }
            }
            let mut out = DenseMatrix::zeros(m, n);
            out.as_mut_slice()[best] = -s * g[best].signum();
            out
        }
        Regularizer::LpBall { p, s } => DenseMatrix::from_raw(m, n, lp_ball_lmo(grad.as_slice(), p, s)),
        Regularizer::ElasticNet { lambda1, lambda2 } => elastic_net_min(lambda1, lambda2, grad),
    };
    Ok(LmoOutput {
        point,
        zero_gradient: false,
    })
}

/// Minimizer of `⟨w, g⟩` over `‖w‖_p ≤ s`: the Hölder extremizer
/// `w = −s·sign(g)|g|^{q−1}/‖g‖_q^{q−1}` with `q = p/(p−1)`.
fn lp_ball_lmo(g: &[f64], p: f64, s: f64) -> Vec<f64> {
    let q = p / (p - 1.0);
    let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if gmax == 0.0 {
        return vec![0.0; g.len()];
    }
    let powered: Vec<f64> = g.iter().map(|x| libm::pow(x.abs() / gmax, q - 1.0)).collect();
    // ‖g/gmax‖_q^{q−1} = (Σ powered_i^{q/(q−1)})^{(q−1)/q} = ‖powered‖_p
    let denom = lp_norm(&powered, p);
    g.iter()
        .zip(&powered)
        .map(|(x, w)| -s * x.signum() * w / denom)
        .collect()
}

#[inline]
pub fn soft_threshold(x: f64, theta: f64) -> f64 {
    x.signum() * (x.abs() - theta).max(0.0)
}

/// `argmin_W λ₁‖W‖₁ + λ₂‖W‖²_F + ⟨W, grad⟩`, entrywise
/// `soft_threshold(−grad/(2λ₂), λ₁/(2λ₂))`.
pub fn elastic_net_min(lambda1: f64, lambda2: f64, grad: &DenseMatrix) -> DenseMatrix {
    let theta = lambda1 / (2.0 * lambda2);
    grad.map(|g| soft_threshold(-g / (2.0 * lambda2), theta))
}

/// Euclidean projection onto `{x : ‖x‖₁ ≤ s}` by sort-and-threshold.
pub fn project_l1_ball(v: &[f64], s: f64) -> Vec<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= s {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - s) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|&x| soft_threshold(x, theta)).collect()
}

/// Euclidean projection onto `{x : ‖x‖_p ≤ s}` for `p ∈ (1, 2]`.
///
/// Each coordinate satisfies `y + μ p y^{p−1} = |v|` for a common
/// multiplier `μ ≥ 0`. The multiplier is found by regula falsi (Illinois
/// variant) on `Σ y_i(μ)^p = s^p`; see [`lp_shrink_scalar`] for the
/// per-coordinate solve.
pub fn project_lp_ball(v: &[f64], p: f64, s: f64) -> Vec<f64> {
    if lp_norm(v, p) <= s {
        return v.to_vec();
    }
    if p == 2.0 {
        let scale = s / lp_norm(v, 2.0);
        return v.iter().map(|x| x * scale).collect();
    }
    // Work on |v| / max|v| so the multiplier search is scale-free.
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let a: Vec<f64> = v.iter().map(|x| x.abs() / vmax).collect();
    let target = libm::pow(s / vmax, p);
    let mut ys = vec![0.0; a.len()];
    // Σ y^p − target, filling `ys`.
    let excess = |mu: f64, ys: &mut [f64]| -> f64 {
        let mut sum = 0.0;
        for (y, &ai) in ys.iter_mut().zip(&a) {
            let (yi, ypow) = lp_shrink_scalar(ai, mu, p);
            *y = yi;
            sum += ypow;
        }
        sum - target
    };
    let (mut lo, mut f_lo) = (0.0f64, excess(0.0, &mut ys));
    let (mut hi, mut f_hi) = (1.0f64, excess(1.0, &mut ys));
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = excess(hi, &mut ys);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mut mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let f_mid = excess(mid, &mut ys);
        if f_mid == 0.0 {
            hi = mid;
            break;
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        if f_mid.abs() <= 1e-15 * target {
            break;
        }
    }
    excess(hi, &mut ys);
    let norm = lp_norm(&ys, p);
    let target_norm = s / vmax;
    let fix = if norm > target_norm { target_norm / norm } else { 1.0 };
    v.iter()
        .zip(&ys)
        .map(|(x, y)| x.signum() * y * fix * vmax)
        .collect()
}

/// Root `y ∈ [0, a]` of `y + μ p y^{p−1} = a`, returned with `y^p`.
///
/// Solved for `u = y^{p−1}`: `u^k + μ p u = a` with `k = 1/(p − 1) ≥ 1` is
/// convex and increasing in `u`, so Newton started to the right of the root
/// decreases monotonically onto it.
fn lp_shrink_scalar(a: f64, mu: f64, p: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    if mu == 0.0 {
        return (a, libm::pow(a, p));
    }
    let k = 1.0 / (p - 1.0);
    let mp = mu * p;
    let mut u = (a / mp).min(libm::pow(a, p - 1.0));
    for _ in 0..100 {
        let uk1 = libm::pow(u, k - 1.0);
        let g = uk1 * u + mp * u - a;
        if g <= 0.0 {
            break;
        }
        let next = u - g / (k * uk1 + mp);
        if !(next < u) || next <= 0.0 {
            break;
        }
        let done = u - next <= 1e-16 * u;
        u = next;
        if done {
            break;
        }
    }
    let y = libm::pow(u, k);
    (y, y * u)
}

fn project_spectrum(svd: &SvdTriple, tau: f64) -> DenseMatrix {
    let s = project_l1_ball(&svd.s, tau);
    svd.compose_with(&s)
}

/// Projection onto `{X : ‖X‖_nuc ≤ tau, rank X ≤ r_star}`: rank-`r_star`
/// SVD of `center`, then ℓ1-ball projection of its singular values.
pub fn prox_nuclear_lowrank(center: &DenseMatrix, tau: f64, r_star: usize, seed: u64) -> Result<DenseMatrix> {
    prox_nuclear_lowrank_with(center, tau, r_star, seed, SvdSettings::default(), None)
}

/// As [`prox_nuclear_lowrank`] with explicit SVD settings and an optional
/// warm-start basis for the right singular subspace.
pub fn prox_nuclear_lowrank_with(
    center: &DenseMatrix,
    tau: f64,
    r_star: usize,
    seed: u64,
    svd_settings: SvdSettings,
    warm: Option<&DenseMatrix>,
) -> Result<DenseMatrix> {
    Ok(nuclear_lowrank_svd(center, tau, r_star, seed, svd_settings, warm)?.0)
}

pub(crate) fn nuclear_lowrank_svd(
    center: &DenseMatrix,
    tau: f64,
    r_star: usize,
    seed: u64,
    svd_settings: SvdSettings,
    warm: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let max = center.rows().min(center.cols());
    if r_star == 0 || r_star > max {
        return Err(Error::InvalidRank { k: r_star, max });
    }
    if max <= svd_settings.dense_below {
        let svd = svd::full_svd(center)?.leading(r_star);
        return Ok((project_spectrum(&svd, tau), svd.v));
    }
    let attempt = match warm {
        Some(start) => svd::truncated_svd_warm(center, r_star, svd_settings.tol, svd_settings.max_iter, start, seed),
        None => svd::truncated_svd(center, r_star, svd_settings.tol, svd_settings.max_iter, seed),
    };
    let svd = match attempt {
        Ok(svd) => svd,
        // Subspace iteration stalls when σ_k and σ_{k+1} nearly coincide;
        // a dense SVD resolves the leading block exactly.
        Err(Error::NonConvergence { .. }) if max <= svd::FULL_SVD_LIMIT => svd::full_svd(center)?.leading(r_star),
        Err(e) => return Err(e),
    };
    Ok((project_spectrum(&svd, tau), svd.v))
}

/// Full-rank Euclidean projection onto the nuclear ball of radius `tau`.
pub fn project_nuclear_ball(center: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    let svd = svd::full_svd(center)?;
    Ok(project_spectrum(&svd, tau))
}

/// Euclidean projection onto the ball of an indicator regularizer.
/// Nuclear balls honour `rank_cap`.
pub fn project_onto(r: &Regularizer, x: &DenseMatrix, seed: u64) -> Result<DenseMatrix> {
    let (m, n) = x.shape();
    match *r {
        Regularizer::NuclearBall { tau, rank_cap: Some(k) } => prox_nuclear_lowrank(x, tau, k.min(m.min(n)), seed),
        Regularizer::NuclearBall { tau, rank_cap: None } => project_nuclear_ball(x, tau),
        Regularizer::L1Ball { s } => Ok(DenseMatrix::from_raw(m, n, project_l1_ball(x.as_slice(), s))),
        Regularizer::LpBall { p, s } => Ok(DenseMatrix::from_raw(m, n, project_lp_ball(x.as_slice(), p, s))),
        Regularizer::ElasticNet { .. } => Err(Error::Unsupported("projection onto an elastic-net regularizer")),
    }
}

/// Center `A = z − w − grad/(η β)` of the proximal step.
pub fn prox_center(z: &DenseMatrix, w: &DenseMatrix, grad: &DenseMatrix, eta: f64, beta: f64) -> DenseMatrix {
    let c = 1.0 / (eta * beta);
    let data = z
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .zip(grad.as_slice())
        .map(|((zi, wi), gi)| zi - wi - c * gi)
        .collect();
    DenseMatrix::from_raw(z.rows(), z.cols(), data)
}

/// `argmin_V R(V) + ⟨V, grad⟩ + (ηβ/2)‖V + w − z‖²_F`.
pub fn prox_step(
    r: &Regularizer,
    z: &DenseMatrix,
    w: &DenseMatrix,
    grad: &DenseMatrix,
    eta: f64,
    beta: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    prox_step_with(r, z, w, grad, eta, beta, seed, SvdSettings::default(), None).map(|(v, _)| v)
}

/// Proximal step with explicit SVD settings. For rank-capped nuclear balls
/// `warm` seeds the truncated SVD and the returned basis can seed the next
/// call.
#[allow(clippy::too_many_arguments)]
pub fn prox_step_with(
    r: &Regularizer,
    z: &DenseMatrix,
    w: &DenseMatrix,
    grad: &DenseMatrix,
    eta: f64,
    beta: f64,
    seed: u64,
    svd_settings: SvdSettings,
    warm: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, Option<DenseMatrix>)> {
    r.validate()?;
    let eb = eta * beta;
    if !(eb > 0.0 && eb.is_finite()) {
        return Err(Error::InvalidConstants("prox step needs eta * beta > 0"));
    }
    let center = prox_center(z, w, grad, eta, beta);
    let (m, n) = center.shape();
    match *r {
        Regularizer::NuclearBall { tau, rank_cap: Some(k) } => {
            let (v, basis) = nuclear_lowrank_svd(&center, tau, k.min(m.min(n)), seed, svd_settings, warm)?;
            Ok((v, Some(basis)))
        }
        Regularizer::ElasticNet { lambda1, lambda2 } => {
            let denom = 2.0 * lambda2 + eb;
            Ok((center.map(|a| soft_threshold(eb * a / denom, lambda1 / denom)), None))
        }
        _ => Ok((project_onto(r, &center, seed)?, None)),
    }
}
