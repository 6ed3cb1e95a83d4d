//! The alternating conditional-gradient / proximal-gradient method and the
//! baselines it is compared against.
//!
//! Every solver starts from `(0, 0)` unless an initial point is supplied and
//! produces a trace of [`IterationRecord`]s. Record `t` describes the iterate
//! `Q_t` *before* step `t` together with the coefficient step `t` used, so a
//! run of `max_iters` steps with `record_every = 1` yields `max_iters` rows;
//! the final iterate is returned alongside the trace.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::oracles::{
    generalized_lmo_with, project_lp_ball, project_l1_ball, project_nuclear_ball, prox_step_with,
    residual_from_norm, value_from_norm, Regularizer, SvdSettings,
};
use crate::problem::{Block, ProblemSpec};
use crate::schedules::StepSchedule;
use crate::svd;

/// Relative threshold defining `rank_x`.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Interval-width tolerance of the golden-section line search.
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Conditional gradient on `Y`, proximal gradient on `X`.
    AltCgPg,
    /// Proximal gradient on `Y`, conditional gradient on `X`.
    AltPgCg,
    /// Conditional gradient on both blocks.
    Cgcg,
    /// Conditional gradient on both blocks, then one projected-gradient step on `Y`.
    CgcgP,
    /// Accelerated projected gradient on the product of the two balls.
    Fista,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::AltCgPg,
        Algorithm::AltPgCg,
        Algorithm::Cgcg,
        Algorithm::CgcgP,
        Algorithm::Fista,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::AltCgPg => "alt-cgpg",
            Algorithm::AltPgCg => "alt-pgcg",
            Algorithm::Cgcg => "cgcg",
            Algorithm::CgcgP => "cgcg-p",
            Algorithm::Fista => "fista",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let norm: alloc::string::String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Some(match norm.as_str() {
            "altcgpg" => Algorithm::AltCgPg,
            "altpgcg" => Algorithm::AltPgCg,
            "cgcg" => Algorithm::Cgcg,
            "cgcgp" => Algorithm::CgcgP,
            "fista" => Algorithm::Fista,
            _ => return None,
        })
    }

    /// Block that receives the proximal update in the alternating methods.
    pub fn prox_block(&self) -> Option<Block> {
        match self {
            Algorithm::AltCgPg => Some(Block::X),
            Algorithm::AltPgCg => Some(Block::Y),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Step sizes. The alternating methods always use them inside the
    /// proximal step, even when line search picks the combination weight.
    pub schedule: StepSchedule,
    pub line_search: bool,
    pub max_iters: usize,
    pub f_target: Option<f64>,
    pub time_budget_s: Option<f64>,
    pub seed: u64,
    pub record_every: usize,
    pub svd: SvdSettings,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, max_iters: usize) -> Self {
        Self {
            algorithm,
            schedule: StepSchedule::OpenLoop,
            line_search: false,
            max_iters,
            f_target: None,
            time_budget_s: None,
            seed: 0,
            record_every: 1,
            svd: SvdSettings::default(),
        }
    }

    pub fn with_schedule(mut self, schedule: StepSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_line_search(mut self, on: bool) -> Self {
        self.line_search = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConstants("max_iters must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConstants("record_every must be at least 1"));
        }
        if let Some(b) = self.time_budget_s {
            if !(b > 0.0) {
                return Err(Error::InvalidConstants("time budget must be positive"));
            }
        }
        self.schedule.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub wall_time_s: f64,
    /// `g(X_t + Y_t)` plus any finite penalty terms; ball constraints are
    /// reported through `feas_x` / `feas_y` instead of as `+∞`.
    pub f_value: f64,
    /// Combination coefficient used at step `t` (0 on a terminal record).
    pub eta_used: f64,
    pub feas_x: f64,
    pub feas_y: f64,
    pub rank_x: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub trace: Vec<IterationRecord>,
}

/// Source of elapsed seconds since the solve started.
pub trait Clock {
    fn elapsed_s(&self) -> f64;
}

/// Clock that always reads 0; time budgets never trigger.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_s(&self) -> f64 {
        0.0
    }
}

/// Objective value, feasibility residuals and rank of one iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSummary {
    pub f_value: f64,
    pub feas_x: f64,
    pub feas_y: f64,
    pub rank_x: usize,
}

pub fn summarize_point(problem: &ProblemSpec, x: &DenseMatrix, y: &DenseMatrix) -> Result<PointSummary> {
    let sx = svd::singular_values(x)?;
    let nuc_x: f64 = sx.iter().sum();
    let norm_x = match problem.reg_x {
        Regularizer::NuclearBall { .. } => Some(nuc_x),
        r => r.ball_norm(x)?,
    };
    let norm_y = problem.reg_y.ball_norm(y)?;
    let pen = |r: &Regularizer, m: &DenseMatrix| match r {
        Regularizer::ElasticNet { .. } => value_from_norm(r, m, None),
        _ => 0.0,
    };
    Ok(PointSummary {
        f_value: problem.loss(&x.add(y)) + pen(&problem.reg_x, x) + pen(&problem.reg_y, y),
        feas_x: residual_from_norm(&problem.reg_x, norm_x),
        feas_y: residual_from_norm(&problem.reg_y, norm_y),
        rank_x: svd::numerical_rank_of(&sx, RANK_THRESHOLD),
    })
}

/// Smooth loss plus elastic-net penalties; indicator terms are taken as 0.
fn finite_objective(problem: &ProblemSpec, x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let mut f = problem.loss(&x.add(y));
    for (r, m) in [(&problem.reg_x, x), (&problem.reg_y, y)] {
        if let Regularizer::ElasticNet { .. } = r {
            f += value_from_norm(r, m, None);
        }
    }
    f
}

/// Best convex-combination weight `c ∈ [0, 1]` for moving from `q = (x, y)`
/// towards `u = (v, w)`.
///
/// With only indicator regularizers the objective along the segment is a
/// quadratic in `c` and the minimizer is exact. Otherwise golden-section
/// search runs on the full objective.
pub fn line_search(problem: &ProblemSpec, q: (&DenseMatrix, &DenseMatrix), u: (&DenseMatrix, &DenseMatrix)) -> f64 {
    let (x, y) = q;
    let (v, w) = u;
    if problem.reg_x.is_indicator() && problem.reg_y.is_indicator() {
        // d = Z − U, r = Z − M; minimize ½‖r − c d‖².
        let (mut num, mut den) = (0.0, 0.0);
        let parts = x.as_slice().iter().zip(y.as_slice()).zip(v.as_slice().iter().zip(w.as_slice()));
        for (((xi, yi), (vi, wi)), mi) in parts.zip(problem.m_data.as_slice()) {
            let z = xi + yi;
            let d = z - (vi + wi);
            num += d * (z - mi);
            den += d * d;
        }
        if den == 0.0 {
            return 0.0;
        }
        return (num / den).clamp(0.0, 1.0);
    }
    let phi = |c: f64| finite_objective(problem, &x.lerp(v, c), &y.lerp(w, c));
    let c = golden_section(&phi, 0.0, 1.0, GOLDEN_TOL);
    let best_end = if phi(1.0) < phi(0.0) { 1.0 } else { 0.0 };
    if phi(c) <= phi(best_end) {
        c
    } else {
        best_end
    }
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

fn step_seed(seed: u64, t: usize, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt.wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const SALT_CG: u64 = 1;
const SALT_PROX: u64 = 2;
const SALT_CG_SECOND: u64 = 3;

/// Shared bookkeeping: recording, termination and timing.
struct Recorder<'a> {
    problem: &'a ProblemSpec,
    config: &'a SolverConfig,
    clock: &'a dyn Clock,
    trace: Vec<IterationRecord>,
}

impl Recorder<'_> {
    /// Whether the iterate before step `t` needs evaluating.
    fn wants_summary(&self, t: usize) -> bool {
        (t - 1) % self.config.record_every == 0 || self.config.f_target.is_some()
    }

    fn record(&mut self, t: usize, point: Option<PointSummary>, eta: f64) {
        if (t - 1) % self.config.record_every == 0 {
            let p = point.expect("summary computed for recorded steps");
            self.trace.push(IterationRecord {
                t,
                wall_time_s: self.clock.elapsed_s(),
                f_value: p.f_value,
                eta_used: eta,
                feas_x: p.feas_x,
                feas_y: p.feas_y,
                rank_x: p.rank_x,
            });
        }
    }

    /// Checks targets before step `t`; on a stop, writes a terminal record.
    fn should_stop(&mut self, t: usize, x: &DenseMatrix, y: &DenseMatrix, point: Option<&PointSummary>) -> Result<bool> {
        let hit_target = match (self.config.f_target, point) {
            (Some(target), Some(p)) => p.f_value <= target,
            _ => false,
        };
        let out_of_time = self.config.time_budget_s.is_some_and(|b| self.clock.elapsed_s() >= b);
        if !(hit_target || out_of_time) {
            return Ok(false);
        }
        let p = match point {
            Some(p) => *p,
            None => summarize_point(self.problem, x, y)?,
        };
        self.trace.push(IterationRecord {
            t,
            wall_time_s: self.clock.elapsed_s(),
            f_value: p.f_value,
            eta_used: 0.0,
            feas_x: p.feas_x,
            feas_y: p.feas_y,
            rank_x: p.rank_x,
        });
        Ok(true)
    }
}

/// Runs the solver selected by `config.algorithm` from `(0, 0)`.
pub fn solve(problem: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    solve_with(problem, config, &NoClock, None)
}

/// Runs the selected solver with an explicit clock and optional start point.
pub fn solve_with(
    problem: &ProblemSpec,
    config: &SolverConfig,
    clock: &dyn Clock,
    init: Option<(DenseMatrix, DenseMatrix)>,
) -> Result<SolveOutput> {
    match config.algorithm {
        Algorithm::AltCgPg | Algorithm::AltPgCg => run_alternating(problem, config, clock, init),
        Algorithm::Cgcg => run_cgcg(problem, config, clock, init, false),
        Algorithm::CgcgP => run_cgcg(problem, config, clock, init, true),
        Algorithm::Fista => run_fista(problem, config, clock, init),
    }
}

pub fn solve_alternating(problem: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    if config.algorithm.prox_block().is_none() {
        return Err(Error::Unsupported("solve_alternating needs AltCgPg or AltPgCg"));
    }
    solve(problem, config)
}

pub fn solve_cgcg(problem: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    run_cgcg(problem, config, &NoClock, None, false)
}

pub fn solve_cgcg_p(problem: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    run_cgcg(problem, config, &NoClock, None, true)
}

pub fn solve_fista(problem: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    run_fista(problem, config, &NoClock, None)
}

fn start_point(problem: &ProblemSpec, init: Option<(DenseMatrix, DenseMatrix)>) -> Result<(DenseMatrix, DenseMatrix)> {
    problem.validate()?;
    let (m, n) = problem.shape();
    match init {
        None => Ok((DenseMatrix::zeros(m, n), DenseMatrix::zeros(m, n))),
        Some((x, y)) => {
            problem.m_data.check_same_shape(&x)?;
            problem.m_data.check_same_shape(&y)?;
            let s = summarize_point(problem, &x, &y)?;
            if s.feas_x > crate::oracles::FEASIBILITY_SLACK {
                return Err(Error::InfeasibleStart("x"));
            }
            if s.feas_y > crate::oracles::FEASIBILITY_SLACK {
                return Err(Error::InfeasibleStart("y"));
            }
            Ok((x, y))
        }
    }
}

fn run_alternating(
    problem: &ProblemSpec,
    config: &SolverConfig,
    clock: &dyn Clock,
    init: Option<(DenseMatrix, DenseMatrix)>,
) -> Result<SolveOutput> {
    config.validate()?;
    let prox_block = config
        .algorithm
        .prox_block()
        .ok_or(Error::Unsupported("not an alternating algorithm"))?;
    let (mut x, mut y) = start_point(problem, init)?;
    let (prox_reg, cg_reg) = match prox_block {
        Block::X => (problem.reg_x, problem.reg_y),
        Block::Y => (problem.reg_y, problem.reg_x),
    };
    let mut rec = Recorder {
        problem,
        config,
        clock,
        trace: Vec::new(),
    };
    let mut warm: Option<DenseMatrix> = None;
    for t in 1..=config.max_iters {
        let point = if rec.wants_summary(t) {
            Some(summarize_point(rec.problem, &x, &y)?)
        } else {
            None
        };
        if rec.should_stop(t, &x, &y, point.as_ref())? {
            break;
        }
        let z = x.add(&y);
        let grad = problem.gradient(&z);
        let w = generalized_lmo_with(&cg_reg, &grad, step_seed(config.seed, t, SALT_CG), config.svd)?.point;
        let eta = config.schedule.eta(t as u64);
        let (v, basis) = prox_step_with(
            &prox_reg,
            &z,
            &w,
            &grad,
            eta,
            problem.beta,
            step_seed(config.seed, t, SALT_PROX),
            config.svd,
            warm.as_ref(),
        )?;
        warm = basis;
        let (new_x, new_y) = match prox_block {
            Block::X => (v, w),
            Block::Y => (w, v),
        };
        let c = if config.line_search {
            line_search(problem, (&x, &y), (&new_x, &new_y))
        } else {
            eta
        };
        rec.record(t, point, c);
        x = x.lerp(&new_x, c);
        y = y.lerp(&new_y, c);
    }
    Ok(SolveOutput { x, y, trace: rec.trace })
}

fn project_block(r: &Regularizer, v: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = v.shape();
    match *r {
        Regularizer::NuclearBall { tau, .. } => project_nuclear_ball(v, tau),
        Regularizer::L1Ball { s } => Ok(DenseMatrix::from_raw(m, n, project_l1_ball(v.as_slice(), s))),
        Regularizer::LpBall { p, s } => Ok(DenseMatrix::from_raw(m, n, project_lp_ball(v.as_slice(), p, s))),
        Regularizer::ElasticNet { .. } => Err(Error::Unsupported("projection onto an elastic-net block")),
    }
}

fn run_cgcg(
    problem: &ProblemSpec,
    config: &SolverConfig,
    clock: &dyn Clock,
    init: Option<(DenseMatrix, DenseMatrix)>,
    projected: bool,
) -> Result<SolveOutput> {
    config.validate()?;
    if !problem.reg_x.is_indicator() || !problem.reg_y.is_indicator() {
        return Err(Error::Unsupported("CGCG variants need ball regularizers on both blocks"));
    }
    if projected && matches!(problem.reg_y, Regularizer::NuclearBall { .. }) {
        return Err(Error::Unsupported("CGCG-P needs an l1 or lp ball on Y"));
    }
    let (mut x, mut y) = start_point(problem, init)?;
    let mut rec = Recorder {
        problem,
        config,
        clock,
        trace: Vec::new(),
    };
    for t in 1..=config.max_iters {
        let point = if rec.wants_summary(t) {
            Some(summarize_point(rec.problem, &x, &y)?)
        } else {
            None
        };
        if rec.should_stop(t, &x, &y, point.as_ref())? {
            break;
        }
        let grad = problem.gradient(&x.add(&y));
        let v = generalized_lmo_with(&problem.reg_x, &grad, step_seed(config.seed, t, SALT_CG_SECOND), config.svd)?.point;
        let w = generalized_lmo_with(&problem.reg_y, &grad, step_seed(config.seed, t, SALT_CG), config.svd)?.point;
        let c = if config.line_search {
            line_search(problem, (&x, &y), (&v, &w))
        } else {
            config.schedule.eta(t as u64)
        };
        rec.record(t, point, c);
        x = x.lerp(&v, c);
        y = y.lerp(&w, c);
        if projected {
            let grad = problem.gradient(&x.add(&y));
            let step = y.zip_map(&grad, |yi, gi| yi - gi / problem.beta);
            y = project_block(&problem.reg_y, &step)?;
        }
    }
    Ok(SolveOutput { x, y, trace: rec.trace })
}

fn run_fista(
    problem: &ProblemSpec,
    config: &SolverConfig,
    clock: &dyn Clock,
    init: Option<(DenseMatrix, DenseMatrix)>,
) -> Result<SolveOutput> {
    config.validate()?;
    if !problem.reg_x.is_indicator() || !problem.reg_y.is_indicator() {
        return Err(Error::Unsupported("FISTA needs ball regularizers on both blocks"));
    }
    let (m, n) = problem.shape();
    if m.min(n) > svd::FULL_SVD_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: m.min(n),
            limit: svd::FULL_SVD_LIMIT,
        });
    }
    // Lipschitz constant of the joint gradient: the Hessian is β[[I, I], [I, I]].
    let lipschitz = 2.0 * problem.beta;
    let step = 1.0 / lipschitz;
    let (mut x, mut y) = start_point(problem, init)?;
    let (mut ex, mut ey) = (x.clone(), y.clone());
    let mut tk = 1.0f64;
    let mut rec = Recorder {
        problem,
        config,
        clock,
        trace: Vec::new(),
    };
    for t in 1..=config.max_iters {
        let point = if rec.wants_summary(t) {
            Some(summarize_point(rec.problem, &x, &y)?)
        } else {
            None
        };
        if rec.should_stop(t, &x, &y, point.as_ref())? {
            break;
        }
        let grad = problem.gradient(&ex.add(&ey));
        let nx = project_block(&problem.reg_x, &ex.zip_map(&grad, |a, g| a - step * g))?;
        let ny = project_block(&problem.reg_y, &ey.zip_map(&grad, |a, g| a - step * g))?;
        let tn = (1.0 + libm::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
        let mom = (tk - 1.0) / tn;
        ex = nx.zip_map(&x, |a, b| a + mom * (a - b));
        ey = ny.zip_map(&y, |a, b| a + mom * (a - b));
        rec.record(t, point, step);
        x = nx;
        y = ny;
        tk = tn;
    }
    Ok(SolveOutput { x, y, trace: rec.trace })
}
