use std::path::{Path, PathBuf};

use rmrk_core::datagen::{generate, InstanceSpec};
use rmrk_core::oracles::{elastic_net_min, project_l1_ball, prox_nuclear_lowrank_with, Regularizer, SvdSettings};
use rmrk_core::problem::{objective, ProblemSpec};
use rmrk_core::rng::SeededRng;
use rmrk_core::schedules::{
    composed_strong_convexity, fixed_step_strong_reg, gap_bound_c, lp_ball_strong_convexity, make_min_diam_schedule,
    make_strong_set_schedule, min_diam_t0, simulate_recursion, RecursionLemma, StepSchedule,
};
use rmrk_core::solvers::{solve, Algorithm, SolverConfig};
use rmrk_core::DenseMatrix;

use super::{reference, timed, Outcome};
use crate::config::{RunConfig, ScheduleChoice, SparseReg};
use crate::csvio::{median, summarize, RepeatResult};
use crate::error::BenchError;
use crate::runner;

type Check = Result<(bool, String), BenchError>;

fn outcome(id: u32, name: &'static str, check: Check, elapsed_s: f64, budget_s: Option<f64>) -> Outcome {
    let (passed, mut detail) = check.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_time = budget_s.is_none_or(|b| elapsed_s <= b);
    if !in_time {
        detail.push_str("; over the time limit");
    }
    Outcome {
        id,
        name,
        passed: passed && in_time,
        detail,
        elapsed_s,
        budget_s,
    }
}

fn gaussian_matrix(rng: &mut SeededRng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| scale * rng.gaussian()).expect("positive dimensions")
}

fn dim(rng: &mut SeededRng, max: u64) -> usize {
    1 + (rng.next_u64() % max) as usize
}

/// Low-rank prox at full rank (subspace iteration) against a dense-SVD
/// projection; ℓ1 projection against a penalty method; elastic-net LMO
/// against a grid search.
pub fn oracle_equivalence() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let mut rng = SeededRng::new(1);
        let subspace = SvdSettings {
            dense_below: 0,
            ..SvdSettings::default()
        };
        let mut nuc = 0.0f64;
        for case in 0..200u64 {
            let (m, n) = (dim(&mut rng, 10), dim(&mut rng, 10));
            let center = gaussian_matrix(&mut rng, m, n, 3.0);
            let tau = 0.1 + 20.0 * rng.uniform();
            let ours = prox_nuclear_lowrank_with(&center, tau, m.min(n), case, subspace, None)?;
            nuc = nuc.max(ours.sub(&reference::nuclear_projection(&center, tau)).frobenius_norm());
        }
        let mut l1 = 0.0f64;
        for _ in 0..200 {
            let v: Vec<f64> = (0..dim(&mut rng, 5)).map(|_| 4.0 * rng.gaussian()).collect();
            let s = 0.05 + 5.0 * rng.uniform();
            let diff = project_l1_ball(&v, s)
                .iter()
                .zip(reference::l1_projection_penalty(&v, s))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            l1 = l1.max(diff);
        }
        let mut enet = 0.0f64;
        for _ in 0..200 {
            let g = gaussian_matrix(&mut rng, 1, 5, 3.0);
            let (l1w, l2w) = (0.01 + 2.0 * rng.uniform(), 0.05 + 2.0 * rng.uniform());
            let ours = elastic_net_min(l1w, l2w, &g);
            for (&w, &gi) in ours.as_slice().iter().zip(g.as_slice()) {
                enet = enet.max((w - reference::elastic_net_grid(gi, l1w, l2w)).abs());
            }
        }
        Ok((
            nuc <= 1e-8 && l1 <= 1e-6 && enet <= 1e-4,
            format!("nuclear {nuc:.1e} (≤1e-8), l1 {l1:.1e} (≤1e-6), elastic net {enet:.1e} (≤1e-4)"),
        ))
    });
    outcome(1, "oracle equivalence", check, elapsed, Some(30.0))
}

/// Known-optimum instances the gap-based checks run on; `f* = 0`.
fn known_optimum(n: usize, seed: u64) -> Result<rmrk_core::datagen::Instance, BenchError> {
    Ok(generate(&InstanceSpec::known_optimum(n, n, 3, 0.05, seed))?)
}

/// Min-diameter bound and the per-step recursion, from the same five runs.
pub fn min_diam_rate() -> Vec<Outcome> {
    let (check, elapsed) = timed(|| -> Result<(f64, f64, u64), BenchError> {
        let (mut bound_ratio, mut rec_ratio, mut max_t0) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
        for seed in 0..5u64 {
            let inst = known_optimum(50, seed)?;
            let f_star = inst.f_star.expect("known-optimum instances carry f*");
            let problem = inst.problem(None)?;
            let (alpha, beta) = (problem.alpha, problem.beta);
            let d = problem.reg_y.diameter().expect("ℓ1 ball");
            let zero = DenseMatrix::zeros(50, 50);
            let c = gap_bound_c(&problem, &zero, &zero, seed)?;
            let t0 = min_diam_t0(alpha, beta, c, d)?;
            max_t0 = max_t0.max(t0);
            let cfg = SolverConfig::new(Algorithm::AltCgPg, 2000)
                .with_schedule(make_min_diam_schedule(alpha, beta, c, d)?)
                .with_seed(seed);
            let trace = solve(&problem, &cfg)?.trace;
            for r in trace.iter().filter(|r| r.t as u64 > t0) {
                let bound = 4.0 * beta * d * d / ((r.t as u64 - t0) as f64 - 1.0 + 4.0 * beta / alpha);
                bound_ratio = bound_ratio.max((r.f_value - f_star) / bound - 1.0);
            }
            for w in trace.windows(2) {
                let (h, eta) = (w[0].f_value - f_star, w[0].eta_used);
                let rhs = (1.0 - eta) * h + eta * eta * beta * d * d;
                rec_ratio = rec_ratio.max((w[1].f_value - f_star) / rhs - 1.0);
            }
        }
        Ok((bound_ratio, rec_ratio, max_t0))
    });
    let (bound, rec) = match check {
        Ok((b, r, t0)) => (
            Ok((b <= 1e-6, format!("max h_t/bound − 1 = {b:.2e} (≤1e-6), t0 ≤ {t0}"))),
            Ok((r <= 1e-9, format!("max h_(t+1)/rhs − 1 = {r:.2e} (≤1e-9)"))),
        ),
        Err(e) => (Err(BenchError::Config(e.to_string())), Err(e)),
    };
    vec![
        outcome(2, "min-diameter rate bound", bound, elapsed, Some(120.0)),
        outcome(3, "per-step gap recursion", rec, elapsed, Some(120.0)),
    ]
}

/// `O(1/t²)` bound with an ℓ_{1.2} ball on the sparse block.
pub fn strong_set_rate() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let inst = known_optimum(50, 0)?;
        let f_star = inst.f_star.expect("known-optimum instances carry f*");
        let p = 1.2;
        let s = inst.s_true.lp_norm(p);
        let mut problem = inst.problem(None)?;
        problem.reg_y = Regularizer::LpBall { p, s };
        let (alpha, beta) = (problem.alpha, problem.beta);
        let gamma = lp_ball_strong_convexity(p, s, inst.s_true.len())?;
        let cfg = SolverConfig::new(Algorithm::AltCgPg, 2000).with_schedule(make_strong_set_schedule(alpha, beta)?);
        let trace = solve(&problem, &cfg)?.trace;
        let h1 = trace[0].f_value - f_star;
        let a = 9.0 * (128.0 * beta * beta / (alpha * gamma * gamma)).max(4.0 * beta * beta / (alpha * alpha) * h1);
        let worst = trace
            .iter()
            .map(|r| {
                let d = r.t as f64 - 1.0 + 6.0 * beta / alpha;
                (r.f_value - f_star) / (a / (d * d))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let last = trace.last().expect("non-empty trace");
        Ok((
            worst <= 1.0,
            format!(
                "max h_t/bound = {worst:.2e} (≤1), h at t={} is {:.2e}, γ = {gamma:.2e}",
                last.t,
                last.f_value - f_star
            ),
        ))
    });
    outcome(4, "strongly convex set rate", check, elapsed, Some(120.0))
}

/// Linear rate with an elastic-net penalty on the sparse block.
pub fn elastic_net_linear_rate() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let inst = known_optimum(20, 7)?;
        let (lambda1, lambda2) = (0.1, 0.5);
        let problem = ProblemSpec::new(
            inst.m_data.clone(),
            Regularizer::NuclearBall {
                tau: inst.tau,
                rank_cap: None,
            },
            Regularizer::ElasticNet { lambda1, lambda2 },
        )?;
        let schedule = fixed_step_strong_reg(problem.alpha, 2.0 * lambda2, problem.beta)?;
        let StepSchedule::FixedStep { eta } = schedule else {
            unreachable!("fixed_step_strong_reg returns a fixed step")
        };
        let reference = solve(
            &problem,
            &SolverConfig::new(Algorithm::AltCgPg, 100_000)
                .with_schedule(schedule)
                .with_record_every(100_000),
        )?;
        let f_star = objective(&problem, &reference.x, &reference.y)?;
        let trace = solve(&problem, &SolverConfig::new(Algorithm::AltCgPg, 500).with_schedule(schedule))?.trace;
        let h1 = trace[0].f_value - f_star;
        let violation = trace.iter().find_map(|r| {
            let h = r.f_value - f_star;
            let bound = h1 * (-eta * (r.t as f64 - 1.0)).exp() * (1.0 + 1e-6);
            (h > bound).then_some((r.t, h, bound))
        });
        let ulp = f_star.abs() * f64::EPSILON;
        Ok(match violation {
            None => (true, format!("h_t within h_1·exp(−{eta}(t−1)) for t ≤ 500, h_1 = {h1:.2e}")),
            Some((t, h, bound)) => (
                false,
                format!(
                    "first violation at t={t}: h={h:.2e} > bound {bound:.2e}; f* = {f_star:.6e} has spacing {ulp:.1e}, η = {eta}"
                ),
            ),
        })
    });
    outcome(5, "elastic-net linear rate", check, elapsed, Some(120.0))
}

/// Table-2 configuration: alternating solve with line search on the
/// ℓ_{1+δ}-ball instance family, 10 seeds.
pub fn table2_config(delta: f64, max_iters: usize) -> RunConfig {
    RunConfig {
        config_id: format!("table2-delta{delta}"),
        instance: InstanceSpec::table2(100, 10, delta, 0),
        solver: SolverConfig::new(Algorithm::AltCgPg, max_iters)
            .with_line_search(true)
            .with_record_every(max_iters),
        schedule: ScheduleChoice::OpenLoop,
        rank_cap: Some(10),
        reg_y: SparseReg::Auto,
        output_dir: PathBuf::new(),
        repeats: 10,
    }
}

/// Runs every repeat of `cfg` in memory and returns the summary medians of
/// the relative errors.
fn median_errors(cfg: &RunConfig) -> Result<(f64, f64), BenchError> {
    let repeats = (0..cfg.repeats)
        .map(|k| runner::solve_repeat(cfg, k))
        .collect::<Result<Vec<RepeatResult>, _>>()?;
    let summary = summarize(&cfg.config_id, cfg.solver.algorithm.name(), &repeats);
    let last = summary.last().expect("every repeat records t = 1");
    Ok((last.rel_err_x_median, last.rel_err_y_median))
}

pub fn table2_recovery() -> Outcome {
    // (δ, iterations, X threshold, Y threshold, reference X, reference Y)
    let rows = [
        (0.05, 6000, 1e-3, 1e-4, 9.2e-5, 1.5e-6),
        (0.2, 500, 1e-1, 5e-3, 4.3e-2, 4.2e-4),
    ];
    let (check, elapsed) = timed(|| -> Check {
        let mut ok = true;
        let mut parts = Vec::new();
        for (delta, iters, tx, ty, px, py) in rows {
            let (ex, ey) = median_errors(&table2_config(delta, iters))?;
            ok &= ex <= tx && ey <= ty;
            parts.push(format!(
                "δ={delta}, {iters} its: X {ex:.2e} (≤{tx:.0e}, reference {px:.1e}), Y {ey:.2e} (≤{ty:.0e}, reference {py:.1e})"
            ));
        }
        Ok((ok, parts.join("; ")))
    });
    outcome(6, "ℓ_{1+δ} recovery table", check, elapsed, Some(600.0))
}

/// Both recursion lemmas at equality, checked by the simulator and against
/// independently evaluated closed-form bounds.
pub fn recursion_certificates() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let horizon = 10_000;
        let mut rng = SeededRng::new(7);
        let (mut reported, mut recomputed) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..50 {
            let beta = 1.0 + 4.0 * rng.uniform();
            let alpha = (0.05 + 0.95 * rng.uniform()).min(beta);
            let d_y = 0.1 + 20.0 * rng.uniform();
            let c = 1e-3 + 1e3 * rng.uniform();
            let h1 = c * rng.uniform();
            let rep = simulate_recursion(RecursionLemma::MinDiam { alpha, beta, d_y, h1, c }, horizon)?;
            reported = reported.max(rep.max_violation);
            let t0 = min_diam_t0(alpha, beta, c, d_y)?;
            for (i, h) in rep.sequence_values.iter().enumerate() {
                let t = i as u64 + 1;
                if t > t0 {
                    let bound = 4.0 * beta * d_y * d_y / ((t - t0) as f64 - 1.0 + 4.0 * beta / alpha);
                    recomputed = recomputed.max(h - bound);
                }
            }

            let c1 = 1e-2 + 10.0 * rng.uniform();
            let c2 = 1e-3 + (1.0 - 1e-3) * rng.uniform();
            let h1 = 100.0 * rng.uniform();
            let rep = simulate_recursion(RecursionLemma::StrongSet { c1, c2, h1 }, horizon)?;
            reported = reported.max(rep.max_violation);
            let a = 9.0 * (1.0 / (c1 * c1)).max(h1 / (c2 * c2));
            for (i, h) in rep.sequence_values.iter().enumerate() {
                let d = (i + 1) as f64 - 1.0 + 3.0 / c2;
                recomputed = recomputed.max(h - a / (d * d));
            }
        }
        Ok((
            reported <= 1e-12 && recomputed <= 1e-12,
            format!("max violation {reported:.2e}, recomputed {recomputed:.2e} (≤1e-12)"),
        ))
    });
    outcome(7, "recursion certificates", check, elapsed, Some(10.0))
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Strong convexity of `α/2‖x + y‖² + δ/2‖x‖²` with the composed constant.
pub fn composed_strong_convexity_check() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let mut rng = SeededRng::new(8);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..20 {
            let alpha = 10f64.powf(-2.0 + 4.0 * rng.uniform());
            let delta = 10f64.powf(-2.0 + 4.0 * rng.uniform());
            let tau = composed_strong_convexity(alpha, delta)?;
            let f = |q: &[f64]| {
                let (x, y) = q.split_at(4);
                let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                0.5 * alpha * sq(&s) + 0.5 * delta * sq(x)
            };
            for _ in 0..1000 {
                let q1: Vec<f64> = (0..8).map(|_| 3.0 * rng.gaussian()).collect();
                let q2: Vec<f64> = (0..8).map(|_| 3.0 * rng.gaussian()).collect();
                let lambda = rng.uniform();
                let mid: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
                let diff: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| a - b).collect();
                let rhs = lambda * f(&q1) + (1.0 - lambda) * f(&q2) - 0.5 * tau * lambda * (1.0 - lambda) * sq(&diff);
                let scale = 1.0 + f(&q1) + f(&q2);
                worst = worst.max((f(&mid) - rhs) / scale);
            }
        }
        Ok((worst <= 1e-10, format!("max relative excess {worst:.2e} (≤1e-10)")))
    });
    outcome(8, "composed strong convexity", check, elapsed, Some(10.0))
}

fn comparative_config(algorithm: Algorithm) -> RunConfig {
    RunConfig {
        config_id: format!("comparative-{}", algorithm.name()),
        instance: InstanceSpec::sec5(200, 200, 5, 0.001, 0),
        solver: SolverConfig::new(algorithm, 500).with_line_search(true),
        schedule: ScheduleChoice::OpenLoop,
        rank_cap: Some(5),
        reg_y: SparseReg::Auto,
        output_dir: PathBuf::new(),
        repeats: 5,
    }
}

/// Median objective at `t = 500` of the alternating method against CGCG.
pub fn alternating_beats_cgcg() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let mut medians = Vec::new();
        for alg in [Algorithm::AltCgPg, Algorithm::Cgcg] {
            let cfg = comparative_config(alg);
            let f: Vec<f64> = (0..cfg.repeats)
                .map(|k| {
                    let rep = runner::solve_repeat(&cfg, k)?;
                    let at_500 = rep.trace.iter().find(|r| r.t == 500).expect("record_every = 1");
                    Ok(at_500.f_value)
                })
                .collect::<Result<_, BenchError>>()?;
            medians.push(median(&f));
        }
        Ok((
            medians[0] < medians[1],
            format!("median f at t=500: alt-cgpg {:.4e}, cgcg {:.4e}", medians[0], medians[1]),
        ))
    });
    outcome(9, "alternating beats CGCG", check, elapsed, Some(300.0))
}

/// Drops column `col` from every line, so runs can be compared without
/// their timing data.
pub fn mask_column(text: &str, col: usize) -> Vec<String> {
    text.lines()
        .map(|line| {
            line.split(',')
                .enumerate()
                .map(|(i, f)| if i == col { "*" } else { f })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos());
    std::env::temp_dir().join(format!("rmrk-{tag}-{}-{nanos}", std::process::id()))
}

fn read(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))
}

/// Each algorithm's small config run twice, serially and on two threads;
/// traces must match byte for byte apart from the wall-time column.
pub fn run_determinism() -> Outcome {
    let (check, elapsed) = timed(|| -> Check {
        let dirs = [scratch_dir("determinism-a"), scratch_dir("determinism-b")];
        let result = (|| -> Check {
            let mut files = 0;
            for alg in Algorithm::ALL {
                let mut cfg = RunConfig {
                    config_id: alg.name().to_string(),
                    instance: InstanceSpec::sec5(30, 24, 3, 0.1, 11),
                    solver: SolverConfig::new(alg, 60).with_line_search(alg != Algorithm::Fista),
                    schedule: ScheduleChoice::OpenLoop,
                    rank_cap: Some(3),
                    reg_y: SparseReg::Auto,
                    output_dir: PathBuf::new(),
                    repeats: 3,
                };
                let mut reports = Vec::new();
                for (dir, jobs) in dirs.iter().zip([1, 2]) {
                    cfg.output_dir = dir.clone();
                    reports.push(runner::execute(&cfg, jobs)?);
                }
                for (a, b) in reports[0].trace_paths.iter().zip(&reports[1].trace_paths) {
                    if mask_column(&read(a)?, 1) != mask_column(&read(b)?, 1) {
                        return Ok((false, format!("{} differs from {}", a.display(), b.display())));
                    }
                    files += 1;
                }
                let (a, b) = (&reports[0].summary_path, &reports[1].summary_path);
                if mask_column(&read(a)?, 5) != mask_column(&read(b)?, 5) {
                    return Ok((false, format!("{} differs from {}", a.display(), b.display())));
                }
            }
            Ok((true, format!("{files} trace files identical apart from wall time")))
        })();
        for dir in &dirs {
            let _ = std::fs::remove_dir_all(dir);
        }
        result
    });
    outcome(10, "run determinism", check, elapsed, None)
}
