//! Executes a [`RunConfig`]: one trace CSV per repeat and a summary CSV.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rmrk_core::datagen::{self, Instance, InstanceKind};
use rmrk_core::oracles::Regularizer;
use rmrk_core::problem::{Block, ProblemSpec};
use rmrk_core::schedules::{gap_bound_c, make_min_diam_schedule, make_strong_set_schedule, StepSchedule};
use rmrk_core::solvers::{solve_with, SolverConfig};
use rmrk_core::DenseMatrix;

use crate::clock::InstantClock;
use crate::config::{RunConfig, ScheduleChoice, SparseReg};
use crate::csvio::{emit_summary_csv, emit_trace_csv, summarize, RepeatResult, SummaryRow};
use crate::error::BenchError;

/// Problem with the instance's exact bounds and the configured regularizers.
pub fn build_problem(cfg: &RunConfig, inst: &Instance) -> Result<ProblemSpec, BenchError> {
    let mut problem = inst.problem(cfg.rank_cap)?;
    problem.reg_y = match cfg.reg_y {
        SparseReg::Auto => problem.reg_y,
        SparseReg::L1 => Regularizer::L1Ball {
            s: inst.s_true.l1_norm(),
        },
        SparseReg::Lp { p } => Regularizer::LpBall {
            p,
            s: inst.s_true.lp_norm(p),
        },
        SparseReg::ElasticNet { lambda1, lambda2 } => Regularizer::ElasticNet { lambda1, lambda2 },
    };
    problem.validate()?;
    Ok(problem)
}

/// Turns a [`ScheduleChoice`] into a concrete schedule for `problem`.
pub fn resolve_schedule(choice: ScheduleChoice, problem: &ProblemSpec, solver: &SolverConfig) -> Result<StepSchedule, BenchError> {
    let (alpha, beta) = (problem.alpha, problem.beta);
    Ok(match choice {
        ScheduleChoice::OpenLoop => StepSchedule::OpenLoop,
        ScheduleChoice::Fixed(eta) => StepSchedule::FixedStep { eta },
        ScheduleChoice::StrongSet => make_strong_set_schedule(alpha, beta)?,
        ScheduleChoice::MinDiam => {
            let cg_block = match solver.algorithm.prox_block() {
                Some(Block::X) => Block::Y,
                Some(Block::Y) => Block::X,
                None => return Err(BenchError::Config("schedule = min-diam needs an alternating algorithm".into())),
            };
            let d = problem
                .reg(cg_block)
                .diameter()
                .ok_or_else(|| BenchError::Config("schedule = min-diam needs a ball on the conditional-gradient block".into()))?;
            let (m, n) = problem.shape();
            let zero = DenseMatrix::zeros(m, n);
            let c = gap_bound_c(problem, &zero, &zero, solver.seed)?;
            make_min_diam_schedule(alpha, beta, c, d)?
        }
    })
}

/// Instance and solver seeds of repeat `k`.
pub fn repeat_seeds(cfg: &RunConfig, k: usize) -> (u64, u64) {
    (
        cfg.instance.seed.wrapping_add(k as u64),
        cfg.solver.seed.wrapping_add(k as u64),
    )
}

pub fn trace_path(cfg: &RunConfig, instance_seed: u64) -> PathBuf {
    cfg.output_dir.join(format!("{}_seed{instance_seed}.csv", cfg.config_id))
}

pub fn summary_path(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(format!("{}_summary.csv", cfg.config_id))
}

/// Solves repeat `k` without touching the file system.
pub fn solve_repeat(cfg: &RunConfig, k: usize) -> Result<RepeatResult, BenchError> {
    let (instance_seed, solver_seed) = repeat_seeds(cfg, k);
    let spec = datagen::InstanceSpec {
        seed: instance_seed,
        ..cfg.instance
    };
    let inst = datagen::generate(&spec)?;
    let problem = build_problem(cfg, &inst)?;
    let mut solver = cfg.solver.clone().with_seed(solver_seed);
    solver.schedule = resolve_schedule(cfg.schedule, &problem, &solver)?;
    let out = solve_with(&problem, &solver, &InstantClock::start(), None)?;
    let (rel_err_x, rel_err_y) = inst.relative_errors(&out.x, &out.y);
    Ok(RepeatResult {
        trace: out.trace,
        rel_err_x,
        rel_err_y,
    })
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub trace_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: Vec<SummaryRow>,
}

/// Runs every repeat on up to `jobs` threads, then writes the summary.
pub fn execute(cfg: &RunConfig, jobs: usize) -> Result<RunReport, BenchError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| BenchError::io(&cfg.output_dir, e))?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RepeatResult, BenchError>>>> = Mutex::new((0..cfg.repeats).map(|_| None).collect());
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        if k >= cfg.repeats {
            break;
        }
        let result = solve_repeat(cfg, k).and_then(|rep| {
            emit_trace_csv(&rep.trace, &trace_path(cfg, repeat_seeds(cfg, k).0))?;
            Ok(rep)
        });
        slots.lock().expect("no worker panics while holding the lock")[k] = Some(result);
    };
    std::thread::scope(|s| {
        for _ in 1..jobs.clamp(1, cfg.repeats) {
            s.spawn(worker);
        }
        worker();
    });
    let mut repeats = Vec::with_capacity(cfg.repeats);
    for slot in slots.into_inner().expect("workers joined") {
        repeats.push(slot.expect("every repeat ran")?);
    }
    let summary = summarize(&cfg.config_id, cfg.solver.algorithm.name(), &repeats);
    let summary_path = summary_path(cfg);
    emit_summary_csv(&summary, &summary_path)?;
    Ok(RunReport {
        trace_paths: (0..cfg.repeats).map(|k| trace_path(cfg, repeat_seeds(cfg, k).0)).collect(),
        summary_path,
        summary,
    })
}

/// Writes `m_data.mtx`, `l_true.mtx`, `s_true.mtx` and `metadata.txt`.
pub fn export_instance(inst: &Instance, out: &std::path::Path) -> Result<Vec<PathBuf>, BenchError> {
    use crate::csvio::fmt_f64;
    use crate::mtx::write_matrix;

    std::fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;
    let mut written = Vec::new();
    for (name, a) in [("m_data", &inst.m_data), ("l_true", &inst.l_true), ("s_true", &inst.s_true)] {
        let path = out.join(format!("{name}.mtx"));
        write_matrix(&path, a)?;
        written.push(path);
    }
    let s = &inst.spec;
    let s_norm = match (s.kind, s.delta) {
        (InstanceKind::Table2, Some(d)) => format!("l{}", 1.0 + d),
        _ => "l1".to_string(),
    };
    let meta = [
        ("kind", s.kind.name().to_string()),
        ("m", s.m.to_string()),
        ("n", s.n.to_string()),
        ("r", s.r.to_string()),
        ("p", fmt_f64(s.p)),
        ("scale", fmt_f64(s.scale)),
        ("delta", s.delta.map_or("none".into(), fmt_f64)),
        ("seed", s.seed.to_string()),
        ("tau", fmt_f64(inst.tau)),
        ("s_bound", fmt_f64(inst.s_bound)),
        ("s_norm", s_norm),
        ("f_star", inst.f_star.map_or("unknown".into(), fmt_f64)),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={v}\n"))
    .collect::<String>();
    let path = out.join("metadata.txt");
    std::fs::write(&path, meta).map_err(|e| BenchError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
