//! `key = value` run configurations with `[instance]`, `[solver]`,
//! `[problem]` and `[output]` sections. See the README for the schema.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::{Ini, Properties};
use rmrk_core::datagen::{InstanceKind, InstanceSpec};
use rmrk_core::oracles::SvdSettings;
use rmrk_core::solvers::{Algorithm, SolverConfig};

use crate::error::BenchError;

/// Step-size rule, resolved against each generated instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleChoice {
    /// `2/(t + 1)`.
    OpenLoop,
    /// Two-phase schedule built from the gap bound at the start point and
    /// the diameter of the conditional-gradient block.
    MinDiam,
    StrongSet,
    Fixed(f64),
}

/// Regularizer on the sparse block `Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SparseReg {
    /// ℓ_{1+δ} ball for table-2 instances, ℓ1 ball otherwise.
    Auto,
    L1,
    Lp { p: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub config_id: String,
    pub instance: InstanceSpec,
    /// Its `schedule` field is a placeholder until [`ScheduleChoice`] is resolved.
    pub solver: SolverConfig,
    pub schedule: ScheduleChoice,
    /// `None` means a full-rank nuclear projection.
    pub rank_cap: Option<usize>,
    pub reg_y: SparseReg,
    pub output_dir: PathBuf,
    pub repeats: usize,
}

impl RunConfig {
    /// Replaces the instance and solver base seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.instance.seed = seed;
        self.solver.seed = seed;
        self
    }
}

const SECTIONS: [(&str, &[&str]); 4] = [
    ("instance", &["kind", "m", "n", "r", "p", "scale", "delta", "seed"]),
    (
        "solver",
        &[
            "algorithm",
            "max_iters",
            "schedule",
            "eta",
            "line_search",
            "f_target",
            "time_budget_s",
            "seed",
            "record_every",
            "svd_tol",
            "svd_max_iter",
        ],
    ),
    ("problem", &["rank_cap", "reg_y", "lp_p", "lambda1", "lambda2"]),
    ("output", &["dir", "repeats", "config_id"]),
];

struct Section<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
    origin: &'a str,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, BenchError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(format!("cannot parse {}.{key} = `{v}`", self.name))),
        }
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T, BenchError> {
        self.get(key)?
            .ok_or_else(|| self.err(format!("missing {}.{key}", self.name)))
    }

    fn err(&self, msg: String) -> BenchError {
        BenchError::parse(self.origin, msg)
    }
}

fn load_ini(text: &str, origin: &str) -> Result<Ini, BenchError> {
    let ini = Ini::load_from_str(text).map_err(|e| BenchError::parse(origin, e.to_string()))?;
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(BenchError::parse(origin, format!("key `{k}` outside any section")));
            }
            continue;
        };
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
            return Err(BenchError::parse(origin, format!("unknown section [{name}]")));
        };
        if let Some((k, _)) = props.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(BenchError::parse(origin, format!("unknown key `{k}` in [{name}]")));
        }
    }
    Ok(ini)
}

fn section<'a>(ini: &'a Ini, name: &'static str, origin: &'a str) -> Section<'a> {
    Section {
        name,
        props: ini.section(Some(name)),
        origin,
    }
}

fn parse_instance(sec: &Section) -> Result<InstanceSpec, BenchError> {
    let kind = match sec.raw("kind") {
        None => InstanceKind::Sec5,
        Some(k) => InstanceKind::from_name(k).ok_or_else(|| sec.err(format!("unknown instance kind `{k}`")))?,
    };
    let n: usize = sec.require("n")?;
    let m: usize = sec.get("m")?.unwrap_or(n);
    let r: usize = sec.require("r")?;
    let seed: u64 = sec.get("seed")?.unwrap_or(0);
    let mut spec = match kind {
        InstanceKind::Table2 => InstanceSpec {
            m,
            ..InstanceSpec::table2(n, r, sec.require("delta")?, seed)
        },
        InstanceKind::Sec5 | InstanceKind::KnownOptimum => InstanceSpec {
            kind,
            ..InstanceSpec::sec5(m, n, r, sec.require("p")?, seed)
        },
    };
    if let Some(p) = sec.get("p")? {
        spec.p = p;
    }
    if let Some(scale) = sec.get("scale")? {
        spec.scale = scale;
    }
    if kind != InstanceKind::Table2 && sec.raw("delta").is_some() {
        return Err(sec.err("instance.delta only applies to table2 instances".into()));
    }
    spec.validate().map_err(|e| sec.err(e.to_string()))?;
    Ok(spec)
}

/// Instance spec for `gen`: an `[instance]` section as in run configs.
pub fn parse_instance_spec(text: &str, origin: &str) -> Result<InstanceSpec, BenchError> {
    let ini = load_ini(text, origin)?;
    parse_instance(&section(&ini, "instance", origin))
}

pub fn parse_config(text: &str, origin: &str, default_id: &str) -> Result<RunConfig, BenchError> {
    let ini = load_ini(text, origin)?;
    let instance = parse_instance(&section(&ini, "instance", origin))?;

    let sec = section(&ini, "solver", origin);
    let name: String = sec.require("algorithm")?;
    let algorithm = Algorithm::from_name(&name).ok_or_else(|| sec.err(format!("unknown algorithm `{name}`")))?;
    let mut solver = SolverConfig::new(algorithm, sec.require("max_iters")?)
        .with_line_search(sec.get("line_search")?.unwrap_or(false))
        .with_seed(sec.get("seed")?.unwrap_or(0))
        .with_record_every(sec.get("record_every")?.unwrap_or(1));
    solver.f_target = sec.get("f_target")?;
    solver.time_budget_s = sec.get("time_budget_s")?;
    solver.svd = SvdSettings {
        tol: sec.get("svd_tol")?.unwrap_or(SvdSettings::default().tol),
        max_iter: sec.get("svd_max_iter")?.unwrap_or(SvdSettings::default().max_iter),
        ..SvdSettings::default()
    };
    solver.validate().map_err(|e| sec.err(e.to_string()))?;
    let schedule = match sec.raw("schedule").unwrap_or("open-loop") {
        "open-loop" => ScheduleChoice::OpenLoop,
        "min-diam" => ScheduleChoice::MinDiam,
        "strong-set" => ScheduleChoice::StrongSet,
        "fixed" => {
            let eta: f64 = sec.require("eta")?;
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(sec.err("solver.eta must lie in (0, 1]".into()));
            }
            ScheduleChoice::Fixed(eta)
        }
        other => return Err(sec.err(format!("unknown schedule `{other}`"))),
    };
    if !matches!(schedule, ScheduleChoice::Fixed(_)) && sec.raw("eta").is_some() {
        return Err(sec.err("solver.eta is only used with schedule = fixed".into()));
    }

    let sec = section(&ini, "problem", origin);
    let rank_cap = match sec.raw("rank_cap") {
        None => Some(instance.r),
        Some("none") | Some("full") => None,
        Some(_) => Some(sec.require::<usize>("rank_cap")?),
    };
    if rank_cap == Some(0) {
        return Err(sec.err("problem.rank_cap must be positive".into()));
    }
    let reg_y = match sec.raw("reg_y").unwrap_or("auto") {
        "auto" => SparseReg::Auto,
        "l1" => SparseReg::L1,
        "lp" => SparseReg::Lp {
            p: match (sec.get("lp_p")?, instance.delta) {
                (Some(p), _) => p,
                (None, Some(d)) => 1.0 + d,
                (None, None) => return Err(sec.err("problem.lp_p is required for reg_y = lp".into())),
            },
        },
        "elastic-net" => SparseReg::ElasticNet {
            lambda1: sec.require("lambda1")?,
            lambda2: sec.require("lambda2")?,
        },
        other => return Err(sec.err(format!("unknown reg_y `{other}`"))),
    };

    let sec = section(&ini, "output", origin);
    let config_id = sec.raw("config_id").unwrap_or(default_id).to_string();
    if config_id.is_empty()
        || config_id.starts_with('.')
        || !config_id.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
    {
        return Err(sec.err(format!("config_id `{config_id}` must be [A-Za-z0-9._-]+ and not start with a dot")));
    }
    let repeats: usize = sec.get("repeats")?.unwrap_or(1);
    if repeats == 0 {
        return Err(sec.err("output.repeats must be at least 1".into()));
    }
    Ok(RunConfig {
        config_id,
        instance,
        solver,
        schedule,
        rank_cap,
        reg_y,
        output_dir: PathBuf::from(sec.require::<String>("dir")?),
        repeats,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let default_id: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_-".contains(c) { c } else { '_' })
        .collect();
    parse_config(&text, &path.display().to_string(), &default_id)
}
