use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rmrk_bench::csvio::{median, parse_summary_csv, parse_trace_csv};
use rmrk_bench::mtx::read_matrix;

fn rmrk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmrk"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RMRK_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Writes `name.cfg` into `dir` with `[output] dir = <out>` appended.
fn write_config(dir: &Path, name: &str, body: &str, out: &Path) -> PathBuf {
    let path = dir.join(format!("{name}.cfg"));
    std::fs::write(&path, format!("{body}\n[output]\ndir = {}\n", out.display())).unwrap();
    path
}

const SMALL: &str = "\
[instance]
kind = known-optimum
n = 20
r = 2
p = 0.1
seed = 4

[solver]
algorithm = alt-cgpg
max_iters = 200
line_search = true
";

fn files_in(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn run_writes_traces_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "small", &format!("{SMALL}\n[problem]\nrank_cap = 2\n"), &out);
    let res = rmrk(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        files_in(&out),
        BTreeSet::from(["small_seed4.csv".to_string(), "small_summary.csv".to_string()])
    );
    let text = std::fs::read_to_string(out.join("small_seed4.csv")).unwrap();
    assert!(text.starts_with("t,wall_time_s,f_value,eta_used,feas_x,feas_y,rank_x\n"));
    let trace = parse_trace_csv(&text, "trace").unwrap();
    assert_eq!(trace.len(), 200);
    assert!(trace.iter().enumerate().all(|(i, r)| r.t == i + 1));
    assert!(trace.windows(2).all(|w| w[1].f_value <= w[0].f_value));
    // The cap bounds each prox output; convex combinations may exceed it.
    assert!(trace.iter().all(|r| r.feas_x <= 1e-8 && r.feas_y <= 1e-8));
    let summary = std::fs::read_to_string(out.join("small_summary.csv")).unwrap();
    assert!(summary.starts_with("config_id,algorithm,t,f_median,f_mean,time_median_s,rel_err_x_median,rel_err_y_median\n"));
}

#[test]
fn summary_matches_recomputation_from_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let body = SMALL.replace("max_iters = 200", "max_iters = 40\nrecord_every = 3") + "\n[problem]\nreg_y = l1\n";
    let cfg = write_config(tmp.path(), "grid", &body, &out);
    std::fs::write(&cfg, std::fs::read_to_string(&cfg).unwrap() + "repeats = 4\n").unwrap();
    let res = rmrk(&["run", "--config", cfg.to_str().unwrap(), "--jobs", "3"], tmp.path());
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));

    let mut f_by_t: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut time_by_t: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for seed in 4..8 {
        let text = std::fs::read_to_string(out.join(format!("grid_seed{seed}.csv"))).unwrap();
        for r in parse_trace_csv(&text, "trace").unwrap() {
            f_by_t.entry(r.t).or_default().push(r.f_value);
            time_by_t.entry(r.t).or_default().push(r.wall_time_s);
        }
    }
    let summary = parse_summary_csv(&std::fs::read_to_string(out.join("grid_summary.csv")).unwrap(), "summary").unwrap();
    let expected_t: Vec<usize> = f_by_t.iter().filter(|(_, v)| v.len() == 4).map(|(t, _)| *t).collect();
    assert_eq!(summary.iter().map(|r| r.t).collect::<Vec<_>>(), expected_t);
    assert_eq!(expected_t[..3], [1, 4, 7]);
    for row in &summary {
        let f = &f_by_t[&row.t];
        assert_eq!((row.config_id.as_str(), row.algorithm.as_str()), ("grid", "alt-cgpg"));
        assert_eq!(row.f_median.to_bits(), median(f).to_bits());
        assert!((row.f_mean - f.iter().sum::<f64>() / 4.0).abs() <= 1e-12 * row.f_mean.abs());
        assert_eq!(row.time_median_s.to_bits(), median(&time_by_t[&row.t]).to_bits());
    }
    let (last, rest) = summary.split_last().unwrap();
    assert!(rest.iter().all(|r| r.rel_err_x_median.is_nan() && r.rel_err_y_median.is_nan()));
    assert!(last.rel_err_x_median.is_finite() && last.rel_err_y_median.is_finite());
}

fn masked_files(dir: &Path) -> BTreeMap<String, Vec<String>> {
    files_in(dir)
        .into_iter()
        .map(|name| {
            let col = if name.ends_with("_summary.csv") { 5 } else { 1 };
            let text = std::fs::read_to_string(dir.join(&name)).unwrap();
            (name, rmrk_bench::acceptance::mask_column(&text, col))
        })
        .collect()
}

#[test]
fn repeated_runs_are_identical_apart_from_wall_time() {
    let tmp = tempfile::tempdir().unwrap();
    for alg in ["alt-pgcg", "cgcg-p", "fista"] {
        let (a, b) = (tmp.path().join(format!("{alg}-a")), tmp.path().join(format!("{alg}-b")));
        let body = SMALL.replace("alt-cgpg", alg).replace("max_iters = 200", "max_iters = 50");
        let body = body + "\n[problem]\nreg_y = lp\nlp_p = 1.5\n";
        for (dir, jobs) in [(&a, "1"), (&b, "2")] {
            let cfg = write_config(tmp.path(), alg, &body, dir);
            std::fs::write(&cfg, std::fs::read_to_string(&cfg).unwrap() + "repeats = 3\n").unwrap();
            let res = rmrk(&["run", "--config", cfg.to_str().unwrap(), "--jobs", jobs], tmp.path());
            assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        }
        let (fa, fb) = (masked_files(&a), masked_files(&b));
        assert_eq!(fa.len(), 4);
        assert_eq!(fa, fb, "{alg}");
    }
}

#[test]
fn seed_override_replaces_config_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "seeded", &SMALL.replace("max_iters = 200", "max_iters = 5"), &out);
    let res = Command::new(env!("CARGO_BIN_EXE_rmrk"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("RMRK_SEED", "91")
        .output()
        .unwrap();
    assert_eq!(code(&res), 0);
    assert!(out.join("seeded_seed91.csv").exists());

    let res = Command::new(env!("CARGO_BIN_EXE_rmrk"))
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("RMRK_SEED", "minus one")
        .output()
        .unwrap();
    assert_eq!(code(&res), 2);
}

#[test]
fn never_writes_outside_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path().join("cwd");
    let conf_dir = tmp.path().join("conf");
    let out = tmp.path().join("nested/out");
    std::fs::create_dir_all(&cwd).unwrap();
    std::fs::create_dir_all(&conf_dir).unwrap();
    let cfg = write_config(&conf_dir, "iso", &SMALL.replace("max_iters = 200", "max_iters = 10"), &out);
    let res = rmrk(&["run", "--config", cfg.to_str().unwrap()], &cwd);
    assert_eq!(code(&res), 0);
    assert!(files_in(&cwd).is_empty());
    assert_eq!(files_in(&conf_dir), BTreeSet::from(["iso.cfg".to_string()]));
    assert_eq!(files_in(&tmp.path().join("nested")), BTreeSet::from(["out".to_string()]));
    assert_eq!(files_in(&out).len(), 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        // Unknown key and unknown section.
        (SMALL.replace("seed = 4", "seed = 4\ncolour = red"), 2),
        (format!("{SMALL}\n[extras]\na = 1\n"), 2),
        // Unparsable and out-of-range values.
        (SMALL.replace("max_iters = 200", "max_iters = lots"), 2),
        (SMALL.replace("p = 0.1", "p = 1.5"), 2),
        (SMALL.replace("alt-cgpg", "simplex"), 2),
        (format!("{SMALL}\nschedule = fixed\neta = 1.5\n"), 2),
        // Valid syntax, but no sparse entry survives the mask.
        (SMALL.replace("n = 20", "n = 2").replace("r = 2", "r = 1").replace("p = 0.1", "p = 1e-9"), 3),
        // Min-diameter steps need an alternating method.
        (SMALL.replace("alt-cgpg", "fista") + "schedule = min-diam\n", 2),
    ];
    for (i, (body, expected)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("case{i}"), body, &out);
        let res = rmrk(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
        assert_eq!(code(&res), *expected, "case {i}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!res.stderr.is_empty());
        if *expected == 3 {
            assert!(String::from_utf8_lossy(&res.stderr).contains("degenerate instance"));
        }
    }
    let res = rmrk(&["run", "--config", "/nonexistent/x.cfg"], tmp.path());
    assert_eq!(code(&res), 1);
    let cfg = write_config(tmp.path(), "ok", SMALL, &out);
    let res = rmrk(&["run", "--config", cfg.to_str().unwrap(), "--jobs", "0"], tmp.path());
    assert_eq!(code(&res), 2);
}

#[test]
fn gen_writes_consistent_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.cfg");
    std::fs::write(&spec, "[instance]\nkind = table2\nn = 12\nr = 2\ndelta = 0.2\nseed = 3\n").unwrap();
    let out = tmp.path().join("inst");
    let res = rmrk(&["gen", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        files_in(&out),
        ["l_true.mtx", "m_data.mtx", "metadata.txt", "s_true.mtx"].map(String::from).into()
    );
    let m = read_matrix(&out.join("m_data.mtx")).unwrap();
    let l = read_matrix(&out.join("l_true.mtx")).unwrap();
    let s = read_matrix(&out.join("s_true.mtx")).unwrap();
    assert_eq!(l.add(&s), m);
    let meta: BTreeMap<String, String> = std::fs::read_to_string(out.join("metadata.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect();
    assert_eq!(meta["kind"], "table2");
    assert_eq!(meta["seed"], "3");
    assert_eq!(meta["s_norm"], "l1.2");
    let tau: f64 = meta["tau"].parse().unwrap();
    let direct = rmrk_core::svd::nuclear_norm(&l).unwrap();
    assert!((tau - direct).abs() <= 1e-10 * direct);
    let s_bound: f64 = meta["s_bound"].parse().unwrap();
    assert!((s_bound - s.lp_norm(1.2)).abs() <= 1e-12 * s_bound);

    // Same spec, same bytes.
    let again = tmp.path().join("again");
    rmrk(&["gen", "--spec", spec.to_str().unwrap(), "--out", again.to_str().unwrap()], tmp.path());
    for f in files_in(&out) {
        assert_eq!(std::fs::read(out.join(&f)).unwrap(), std::fs::read(again.join(&f)).unwrap());
    }
}

#[test]
fn acceptance_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let res = rmrk(&["acceptance", "oracles"], tmp.path());
    assert_eq!(code(&res), 0);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);

    let res = rmrk(&["acceptance", "everything"], tmp.path());
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("usage"));
}
