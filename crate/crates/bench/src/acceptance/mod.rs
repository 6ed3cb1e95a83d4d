//! Acceptance suite: each criterion runs at its stated tolerance and
//! reports one pass/fail line.

mod criteria;
pub mod reference;

use std::io::Write;
use std::time::Instant;

pub use criteria::*;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Measured values next to their thresholds.
    pub detail: String,
    pub elapsed_s: f64,
    /// Runtime limit; exceeding it fails the criterion.
    pub budget_s: Option<f64>,
}

impl Outcome {
    pub fn line(&self) -> String {
        let budget = match self.budget_s {
            Some(b) => format!("{:.1} s of {b:.0} s", self.elapsed_s),
            None => format!("{:.1} s", self.elapsed_s),
        };
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {:>2} {}: {} ({budget})", self.id, self.name, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Oracles,
    Rates,
    Table2,
    Comparative,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["oracles", "rates", "table2", "comparative", "all"];

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "oracles" => Suite::Oracles,
            "rates" => Suite::Rates,
            "table2" => Suite::Table2,
            "comparative" => Suite::Comparative,
            "all" => Suite::All,
            _ => return None,
        })
    }

    /// Criterion groups in execution order.
    fn groups(self) -> Vec<fn() -> Vec<Outcome>> {
        let oracles: [fn() -> Vec<Outcome>; 3] = [
            || vec![oracle_equivalence()],
            || vec![recursion_certificates()],
            || vec![composed_strong_convexity_check()],
        ];
        let rates: [fn() -> Vec<Outcome>; 3] = [min_diam_rate, || vec![strong_set_rate()], || vec![elastic_net_linear_rate()]];
        let table2: [fn() -> Vec<Outcome>; 1] = [|| vec![table2_recovery()]];
        let comparative: [fn() -> Vec<Outcome>; 2] = [|| vec![alternating_beats_cgcg()], || vec![run_determinism()]];
        match self {
            Suite::Oracles => oracles.to_vec(),
            Suite::Rates => rates.to_vec(),
            Suite::Table2 => table2.to_vec(),
            Suite::Comparative => comparative.to_vec(),
            Suite::All => [&oracles[..], &rates[..], &table2[..], &comparative[..]].concat(),
        }
    }
}

/// Runs `suite`, printing each outcome to `out` as soon as it is known.
pub fn run_suite(suite: Suite, out: &mut dyn Write) -> Vec<Outcome> {
    let mut outcomes = Vec::new();
    for group in suite.groups() {
        for o in group() {
            // A closed stdout should not abort the remaining checks.
            let _ = writeln!(out, "{}", o.line());
            let _ = out.flush();
            outcomes.push(o);
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(out, "{} passed, {failed} failed", outcomes.len() - failed);
    outcomes
}

/// Runs `f` and returns its result together with the elapsed seconds.
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_secs_f64())
}
