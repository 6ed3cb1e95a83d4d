//! Trace and summary CSV files.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rmrk_core::solvers::IterationRecord;

use crate::error::BenchError;

pub const TRACE_HEADER: [&str; 7] = ["t", "wall_time_s", "f_value", "eta_used", "feas_x", "feas_y", "rank_x"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "config_id",
    "algorithm",
    "t",
    "f_median",
    "f_mean",
    "time_median_s",
    "rel_err_x_median",
    "rel_err_y_median",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of the per-configuration summary. The relative errors describe
/// the returned iterates, so they are set on the last row and NaN elsewhere.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub config_id: String,
    pub algorithm: String,
    pub t: usize,
    pub f_median: f64,
    pub f_mean: f64,
    pub time_median_s: f64,
    pub rel_err_x_median: f64,
    pub rel_err_y_median: f64,
}

/// What the summary needs from one repeat.
#[derive(Clone, Debug)]
pub struct RepeatResult {
    pub trace: Vec<IterationRecord>,
    pub rel_err_x: f64,
    pub rel_err_y: f64,
}

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii csv")
}

pub fn trace_to_csv(trace: &[IterationRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory writer");
    for r in trace {
        w.write_record([
            r.t.to_string(),
            fmt_f64(r.wall_time_s),
            fmt_f64(r.f_value),
            fmt_f64(r.eta_used),
            fmt_f64(r.feas_x),
            fmt_f64(r.feas_y),
            r.rank_x.to_string(),
        ])
        .expect("in-memory writer");
    }
    to_string(w)
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("in-memory writer");
    for r in rows {
        w.write_record([
            r.config_id.clone(),
            r.algorithm.clone(),
            r.t.to_string(),
            fmt_f64(r.f_median),
            fmt_f64(r.f_mean),
            fmt_f64(r.time_median_s),
            fmt_f64(r.rel_err_x_median),
            fmt_f64(r.rel_err_y_median),
        ])
        .expect("in-memory writer");
    }
    to_string(w)
}

fn read_rows(text: &str, origin: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let got = r.headers().map_err(|e| BenchError::parse(origin, e.to_string()))?;
    if got.iter().ne(header.iter().copied()) {
        return Err(BenchError::parse(origin, format!("header must be `{}`", header.join(","))));
    }
    r.records()
        .map(|rec| rec.map_err(|e| BenchError::parse(origin, e.to_string())))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, origin: &str) -> Result<T, BenchError> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse()
        .map_err(|_| BenchError::parse(origin, format!("bad field `{raw}` in column {}", i + 1)))
}

pub fn parse_trace_csv(text: &str, origin: &str) -> Result<Vec<IterationRecord>, BenchError> {
    read_rows(text, origin, &TRACE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(IterationRecord {
                t: field(rec, 0, origin)?,
                wall_time_s: field(rec, 1, origin)?,
                f_value: field(rec, 2, origin)?,
                eta_used: field(rec, 3, origin)?,
                feas_x: field(rec, 4, origin)?,
                feas_y: field(rec, 5, origin)?,
                rank_x: field(rec, 6, origin)?,
            })
        })
        .collect()
}

pub fn parse_summary_csv(text: &str, origin: &str) -> Result<Vec<SummaryRow>, BenchError> {
    read_rows(text, origin, &SUMMARY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(SummaryRow {
                config_id: field(rec, 0, origin)?,
                algorithm: field(rec, 1, origin)?,
                t: field(rec, 2, origin)?,
                f_median: field(rec, 3, origin)?,
                f_mean: field(rec, 4, origin)?,
                time_median_s: field(rec, 5, origin)?,
                rel_err_x_median: field(rec, 6, origin)?,
                rel_err_y_median: field(rec, 7, origin)?,
            })
        })
        .collect()
}

pub fn emit_trace_csv(trace: &[IterationRecord], path: &Path) -> Result<(), BenchError> {
    fs::write(path, trace_to_csv(trace)).map_err(|e| BenchError::io(path, e))
}

pub fn emit_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<(), BenchError> {
    fs::write(path, summary_to_csv(rows)).map_err(|e| BenchError::io(path, e))
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Aggregates the repeats at every `t` recorded by all of them.
pub fn summarize(config_id: &str, algorithm: &str, repeats: &[RepeatResult]) -> Vec<SummaryRow> {
    let mut by_t: BTreeMap<usize, Vec<&IterationRecord>> = BTreeMap::new();
    for rep in repeats {
        for r in &rep.trace {
            by_t.entry(r.t).or_default().push(r);
        }
    }
    let mut rows: Vec<SummaryRow> = by_t
        .into_iter()
        .filter(|(_, recs)| recs.len() == repeats.len())
        .map(|(t, recs)| {
            let f: Vec<f64> = recs.iter().map(|r| r.f_value).collect();
            let time: Vec<f64> = recs.iter().map(|r| r.wall_time_s).collect();
            SummaryRow {
                config_id: config_id.to_string(),
                algorithm: algorithm.to_string(),
                t,
                f_median: median(&f),
                f_mean: f.iter().sum::<f64>() / f.len() as f64,
                time_median_s: median(&time),
                rel_err_x_median: f64::NAN,
                rel_err_y_median: f64::NAN,
            }
        })
        .collect();
    if let Some(last) = rows.last_mut() {
        let ex: Vec<f64> = repeats.iter().map(|r| r.rel_err_x).collect();
        let ey: Vec<f64> = repeats.iter().map(|r| r.rel_err_y).collect();
        last.rel_err_x_median = median(&ex);
        last.rel_err_y_median = median(&ey);
    }
    rows
}
