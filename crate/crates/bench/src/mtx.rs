//! Matrix Market `array real general` files (column-major entries).

use std::fs;
use std::path::Path;

use rmrk_core::DenseMatrix;

use crate::csvio::fmt_f64;
use crate::error::BenchError;

const BANNER: &str = "%%MatrixMarket matrix array real general";

pub fn format_matrix(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(26 * a.len() + 64);
    out.push_str(BANNER);
    out.push('\n');
    out.push_str(&format!("{} {}\n", a.rows(), a.cols()));
    for x in a.to_col_major() {
        out.push_str(&fmt_f64(x));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<DenseMatrix, BenchError> {
    let err = |msg: &str| BenchError::parse(origin, msg);
    let mut lines = text.lines();
    let banner = lines.next().ok_or_else(|| err("empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words != ["%%matrixmarket", "matrix", "array", "real", "general"] {
        return Err(err("expected an `array real general` Matrix Market banner"));
    }
    let mut body = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let size = body.next().ok_or_else(|| err("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| err("bad size line")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(err("size line must hold two integers"));
    };
    let values: Vec<f64> = body
        .flat_map(str::split_whitespace)
        .map(|w| w.parse().map_err(|_| err(&format!("bad value `{w}`"))))
        .collect::<Result<_, _>>()?;
    if values.len() != rows * cols {
        return Err(err(&format!(
            "header declares {rows}x{cols} = {} entries, found {}",
            rows * cols,
            values.len()
        )));
    }
    DenseMatrix::from_col_major(rows, cols, &values).map_err(|e| err(&e.to_string()))
}

pub fn write_matrix(path: &Path, a: &DenseMatrix) -> Result<(), BenchError> {
    fs::write(path, format_matrix(a)).map_err(|e| BenchError::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}
