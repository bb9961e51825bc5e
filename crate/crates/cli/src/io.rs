//! Matrix files: Matrix Market `array complex general` (column-major, one
//! `re im` pair per line) and JSON `{"rows", "cols", "data": [[re, im], ...]}`
//! in row-major order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use opcalc_core::{Complex64, ComplexMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Json,
}

impl MatrixFormat {
    /// `.mtx` is Matrix Market, everything else JSON.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("mm") => Self::MatrixMarket,
            _ => Self::Json,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::MatrixMarket => "mtx",
            Self::Json => "json",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for JsonMatrix {
    fn from(m: &ComplexMatrix) -> Self {
        Self { rows: m.rows(), cols: m.cols(), data: m.as_slice().iter().map(|z| [z.re, z.im]).collect() }
    }
}

pub fn to_json_value(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(JsonMatrix::from(m)).expect("matrix serializes")
}

pub fn to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&JsonMatrix::from(m)).expect("matrix serializes")
}

pub fn from_json(text: &str) -> Result<ComplexMatrix, String> {
    let j: JsonMatrix = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let data = j.data.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    let m = ComplexMatrix::from_row_major(j.rows, j.cols, data).map_err(|e| e.to_string())?;
    if !m.is_finite() {
        return Err("matrix has non-finite entries".into());
    }
    Ok(m)
}

pub fn to_matrix_market(m: &ComplexMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{} {}", z.re, z.im);
        }
    }
    out
}

/// Reads `array` matrices with `complex`, `real` or `integer` fields.
pub fn from_matrix_market(text: &str) -> Result<ComplexMatrix, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() < 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err("missing `%%MatrixMarket matrix` header".into());
    }
    if words[2] != "array" {
        return Err(format!("only the `array` layout is supported, got `{}`", words[2]));
    }
    let complex = match words[3].as_str() {
        "complex" => true,
        "real" | "integer" => false,
        other => return Err(format!("unsupported field `{other}`")),
    };
    if words[4] != "general" {
        return Err(format!("only `general` symmetry is supported, got `{}`", words[4]));
    }
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or("missing size line")?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad size line `{size}`")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format!("size line must hold two integers, got `{size}`"));
    };
    let mut m = ComplexMatrix::zeros(rows, cols);
    for k in 0..rows * cols {
        let line = body.next().ok_or_else(|| format!("expected {} entries, found {k}", rows * cols))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad entry `{line}`")))
            .collect::<Result<_, _>>()?;
        let z = match (complex, &vals[..]) {
            (true, [re, im]) => Complex64::new(*re, *im),
            (false, [re]) => Complex64::new(*re, 0.0),
            _ => return Err(format!("entry {} has the wrong number of values: `{line}`", k + 1)),
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(format!("entry {} is not finite", k + 1));
        }
        m[(k % rows, k / rows)] = z;
    }
    if let Some(extra) = body.next() {
        return Err(format!("unexpected trailing data `{extra}`"));
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, IoError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| IoError::File { path: p.clone(), source })?;
    // sniff the content so a mislabelled extension still reads
    let parsed = if text.trim_start().starts_with("%%") {
        from_matrix_market(&text)
    } else if text.trim_start().starts_with('{') {
        from_json(&text)
    } else {
        match MatrixFormat::for_path(path) {
            MatrixFormat::MatrixMarket => from_matrix_market(&text),
            MatrixFormat::Json => from_json(&text),
        }
    };
    parsed.map_err(|msg| IoError::Format { path: p, msg })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix, format: MatrixFormat) -> Result<(), IoError> {
    let text = match format {
        MatrixFormat::MatrixMarket => to_matrix_market(m),
        MatrixFormat::Json => to_json(m) + "\n",
    };
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64 + 0.1, -(j as f64) / 3.0))
    }

    #[test]
    fn matrix_market_is_column_major() {
        let text = to_matrix_market(&sample());
        let mut lines = text.lines().skip(2);
        assert_eq!(lines.next().unwrap(), "0.1 -0");
        assert_eq!(lines.next().unwrap(), "1.1 -0");
        assert_eq!(from_matrix_market(&text).unwrap(), sample());
    }

    #[test]
    fn json_round_trip() {
        assert_eq!(from_json(&to_json(&sample())).unwrap(), sample());
    }

    #[test]
    fn real_matrix_market_reads() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n2\n3\n4\n";
        let m = from_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn malformed_inputs() {
        assert!(from_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 1\n").is_err());
        assert!(from_matrix_market("%%MatrixMarket matrix array complex general\n2 2\n1 0\n").is_err());
        assert!(from_json(r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#).is_err());
    }
}
