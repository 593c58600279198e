//! Plain-text matrix format: a `m n` header line, then `m` lines of `n`
//! whitespace-separated decimals written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use curlra::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number of the offending line.
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn to_text(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(" ")).expect("writing to a String");
    }
    out
}

pub fn from_text(text: &str) -> Result<DenseMatrix, ParseError> {
    let err = |line: usize, message: String| ParseError { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty input; expected a `m n` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(1, format!("malformed header `{header}`; expected `m n`")))?;
    let [m, n] = dims[..] else {
        return Err(err(1, format!("header has {} fields; expected `m n`", dims.len())));
    };
    let mut data = Vec::with_capacity(m * n);
    for row in 0..m {
        let (no, line) = lines
            .next()
            .ok_or_else(|| err(row + 2, format!("missing row {} of {m}", row + 1)))?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(no, format!("cannot parse `{t}` as a number"))))
            .collect::<Result<_, _>>()?;
        if values.len() != n {
            return Err(err(no, format!("expected {n} values, found {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(err(no, format!("non-finite value {v}")));
        }
        data.extend(values);
    }
    if let Some((no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(err(no, format!("unexpected trailing content `{extra}`")));
    }
    DenseMatrix::new(m, n, data).map_err(|e| err(1, e.to_string()))
}

pub fn read(path: &Path) -> Result<DenseMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write(path: &Path, m: &DenseMatrix) -> Result<(), String> {
    fs::write(path, to_text(m)).map_err(|e| format!("{}: {e}", path.display()))
}
