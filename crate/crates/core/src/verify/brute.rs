//! Exhaustive maximal-volume search and Eckart–Young optima.

use itertools::Itertools;
use rayon::prelude::*;

use crate::access::IndexSet;
use crate::error::{CurError, Result};
use crate::linalg::{projective_volume, singular_values, DenseMatrix, LogVolume};

/// Largest number of candidate submatrices any enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Exact maximizer of a volume over an enumerated family of submatrices.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteMax {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub log_volume: LogVolume,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn guard(candidates: u128) -> Result<()> {
    if candidates > ENUMERATION_LIMIT {
        return Err(CurError::EnumerationGuard {
            candidates,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// `v2,r` of `w[rows, cols]`; square full-rank cases use a determinant.
fn submatrix_volume(w: &DenseMatrix, rows: &[usize], cols: &[usize], r: usize) -> LogVolume {
    if rows.len() == r && cols.len() == r {
        let mut buf: Vec<f64> = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| w[(i, j)]))
            .collect();
        return log_abs_det(&mut buf, r);
    }
    projective_volume(&w.select(rows, cols), r).expect("rank within submatrix bounds")
}

/// In-place Gaussian elimination with partial pivoting on a row-major `r x r` buffer.
fn log_abs_det(a: &mut [f64], r: usize) -> LogVolume {
    let mut log = 0.0;
    for k in 0..r {
        let p = (k..r)
            .max_by(|&x, &y| a[x * r + k].abs().total_cmp(&a[y * r + k].abs()))
            .expect("non-empty range");
        let piv = a[p * r + k];
        if piv == 0.0 {
            return LogVolume::ZERO;
        }
        if p != k {
            for c in 0..r {
                a.swap(k * r + c, p * r + c);
            }
        }
        log += piv.abs().ln();
        for i in k + 1..r {
            let f = a[i * r + k] / piv;
            for c in k + 1..r {
                a[i * r + c] -= f * a[k * r + c];
            }
        }
    }
    LogVolume::from_log(log)
}

/// Keeps the larger volume; ties go to the lexicographically smaller index pair.
fn better(a: (LogVolume, Vec<usize>, Vec<usize>), b: (LogVolume, Vec<usize>, Vec<usize>)) -> (LogVolume, Vec<usize>, Vec<usize>) {
    use std::cmp::Ordering::*;
    match a.0.partial_cmp(&b.0) {
        Some(Greater) => a,
        Some(Less) => b,
        _ => {
            if (&b.1, &b.2) < (&a.1, &a.2) {
                b
            } else {
                a
            }
        }
    }
}

fn finish(best: Option<(LogVolume, Vec<usize>, Vec<usize>)>) -> Result<BruteMax> {
    let (log_volume, rows, cols) =
        best.ok_or_else(|| CurError::InvalidArgument("nothing to enumerate".into()))?;
    Ok(BruteMax {
        rows: IndexSet::new(rows)?,
        cols: IndexSet::new(cols)?,
        log_volume,
    })
}

fn check_dims(w: &DenseMatrix, k: usize, l: usize, r: usize) -> Result<()> {
    let (m, n) = w.shape();
    if r == 0 || r > k.min(l) || k > m || l > n {
        return Err(CurError::InvalidArgument(format!(
            "need 1 <= r <= min(k, l), k <= {m}, l <= {n}; got r={r}, k={k}, l={l}"
        )));
    }
    Ok(())
}

/// Exact maximizer of `v2,r` over all `k x l` submatrices.
pub fn brute_force_max_volume(w: &DenseMatrix, k: usize, l: usize, r: usize) -> Result<BruteMax> {
    check_dims(w, k, l, r)?;
    let (m, n) = w.shape();
    guard(binomial(m, k).saturating_mul(binomial(n, l)))?;
    let col_sets: Vec<Vec<usize>> = (0..n).combinations(l).collect();
    let best = (0..m)
        .combinations(k)
        .par_bridge()
        .map(|rows| {
            col_sets
                .iter()
                .map(|cols| (submatrix_volume(w, &rows, cols, r), rows.clone(), cols.clone()))
                .reduce(better)
                .expect("at least one column set")
        })
        .reduce_with(better);
    finish(best)
}

/// Exact maximizer of `v2,r` over principal `k x k` submatrices of a square matrix.
pub fn brute_force_principal(w: &DenseMatrix, k: usize, r: usize) -> Result<BruteMax> {
    if !w.is_square() {
        return Err(CurError::Dimension("principal submatrices need a square matrix".into()));
    }
    check_dims(w, k, k, r)?;
    guard(binomial(w.rows(), k))?;
    let best = (0..w.rows())
        .combinations(k)
        .par_bridge()
        .map(|s| (submatrix_volume(w, &s, &s, r), s.clone(), s))
        .reduce_with(better);
    finish(best)
}

/// Best `l` columns for fixed rows: column-wise maximality reference.
pub fn brute_force_fixed_rows(w: &DenseMatrix, rows: &IndexSet, l: usize, r: usize) -> Result<BruteMax> {
    rows.check_bound(w.rows())?;
    check_dims(w, rows.len(), l, r)?;
    guard(binomial(w.cols(), l))?;
    let fixed = rows.as_slice().to_vec();
    let best = (0..w.cols())
        .combinations(l)
        .par_bridge()
        .map(|cols| (submatrix_volume(w, &fixed, &cols, r), fixed.clone(), cols))
        .reduce_with(better);
    finish(best)
}

/// Best `k` rows for fixed columns: row-wise maximality reference.
pub fn brute_force_fixed_cols(w: &DenseMatrix, cols: &IndexSet, k: usize, r: usize) -> Result<BruteMax> {
    cols.check_bound(w.cols())?;
    check_dims(w, k, cols.len(), r)?;
    guard(binomial(w.rows(), k))?;
    let fixed = cols.as_slice().to_vec();
    let best = (0..w.rows())
        .combinations(k)
        .par_bridge()
        .map(|rows| (submatrix_volume(w, &rows, &fixed, r), rows, fixed.clone()))
        .reduce_with(better);
    finish(best)
}

/// Eckart–Young optimal rank-`r` errors: `(sigma_{r+1}, (sum_{j>r} sigma_j²)^{1/2})`.
pub fn optimal_error(w: &DenseMatrix, r: usize) -> Result<(f64, f64)> {
    let s = singular_values(w)?;
    let spectral = s.get(r).copied().unwrap_or(0.0);
    let frobenius = s.iter().skip(r).map(|v| v * v).sum::<f64>().sqrt();
    Ok((spectral, frobenius))
}
