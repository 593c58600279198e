//! Factorizations: compact SVD (backed by nalgebra), column-pivoted Householder
//! QR, partial-pivoting LU and Cholesky, plus the norm / pseudo-inverse /
//! truncation helpers built on them.

use crate::error::{CurError, Result};
use crate::linalg::DenseMatrix;

const SVD_MAX_SWEEPS: usize = 10_000;

/// Singular values at or below `max(m, n) * eps * sigma_1` are treated as zero.
pub fn zero_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Compact SVD `M = S diag(sigma) Tᵀ` with the rank cutoff already applied.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right: DenseMatrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.left.rows();
        let n = self.right.rows();
        DenseMatrix::from_fn(m, n, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| self.left[(i, k)] * s * self.right[(j, k)])
                .sum()
        })
    }
}

fn raw_svd(m: &DenseMatrix, vectors: bool) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    m.to_nalgebra()
        .try_svd(vectors, vectors, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or(CurError::SvdNoConvergence {
            rows: m.rows(),
            cols: m.cols(),
        })
}

/// All `min(m, n)` singular values in non-increasing order, without cutoff.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = raw_svd(m, false)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            left: DenseMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            right: DenseMatrix::zeros(cols, 0),
        });
    }
    let raw = raw_svd(m, true)?;
    let u = raw.u.as_ref().expect("left vectors requested");
    let vt = raw.v_t.as_ref().expect("right vectors requested");
    let mut order: Vec<usize> = (0..raw.singular_values.len()).collect();
    order.sort_by(|&a, &b| raw.singular_values[b].total_cmp(&raw.singular_values[a]));
    let sigma_max = order.first().map_or(0.0, |&k| raw.singular_values[k]);
    let cutoff = zero_threshold(rows, cols, sigma_max);
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&k| raw.singular_values[k] > cutoff && sigma_max > 0.0)
        .collect();
    let left = DenseMatrix::from_fn(rows, kept.len(), |i, c| u[(i, kept[c])]);
    let right = DenseMatrix::from_fn(cols, kept.len(), |j, c| vt[(kept[c], j)]);
    let singular_values = kept.iter().map(|&k| raw.singular_values[k]).collect();
    Ok(Svd {
        left,
        singular_values,
        right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
    pub chebyshev: f64,
}

pub fn norms(m: &DenseMatrix) -> Result<Norms> {
    Ok(Norms {
        spectral: spectral_norm(m)?,
        frobenius: m.frobenius(),
        chebyshev: m.max_abs(),
    })
}

pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Moore–Penrose pseudo-inverse from the compact SVD.
pub fn pseudo_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let s = svd(m)?;
    Ok(DenseMatrix::from_fn(m.cols(), m.rows(), |i, j| {
        s.singular_values
            .iter()
            .enumerate()
            .map(|(k, sv)| s.right[(i, k)] * s.left[(j, k)] / sv)
            .sum()
    }))
}

/// Keeps the `r` largest singular triplets.
pub fn rank_truncation(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    if r == 0 {
        return Err(CurError::InvalidArgument("truncation rank must be >= 1".into()));
    }
    let mut s = svd(m)?;
    if r >= s.rank() {
        return Ok(m.clone());
    }
    s.singular_values.truncate(r);
    Ok(s.reconstruct())
}

/// Pseudo-inverse of the rank-`r` truncation, `(M_r)⁺`.
pub fn truncated_pseudo_inverse(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let s = svd(m)?;
    let keep = r.min(s.rank());
    Ok(DenseMatrix::from_fn(m.cols(), m.rows(), |i, j| {
        (0..keep)
            .map(|k| s.right[(i, k)] * s.left[(j, k)] / s.singular_values[k])
            .sum()
    }))
}

/// Smallest `r` with `sigma_{r+1} <= eps * sigma_1`.
pub fn numerical_rank(m: &DenseMatrix, eps: f64) -> Result<usize> {
    if eps <= 0.0 {
        return Err(CurError::InvalidArgument("eps must be positive".into()));
    }
    let s = singular_values(m)?;
    let Some(&top) = s.first() else { return Ok(0) };
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().take_while(|&&v| v > eps * top).count())
}

/// Householder QR with Businger–Golub column pivoting.
#[derive(Debug, Clone)]
pub struct ColPivQr {
    /// Upper-trapezoidal factor, columns in pivoted order.
    pub r: DenseMatrix,
    /// `perm[c]` is the original column placed at position `c`.
    pub perm: Vec<usize>,
}

impl ColPivQr {
    /// `R Pᵀ`: the triangular factor with columns back in input order,
    /// so that `A = Q * r_original_order()`.
    pub fn r_original_order(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.r.rows(), self.r.cols());
        for (c, &orig) in self.perm.iter().enumerate() {
            for i in 0..self.r.rows() {
                out[(i, orig)] = self.r[(i, c)];
            }
        }
        out
    }
}

/// Column-pivoted QR. Pivot norms are recomputed exactly at every step and
/// ties go to the lowest original column index, so the pivot order is a
/// deterministic function of the input.
pub fn col_piv_qr(a: &DenseMatrix) -> ColPivQr {
    let (m, n) = a.shape();
    let steps = m.min(n);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..steps {
        let mut best = k;
        let mut best_norm = -1.0;
        for c in k..n {
            let norm: f64 = (k..m).map(|i| work[(i, c)] * work[(i, c)]).sum();
            if norm > best_norm || (norm == best_norm && perm[c] < perm[best]) {
                best = c;
                best_norm = norm;
            }
        }
        if best != k {
            perm.swap(k, best);
            for i in 0..m {
                let tmp = work[(i, k)];
                work[(i, k)] = work[(i, best)];
                work[(i, best)] = tmp;
            }
        }
        let alpha: f64 = (k..m).map(|i| work[(i, k)] * work[(i, k)]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if work[(k, k)] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..m).map(|i| work[(i, k)]).collect();
        v[0] += sign * alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in k..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vi)| vi * work[(k + t, c)]).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vi) in v.iter().enumerate() {
                work[(k + t, c)] -= f * vi;
            }
        }
        for i in k + 1..m {
            work[(i, k)] = 0.0;
        }
    }
    let r = DenseMatrix::from_fn(steps, n, |i, j| if j >= i { work[(i, j)] } else { 0.0 });
    ColPivQr { r, perm }
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    piv: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &DenseMatrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(CurError::Dimension(format!("LU of non-square {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                piv.swap(p, k);
                sign = -sign;
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, piv, sign, singular })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `ln |det A|`, or `None` when a zero pivot was hit.
    pub fn log_abs_det(&self) -> Option<f64> {
        if self.singular {
            return None;
        }
        Some((0..self.lu.rows()).map(|i| self.lu[(i, i)].abs().ln()).sum())
    }

    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        self.sign * (0..self.lu.rows()).map(|i| self.lu[(i, i)]).product::<f64>()
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(CurError::Dimension("right-hand side row count".into()));
        }
        if self.singular {
            return Err(CurError::SingularGenerator);
        }
        let mut x = b.select_rows(&self.piv);
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot is not strictly positive.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Forward substitution `L y = b` for lower-triangular `L`.
pub fn forward_substitute(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn svd_of_diagonal_and_rank_one() {
        let s = svd(&DenseMatrix::from_diag(&[3.0, 2.0])).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(close(s.singular_values[0], 3.0, 1e-14));
        assert!(close(s.singular_values[1], 2.0, 1e-14));

        let ones = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let s = svd(&ones).unwrap();
        assert_eq!(s.rank(), 1);
        assert!(close(s.singular_values[0], 2.0, 1e-14));
    }

    #[test]
    fn svd_reconstructs_random_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_gaussian(8, 5, &mut rng);
        let s = svd(&a).unwrap();
        let resid = a.sub(&s.reconstruct()).unwrap().max_abs();
        assert!(resid <= 1e-10 * s.singular_values[0], "residual {resid}");
        let sts = s.left.transpose().matmul(&s.left).unwrap();
        let ttt = s.right.transpose().matmul(&s.right).unwrap();
        let eye = DenseMatrix::identity(s.rank());
        assert!(sts.sub(&eye).unwrap().max_abs() < 1e-12);
        assert!(ttt.sub(&eye).unwrap().max_abs() < 1e-12);
        assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn norms_examples() {
        let n = norms(&DenseMatrix::identity(3)).unwrap();
        assert!(close(n.spectral, 1.0, 1e-14));
        assert!(close(n.frobenius, 3f64.sqrt(), 1e-14));
        assert_eq!(n.chebyshev, 1.0);
        let n = norms(&DenseMatrix::from_diag(&[3.0, 2.0])).unwrap();
        assert!(close(n.spectral, 3.0, 1e-14));
        assert!(close(n.frobenius, 13f64.sqrt(), 1e-14));
        assert_eq!(n.chebyshev, 3.0);
    }

    #[test]
    fn pseudo_inverse_examples() {
        let p = pseudo_inverse(&DenseMatrix::from_diag(&[2.0, 0.0])).unwrap();
        assert!(p.sub(&DenseMatrix::from_diag(&[0.5, 0.0])).unwrap().max_abs() < 1e-15);
        let z = pseudo_inverse(&DenseMatrix::zeros(2, 3)).unwrap();
        assert_eq!(z.shape(), (3, 2));
        assert_eq!(z.max_abs(), 0.0);
        let (c, s) = (0.6f64, 0.8f64);
        let q = DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]);
        assert!(pseudo_inverse(&q).unwrap().sub(&q.transpose()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn truncation_and_numerical_rank() {
        let d = DenseMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let t = rank_truncation(&d, 2).unwrap();
        assert!(t.sub(&DenseMatrix::from_diag(&[3.0, 2.0, 0.0])).unwrap().max_abs() < 1e-14);
        assert_eq!(rank_truncation(&d, 5).unwrap(), d);
        assert!(rank_truncation(&d, 0).is_err());

        assert_eq!(numerical_rank(&DenseMatrix::zeros(3, 3), 1e-8).unwrap(), 0);
        assert_eq!(numerical_rank(&DenseMatrix::from_diag(&[1.0, 1e-12]), 1e-8).unwrap(), 1);
        assert_eq!(numerical_rank(&DenseMatrix::from_diag(&[1.0, 0.5, 1e-9]), 1e-8).unwrap(), 2);
    }

    #[test]
    fn col_piv_qr_reproduces_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_gaussian(4, 7, &mut rng);
        let qr = col_piv_qr(&a);
        // |R[i,i]| non-increasing for column pivoting
        for i in 1..qr.r.rows() {
            assert!(qr.r[(i, i)].abs() <= qr.r[(i - 1, i - 1)].abs() + 1e-12);
        }
        // AᵀA = R'ᵀR' since Q is orthogonal
        let r0 = qr.r_original_order();
        let lhs = a.transpose().matmul(&a).unwrap();
        let rhs = r0.transpose().matmul(&r0).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn lu_solve_and_det() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![3.0, 1.0]]);
        let lu = Lu::new(&a).unwrap();
        assert!(close(lu.det(), -6.0, 1e-14));
        let x = lu.solve(&DenseMatrix::identity(2)).unwrap();
        assert!(a.matmul(&x).unwrap().sub(&DenseMatrix::identity(2)).unwrap().max_abs() < 1e-15);
        let sing = Lu::new(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])).unwrap();
        assert!(sing.log_abs_det().is_none() || sing.det().abs() < 1e-15);
    }

    #[test]
    fn cholesky_factor() {
        let a = DenseMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let l = cholesky(&a).unwrap();
        assert!(l.matmul(&l.transpose()).unwrap().sub(&a).unwrap().max_abs() < 1e-15);
        assert!(cholesky(&DenseMatrix::from_diag(&[1.0, 0.0])).is_none());
        let y = forward_substitute(&l, &[2.0, 1.0]);
        assert!(close(y[0], 1.0, 1e-15));
    }
}
