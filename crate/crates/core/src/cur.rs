//! CUR factors and the canonical nucleus construction.

use crate::access::{Entries, EntryOracle, IndexSet};
use crate::error::{CurError, Result};
use crate::linalg::{truncated_pseudo_inverse, DenseMatrix};

/// `W ≈ C U R` with `C = W[:, cols]`, `R = W[rows, :]`.
#[derive(Debug, Clone)]
pub struct CurFactors {
    rows: IndexSet,
    cols: IndexSet,
    c: DenseMatrix,
    u: DenseMatrix,
    r: DenseMatrix,
    rank: usize,
    // C·U, cached so single entries cost one length-k dot product.
    left: DenseMatrix,
}

impl CurFactors {
    pub fn from_parts(
        rows: IndexSet,
        cols: IndexSet,
        c: DenseMatrix,
        u: DenseMatrix,
        r: DenseMatrix,
        rank: usize,
    ) -> Result<Self> {
        let (k, l) = (rows.len(), cols.len());
        let (m, n) = (c.rows(), r.cols());
        if c.cols() != l || r.rows() != k || u.shape() != (l, k) {
            return Err(CurError::Dimension(format!(
                "C {:?}, U {:?}, R {:?} for |rows|={k}, |cols|={l}",
                c.shape(),
                u.shape(),
                r.shape()
            )));
        }
        if rank == 0 || rank > k || rank > l || k > m || l > n {
            return Err(CurError::InvalidArgument(format!(
                "need 0 < r <= k <= m and r <= l <= n, got r={rank}, k={k}, l={l}, m={m}, n={n}"
            )));
        }
        rows.check_bound(m)?;
        cols.check_bound(n)?;
        let left = c.matmul(&u)?;
        Ok(CurFactors {
            rows,
            cols,
            c,
            u,
            r,
            rank,
            left,
        })
    }

    /// Canonical CUR: the nucleus is the pseudo-inverse of the rank-`rank`
    /// truncation of the generator `W[rows, cols]`, read off `C`.
    pub fn canonical(
        rows: IndexSet,
        cols: IndexSet,
        c: DenseMatrix,
        r: DenseMatrix,
        rank: usize,
    ) -> Result<Self> {
        let generator = c.select_rows(rows.as_slice());
        let u = truncated_pseudo_inverse(&generator, rank)?;
        Self::from_parts(rows, cols, c, u, r, rank)
    }

    pub fn rows(&self) -> &IndexSet {
        &self.rows
    }

    pub fn cols(&self) -> &IndexSet {
        &self.cols
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.c.rows(), self.r.cols())
    }

    /// The k x l generator `W[rows, cols]`.
    pub fn generator(&self) -> DenseMatrix {
        self.c.select_rows(self.rows.as_slice())
    }

    /// `C·U`, the m x k left factor.
    pub fn left_factor(&self) -> &DenseMatrix {
        &self.left
    }

    /// `(C U R)[i, j]`
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.left
            .row(i)
            .iter()
            .enumerate()
            .map(|(t, a)| a * self.r[(t, j)])
            .sum()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.left.matmul(&self.r).expect("shapes checked at construction")
    }

    /// `C (U (R x))`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.left.matvec(&self.r.matvec(x))
    }

    /// `Rᵀ (Uᵀ (Cᵀ y))`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.r.tr_matvec(&self.left.tr_matvec(y))
    }

    /// Nucleus replaced by zeros; useful for testing verifiers.
    pub fn with_zero_nucleus(&self) -> Self {
        let (l, k) = self.u.shape();
        let mut out = self.clone();
        out.u = DenseMatrix::zeros(l, k);
        out.left = DenseMatrix::zeros(self.c.rows(), k);
        out
    }
}

/// Reads `C = W[:, cols]`, `R = W[rows, :]` and forms the canonical CUR.
pub fn build_cur<E: Entries + ?Sized>(
    w: &E,
    rows: IndexSet,
    cols: IndexSet,
    rank: usize,
) -> Result<CurFactors> {
    rows.check_bound(w.rows())?;
    cols.check_bound(w.cols())?;
    let c = w.fetch_cols(cols.as_slice());
    let r = w.fetch_rows(rows.as_slice());
    CurFactors::canonical(rows, cols, c, r, rank)
}

/// Exact `‖W − CUR‖_C` by full traversal. Reads are uncounted: this is a
/// verifier and is deliberately superlinear.
pub fn cheb_error(w: &EntryOracle, cur: &CurFactors) -> f64 {
    let (m, n) = cur.shape();
    assert_eq!((m, n), (w.rows(), w.cols()), "CUR shape does not match oracle");
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            worst = worst.max((w.peek(i, j) - cur.entry(i, j)).abs());
        }
    }
    worst
}

/// `‖W − CUR‖_C` against a dense matrix.
pub fn cheb_error_dense(w: &DenseMatrix, cur: &CurFactors) -> f64 {
    let approx = cur.reconstruct();
    w.sub(&approx).expect("shape mismatch").max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rank_two(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_gaussian(m, 2, &mut rng)
            .matmul(&random_gaussian(2, n, &mut rng))
            .unwrap()
    }

    #[test]
    fn exact_cur_of_low_rank_matrix() {
        let w = rank_two(6, 5, 1);
        let o = EntryOracle::from_matrix(w.clone());
        let cur = build_cur(&o, IndexSet::new(vec![0, 3]).unwrap(), IndexSet::new(vec![1, 4]).unwrap(), 2)
            .unwrap();
        assert!(cheb_error(&o, &cur) <= 1e-12 * w.max_abs());
        assert_eq!(o.access_count(), 6 * 2 + 2 * 5 - 4);
        assert!((cur.entry(5, 2) - w[(5, 2)]).abs() < 1e-12);
    }

    #[test]
    fn zero_nucleus_error_is_chebyshev_norm() {
        let w = rank_two(4, 4, 2);
        let o = EntryOracle::from_matrix(w.clone());
        let cur = build_cur(&o, IndexSet::new(vec![0, 1]).unwrap(), IndexSet::new(vec![0, 1]).unwrap(), 2)
            .unwrap()
            .with_zero_nucleus();
        assert_eq!(cheb_error(&o, &cur), w.max_abs());
    }

    #[test]
    fn cheb_error_matches_dense_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_gaussian(7, 6, &mut rng);
        let o = EntryOracle::from_matrix(w.clone());
        let cur = build_cur(&o, IndexSet::new(vec![2, 5]).unwrap(), IndexSet::new(vec![0, 3]).unwrap(), 2)
            .unwrap();
        let dense = w
            .sub(&cur.c().matmul(cur.u()).unwrap().matmul(cur.r()).unwrap())
            .unwrap()
            .max_abs();
        assert!((cheb_error(&o, &cur) - dense).abs() < 1e-13);
        assert!((cheb_error_dense(&w, &cur) - dense).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = DenseMatrix::zeros(4, 2);
        let r = DenseMatrix::zeros(2, 4);
        let rows = IndexSet::new(vec![0, 1]).unwrap();
        let cols = IndexSet::new(vec![0, 1]).unwrap();
        assert!(CurFactors::from_parts(rows.clone(), cols.clone(), c.clone(), DenseMatrix::zeros(2, 3), r.clone(), 2).is_err());
        assert!(CurFactors::from_parts(rows, cols, c, DenseMatrix::zeros(2, 2), r, 3).is_err());
    }
}
