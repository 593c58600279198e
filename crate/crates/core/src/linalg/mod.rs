//! Dense linear-algebra substrate.

mod decomp;
mod matrix;
mod volume;

pub use decomp::{
    cholesky, col_piv_qr, forward_substitute, norms, numerical_rank, pseudo_inverse,
    rank_truncation, singular_values, spectral_norm, svd, truncated_pseudo_inverse,
    zero_threshold, ColPivQr, Lu, Norms, Svd,
};
pub use matrix::DenseMatrix;
pub use volume::{projective_volume, volume, LogVolume};

use rand::Rng;
use rand_distr::StandardNormal;

/// Matrix of i.i.d. standard normal entries.
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `rows x cols` matrix with orthonormal columns (`cols <= rows`), from the
/// QR factorization of a Gaussian matrix.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    assert!(cols <= rows, "need cols <= rows for orthonormal columns");
    let g = random_gaussian(rows, cols, rng).to_nalgebra();
    let q = g.qr().q();
    DenseMatrix::from_nalgebra(&q.columns(0, cols).into_owned())
}
