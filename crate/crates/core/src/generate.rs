//! Seeded test matrices and the `kind:args` text grammar used to name them.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::access::EntryOracle;
use crate::error::{CurError, Result};
use crate::hss::{cauchy_oracle, default_nodes};
use crate::linalg::{random_gaussian, random_orthonormal, DenseMatrix};

/// Eigenvalues below this fraction of the largest are dropped (set to zero).
pub const SPECTRUM_FLOOR: f64 = 1e-18;

/// `ratio^j` for `j = 0..n`, with entries below `SPECTRUM_FLOOR` set to zero.
pub fn geometric_spectrum(n: usize, ratio: f64) -> Vec<f64> {
    let mut v = 1.0;
    (0..n)
        .map(|_| {
            let out = if v >= SPECTRUM_FLOOR { v } else { 0.0 };
            v *= ratio;
            out
        })
        .collect()
}

/// `Q diag(spectrum) Qᵀ` with a seeded random orthogonal `Q`.
pub fn spsd_dense(spectrum: &[f64], rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = spsd_factor(spectrum, rng);
    g.matmul(&g.transpose()).expect("conforming factor")
}

/// `G` with `G Gᵀ = Q diag(spectrum) Qᵀ`; only the nonzero part of the
/// spectrum contributes columns.
pub fn spsd_factor(spectrum: &[f64], rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = spectrum.len();
    let d = spectrum.iter().filter(|&&l| l > 0.0).count().max(1);
    let q = random_orthonormal(n, d, rng);
    DenseMatrix::from_fn(n, d, |i, j| q[(i, j)] * spectrum[j].max(0.0).sqrt())
}

/// Streaming SPSD oracle: entry `(i, j)` is the dot product of rows `i` and
/// `j` of [`spsd_factor`], so nothing of size `n²` is ever stored.
pub fn spsd_oracle(spectrum: &[f64], rng: &mut ChaCha8Rng) -> EntryOracle {
    let g = spsd_factor(spectrum, rng);
    let n = g.rows();
    EntryOracle::from_fn(n, n, move |i, j| {
        g.row(i).iter().zip(g.row(j)).map(|(a, b)| a * b).sum()
    })
}

/// `G Gᵀ` with `G` an `n x r` Gaussian matrix.
pub fn low_rank_spsd(n: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = random_gaussian(n, r, rng);
    g.matmul(&g.transpose()).expect("conforming factor")
}

/// Product of `m x r` and `r x n` Gaussian matrices.
pub fn low_rank(m: usize, n: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    random_gaussian(m, r, rng)
        .matmul(&random_gaussian(r, n, rng))
        .expect("conforming factors")
}

/// The `m x n` matrix with a single 1 at `(i, j)`.
pub fn delta_matrix(m: usize, n: usize, i: usize, j: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |a, b| if (a, b) == (i, j) { 1.0 } else { 0.0 })
}

/// Named test matrix.
///
/// Grammar: `spsd:N:geo:RATIO`, `cauchy:N`, `rank:M:N:R`, `delta:M:N:I:J`.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSpec {
    Spsd { n: usize, ratio: f64 },
    Cauchy { n: usize },
    Rank { m: usize, n: usize, r: usize },
    Delta { m: usize, n: usize, i: usize, j: usize },
}

pub const SPEC_GRAMMAR: &str = "spsd:N:geo:RATIO | cauchy:N | rank:M:N:R | delta:M:N:I:J";

impl FromStr for MatrixSpec {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || CurError::InvalidArgument(format!("malformed matrix spec `{s}`; expected {SPEC_GRAMMAR}"));
        let parts: Vec<&str> = s.split(':').collect();
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["spsd", n, "geo", ratio] => {
                let ratio: f64 = ratio.parse().map_err(|_| bad())?;
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(bad());
                }
                MatrixSpec::Spsd { n: int(n)?, ratio }
            }
            ["cauchy", n] => MatrixSpec::Cauchy { n: int(n)? },
            ["rank", m, n, r] => MatrixSpec::Rank {
                m: int(m)?,
                n: int(n)?,
                r: int(r)?,
            },
            ["delta", m, n, i, j] => {
                let (m, n, i, j) = (int(m)?, int(n)?, int(i)?, int(j)?);
                if i >= m || j >= n {
                    return Err(bad());
                }
                MatrixSpec::Delta { m, n, i, j }
            }
            _ => return Err(bad()),
        };
        if spec.shape().0 == 0 || spec.shape().1 == 0 {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl fmt::Display for MatrixSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSpec::Spsd { n, ratio } => write!(f, "spsd:{n}:geo:{ratio}"),
            MatrixSpec::Cauchy { n } => write!(f, "cauchy:{n}"),
            MatrixSpec::Rank { m, n, r } => write!(f, "rank:{m}:{n}:{r}"),
            MatrixSpec::Delta { m, n, i, j } => write!(f, "delta:{m}:{n}:{i}:{j}"),
        }
    }
}

impl MatrixSpec {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            MatrixSpec::Spsd { n, .. } | MatrixSpec::Cauchy { n } => (n, n),
            MatrixSpec::Rank { m, n, .. } | MatrixSpec::Delta { m, n, .. } => (m, n),
        }
    }

    /// Entry oracle; `spsd` streams from its factor instead of storing `n²` entries.
    pub fn oracle(&self, seed: u64) -> Result<EntryOracle> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match *self {
            MatrixSpec::Spsd { n, ratio } => spsd_oracle(&geometric_spectrum(n, ratio), &mut rng),
            MatrixSpec::Cauchy { n } => {
                let (x, y) = default_nodes(n);
                cauchy_oracle(x, y)?
            }
            _ => EntryOracle::from_matrix(self.dense(seed)?),
        })
    }

    pub fn dense(&self, seed: u64) -> Result<DenseMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match *self {
            MatrixSpec::Spsd { n, ratio } => spsd_dense(&geometric_spectrum(n, ratio), &mut rng),
            MatrixSpec::Cauchy { .. } => self.oracle(seed)?.to_dense(),
            MatrixSpec::Rank { m, n, r } => low_rank(m, n, r, &mut rng),
            MatrixSpec::Delta { m, n, i, j } => delta_matrix(m, n, i, j),
        })
    }
}
