//! CUR low-rank approximation by volume maximization.
//!
//! Index sets are chosen by maximizing the volume (or `r`-projective volume)
//! of a small generator submatrix, reading as few entries of the input as
//! possible. Modules:
//!
//! - [`linalg`]: dense matrices, SVD, pivoted QR, LU, volumes.
//! - [`access`]: counted entry oracles and index sets.
//! - [`spsd`]: principal-submatrix CUR for SPSD input.
//! - [`cross`]: alternating row/column cross approximation with verification.
//! - [`hss`]: hierarchical compression of off-diagonal blocks.
//! - [`verify`]: brute-force oracles, adversaries and bound checks.
//! - [`generate`]: seeded test-matrix generators.

pub mod access;
pub mod cross;
pub mod cur;
pub mod error;
pub mod generate;
pub mod hss;
pub mod linalg;
pub mod spsd;
pub mod verify;

pub use access::{BlockView, Entries, EntryOracle, IndexSet};
pub use cross::{ca_iterations, maxvol_submatrix, projective_to_volume, verify_error, CaConfig, CaOutcome, CaStatus};
pub use cur::{build_cur, cheb_error, cheb_error_dense, CurFactors};
pub use error::{CurError, Result};
pub use generate::MatrixSpec;
pub use hss::{build_hss, cauchy_oracle, HssConfig, HssTree};
pub use linalg::{DenseMatrix, LogVolume};
pub use spsd::{build_cur_spsd, spsd_cur, spsd_main, SpsdConfig, SpsdOutcome};
pub use verify::{adversary_demo, brute_force_max_volume, optimal_error, theorem_suite, AdversarialFamily};
