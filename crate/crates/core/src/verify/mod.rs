//! Independent verifiers: exhaustive volume maximization, Eckart–Young
//! optima, seeded theorem checks and hard-input families for sublinear
//! procedures.

pub mod adversary;
pub mod brute;
pub mod theorems;

pub use adversary::{adversary_demo, AdversarialFamily, AdversaryOutcome, FamilyKind, Witness};
pub use brute::{
    binomial, brute_force_fixed_cols, brute_force_fixed_rows, brute_force_max_volume,
    brute_force_principal, optimal_error, BruteMax, ENUMERATION_LIMIT,
};
pub use theorems::{theorem_suite, CheckKind, CheckResult, TheoremLedger};
