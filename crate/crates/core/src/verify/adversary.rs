//! Hard inputs for sublinear-cost algorithms.
//!
//! A procedure that reads fewer than `m n` entries of the base matrix `B`
//! never sees some cell `(i, j)`. Run deterministically on `B` and on
//! `B + Δ_ij`, it reads the same cells, gets the same answers, and returns
//! the same output `X`. Since `‖(B + Δ_ij) − X‖_C + ‖B − X‖_C ≥ ‖Δ_ij‖_C = 1`,
//! at least one of the two errors is `1/2` or more.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::access::{Entries, EntryOracle};
use crate::error::{CurError, Result};
use crate::generate::delta_matrix;
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// Base is the zero matrix.
    Delta,
    /// Base has i.i.d. entries uniform in `[-scale, scale]`.
    DeltaPerturbed { scale: f64 },
    /// Base is a caller-supplied (typically low-rank) matrix.
    DeltaPlusLowRank,
}

/// The `m n + 1` matrices `{B} ∪ {B + Δ_ij}`.
#[derive(Debug, Clone)]
pub struct AdversarialFamily {
    pub kind: FamilyKind,
    base: DenseMatrix,
}

impl AdversarialFamily {
    pub fn delta(m: usize, n: usize) -> Self {
        AdversarialFamily {
            kind: FamilyKind::Delta,
            base: DenseMatrix::zeros(m, n),
        }
    }

    pub fn perturbed(m: usize, n: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AdversarialFamily {
            kind: FamilyKind::DeltaPerturbed { scale },
            base: DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-scale..=scale)),
        }
    }

    pub fn plus_low_rank(base: DenseMatrix) -> Self {
        AdversarialFamily {
            kind: FamilyKind::DeltaPlusLowRank,
            base,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }

    pub fn len(&self) -> usize {
        let (m, n) = self.shape();
        m * n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn base(&self) -> &DenseMatrix {
        &self.base
    }

    /// `B + Δ_ij`.
    pub fn member(&self, i: usize, j: usize) -> DenseMatrix {
        let (m, n) = self.shape();
        self.base.add(&delta_matrix(m, n, i, j)).expect("same shape")
    }

    /// The base followed by every `B + Δ_ij` in row-major order.
    pub fn members(&self) -> impl Iterator<Item = DenseMatrix> + '_ {
        let (m, n) = self.shape();
        std::iter::once(self.base.clone())
            .chain((0..m * n).map(move |c| self.member(c / n, c % n)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// A cell the procedure never read on the base matrix.
    pub cell: (usize, usize),
    pub accessed: usize,
    /// Outputs on the base and on `base + Δ_cell` agree exactly.
    pub outputs_identical: bool,
    /// Both runs read exactly the same cells.
    pub same_accesses: bool,
    pub error_on_base: f64,
    pub error_on_member: f64,
}

impl Witness {
    pub fn max_error(&self) -> f64 {
        self.error_on_base.max(self.error_on_member)
    }

    /// Identical behaviour on both inputs and a combined error of at least 1.
    pub fn certified(&self) -> bool {
        self.outputs_identical
            && self.same_accesses
            && self.error_on_base + self.error_on_member >= 1.0 - 1e-12
            && self.max_error() >= 0.5 - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryOutcome {
    Witness(Witness),
    /// The procedure read more than the budget (possibly every entry).
    NotSublinear { accessed: usize },
}

/// Runs `procedure` on the family base, finds the first unread cell in
/// row-major order, reruns on the member with that cell set, and certifies
/// that the outputs coincide.
pub fn adversary_demo<F>(family: &AdversarialFamily, budget: usize, procedure: F) -> Result<AdversaryOutcome>
where
    F: Fn(&EntryOracle) -> DenseMatrix,
{
    let (m, n) = family.shape();
    if budget >= m * n {
        return Err(CurError::InvalidArgument(format!("budget {budget} must be below {}", m * n)));
    }
    let base = EntryOracle::from_matrix(family.base().clone());
    let out_base = procedure(&base);
    let accessed = base.access_count();
    if accessed > budget {
        return Ok(AdversaryOutcome::NotSublinear { accessed });
    }
    let seen = base.accessed_cells();
    let cell = (0..m * n)
        .map(|c| (c / n, c % n))
        .find(|&c| !base.was_accessed(c.0, c.1))
        .expect("fewer than m n cells were read");

    let member = family.member(cell.0, cell.1);
    let other = EntryOracle::from_matrix(member.clone());
    let out_member = procedure(&other);
    let err = |w: &DenseMatrix, x: &DenseMatrix| w.sub(x).map(|d| d.max_abs());
    Ok(AdversaryOutcome::Witness(Witness {
        cell,
        accessed,
        outputs_identical: out_base == out_member,
        same_accesses: other.accessed_cells() == seen,
        error_on_base: err(family.base(), &out_base)?,
        error_on_member: err(&member, &out_member)?,
    }))
}
