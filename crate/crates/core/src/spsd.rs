//! CUR for symmetric positive semidefinite matrices by principal-submatrix
//! volume maximization.
//!
//! The pipeline is [`gecp_spsd`] (diagonal-pivoted elimination) for a good
//! starting set, then repeated [`index_update`] single-element swaps until the
//! principal generator is a `(1+eps)`-local maximum of its volume (or of its
//! `r`-projective volume when the generator is larger than the target rank),
//! and finally [`build_cur_spsd`].
//!
//! Every read goes through [`Entries`] and only touches the lower triangle
//! (`(max(a,b), min(a,b))`), so the access counter measures distinct
//! unordered pairs.

use crate::access::{Entries, IndexSet};
use crate::cur::CurFactors;
use crate::error::{CurError, Result};
use crate::linalg::{
    cholesky, forward_substitute, projective_volume, truncated_pseudo_inverse, volume,
    zero_threshold, DenseMatrix, LogVolume, Lu,
};

#[inline]
fn sym<E: Entries + ?Sized>(w: &E, a: usize, b: usize) -> f64 {
    if a >= b {
        w.get(a, b)
    } else {
        w.get(b, a)
    }
}

fn principal<E: Entries + ?Sized>(w: &E, idx: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(idx.len(), idx.len(), |a, b| sym(w, idx[a], idx[b]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsdConfig {
    /// Target rank `r`.
    pub rank: usize,
    /// Generator size `K >= r`.
    pub gen_size: usize,
    /// Volume-improvement tolerance.
    pub eps: f64,
    /// Cap on accepted swaps; `None` uses [`SpsdConfig::default_update_budget`].
    pub max_updates: Option<usize>,
}

impl SpsdConfig {
    pub fn new(rank: usize, eps: f64) -> Self {
        SpsdConfig {
            rank,
            gen_size: rank,
            eps,
            max_updates: None,
        }
    }

    pub fn with_gen_size(mut self, gen_size: usize) -> Self {
        self.gen_size = gen_size;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.rank == 0 || self.rank > self.gen_size || self.gen_size >= n {
            return Err(CurError::InvalidArgument(format!(
                "need 1 <= r <= K < n, got r={}, K={}, n={n}",
                self.rank, self.gen_size
            )));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(CurError::InvalidArgument("eps must be positive".into()));
        }
        Ok(())
    }

    /// `4 * ceil(log_{1+eps}(2^{r(r-1)} n^r))`
    pub fn default_update_budget(&self, n: usize) -> usize {
        (4 * projective_update_bound(self.rank, n, self.eps)).max(1)
    }

    fn update_budget(&self, n: usize) -> usize {
        self.max_updates.unwrap_or_else(|| self.default_update_budget(n))
    }
}

/// `ceil(log_{1+eps}(r!))`: swap bound when the generator size equals the rank.
pub fn square_update_bound(r: usize, eps: f64) -> usize {
    let ln_fact: f64 = (2..=r).map(|i| (i as f64).ln()).sum();
    (ln_fact / eps.ln_1p()).ceil() as usize
}

/// `ceil(log_{1+eps}(2^{r(r-1)} n^r))`: swap bound for larger generators.
pub fn projective_update_bound(r: usize, n: usize, eps: f64) -> usize {
    let r_f = r as f64;
    let ln_ratio = r_f * (r_f - 1.0) * std::f64::consts::LN_2 + r_f * (n as f64).ln();
    (ln_ratio / eps.ln_1p()).ceil() as usize
}

/// Output of a greedy selection; `picks` is in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub picks: Vec<usize>,
    pub set: IndexSet,
    /// The residual vanished before the requested count was reached.
    pub exhausted: bool,
}

impl Selection {
    fn from_picks(picks: Vec<usize>, exhausted: bool) -> Self {
        let set = IndexSet::new(picks.clone()).expect("greedy picks are distinct");
        Selection {
            picks,
            set,
            exhausted,
        }
    }
}

/// Greedy column subset selection: repeatedly take the column of largest
/// residual norm and project it out of every column.
pub fn greedy_column_subset(a: &DenseMatrix, count: usize) -> Result<Selection> {
    let (m, n) = a.shape();
    if count == 0 || count > n {
        return Err(CurError::InvalidArgument(format!("cannot pick {count} of {n} columns")));
    }
    let mut res = a.clone();
    let col_norm2 = |res: &DenseMatrix, j: usize| (0..m).map(|i| res[(i, j)] * res[(i, j)]).sum::<f64>();
    let initial_max = (0..n).map(|j| col_norm2(&res, j)).fold(0.0, f64::max).sqrt();
    let tol = zero_threshold(m, n, initial_max);
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best = None;
        let mut best_norm2 = 0.0;
        for j in 0..n {
            let v = col_norm2(&res, j);
            if v > best_norm2 {
                best_norm2 = v;
                best = Some(j);
            }
        }
        let Some(p) = best.filter(|_| best_norm2.sqrt() > tol) else {
            return Ok(Selection::from_picks(picks, true));
        };
        picks.push(p);
        let u: Vec<f64> = res.column(p);
        // M <- M - u (uᵀ M) / ‖u‖²
        let proj = res.tr_matvec(&u);
        for i in 0..m {
            let ui = u[i] / best_norm2;
            for j in 0..n {
                res[(i, j)] -= ui * proj[j];
            }
        }
    }
    Ok(Selection::from_picks(picks, false))
}

/// Gaussian elimination with complete pivoting, specialised to SPSD input:
/// the pivot is the largest residual diagonal entry, so only the diagonal
/// and the `count` pivot columns are ever read (`n (count + 1)` accesses).
pub fn gecp_spsd<E: Entries + ?Sized>(w: &E, count: usize) -> Result<Selection> {
    let n = w.rows();
    if w.cols() != n {
        return Err(CurError::Dimension("SPSD input must be square".into()));
    }
    if count == 0 || count > n {
        return Err(CurError::InvalidArgument(format!("cannot pick {count} of {n} pivots")));
    }
    let mut diag: Vec<f64> = (0..n).map(|j| w.get(j, j)).collect();
    let max_diag = diag.iter().fold(0.0f64, |m, &d| m.max(d.abs()));
    let tol = zero_threshold(n, n, max_diag);
    if let Some(j) = diag.iter().position(|&d| d < -tol) {
        return Err(CurError::NotSpsd { index: j, pivot: diag[j] });
    }

    let mut picked = vec![false; n];
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = None;
        let mut best = f64::NEG_INFINITY;
        for j in (0..n).filter(|&j| !picked[j]) {
            if diag[j] < -10.0 * tol {
                return Err(CurError::NotSpsd { index: j, pivot: diag[j] });
            }
            if diag[j] > best {
                best = diag[j];
                p = Some(j);
            }
        }
        let Some(p) = p.filter(|_| best > tol) else {
            return Ok(Selection::from_picks(picks, true));
        };
        let scale = best.sqrt();
        let mut col: Vec<f64> = (0..n).map(|j| sym(w, j, p)).collect();
        for f in &factors {
            let fp = f[p];
            for (c, fj) in col.iter_mut().zip(f) {
                *c -= fj * fp;
            }
        }
        for (j, c) in col.iter_mut().enumerate() {
            *c /= scale;
            if !picked[j] {
                diag[j] -= *c * *c;
            }
        }
        picked[p] = true;
        diag[p] = 0.0;
        picks.push(p);
        factors.push(col);
    }
    Ok(Selection::from_picks(picks, false))
}

/// Volume metric of a principal submatrix: `v2` when its size equals `r`,
/// `v2,r` otherwise.
fn principal_metric(sub: &DenseMatrix, r: usize) -> Result<LogVolume> {
    if sub.rows() == r {
        volume(sub)
    } else {
        projective_volume(sub, r)
    }
}

/// Precomputed data for swapping one element out of a square (`|I| = r`)
/// generator: Cholesky factor of `W[I', I']` and the Schur complement of the
/// removed index. Each candidate then costs `O(r²)`.
struct SwapOut {
    keep: Vec<usize>,
    chol: DenseMatrix,
    base_schur: f64,
}

impl SwapOut {
    fn new<E: Entries + ?Sized>(w: &E, set: &IndexSet, out: usize) -> Option<SwapOut> {
        let keep: Vec<usize> = set.iter().filter(|&i| i != out).collect();
        let chol = if keep.is_empty() {
            DenseMatrix::zeros(0, 0)
        } else {
            cholesky(&principal(w, &keep))?
        };
        let base_schur = Self::schur(w, &keep, &chol, out);
        (base_schur > 0.0).then_some(SwapOut {
            keep,
            chol,
            base_schur,
        })
    }

    fn schur<E: Entries + ?Sized>(w: &E, keep: &[usize], chol: &DenseMatrix, j: usize) -> f64 {
        let b: Vec<f64> = keep.iter().map(|&i| sym(w, j, i)).collect();
        let y = forward_substitute(chol, &b);
        sym(w, j, j) - y.iter().map(|v| v * v).sum::<f64>()
    }

    /// `ln(det W[J,J] / det W[I,I])` for `J = I - {out} + {j}`.
    fn log_ratio<E: Entries + ?Sized>(&self, w: &E, j: usize) -> f64 {
        let s = Self::schur(w, &self.keep, &self.chol, j);
        if s <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (s / self.base_schur).ln()
        }
    }
}

/// `ln(vol(W[J,J]) / vol(W[I,I]))` for `J = I - {out} + {inn}`.
///
/// With `|I| = r` the ratio of determinants comes from Schur complements
/// against `W[I - {out}, I - {out}]`; if that route is numerically singular,
/// both volumes are recomputed from scratch. With `|I| > r` both
/// `r`-projective volumes are computed by small SVDs.
pub fn principal_volume_ratio<E: Entries + ?Sized>(
    w: &E,
    set: &IndexSet,
    out: usize,
    inn: usize,
    r: usize,
) -> Result<f64> {
    let swapped = set.swap(out, inn)?;
    swapped.check_bound(w.rows())?;
    if set.len() == r {
        if let Some(sw) = SwapOut::new(w, set, out) {
            return Ok(sw.log_ratio(w, inn));
        }
    }
    let base = principal_metric(&principal(w, set.as_slice()), r)?;
    let next = principal_metric(&principal(w, swapped.as_slice()), r)?;
    Ok(next.log_ratio(&base))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexUpdate {
    pub set: IndexSet,
    /// `(removed, inserted)` when an improving swap was found.
    pub swap: Option<(usize, usize)>,
    pub log_gain: f64,
}

/// One sweep of single-element swaps: scans removed indices ascending, then
/// inserted indices ascending, and returns the first swap whose volume ratio
/// exceeds `1 + eps`. Returning the input set certifies that the generator is
/// `(1+eps)`-locally maximal among principal submatrices.
pub fn index_update<E: Entries + ?Sized>(
    w: &E,
    set: &IndexSet,
    r: usize,
    eps: f64,
) -> Result<IndexUpdate> {
    let n = w.rows();
    set.check_bound(n)?;
    if r == 0 || r > set.len() {
        return Err(CurError::InvalidArgument(format!(
            "rank {r} must be in 1..={}",
            set.len()
        )));
    }
    let threshold = eps.ln_1p();
    let outside = set.complement(n);
    let found = |out: usize, inn: usize, gain: f64| -> Result<IndexUpdate> {
        Ok(IndexUpdate {
            set: set.swap(out, inn)?,
            swap: Some((out, inn)),
            log_gain: gain,
        })
    };

    if set.len() == r {
        if cholesky(&principal(w, set.as_slice())).is_none() {
            return Err(CurError::ZeroVolume);
        }
        for out in set.iter() {
            match SwapOut::new(w, set, out) {
                Some(sw) => {
                    for &inn in &outside {
                        let gain = sw.log_ratio(w, inn);
                        if gain > threshold {
                            return found(out, inn, gain);
                        }
                    }
                }
                None => {
                    for &inn in &outside {
                        let gain = principal_volume_ratio(w, set, out, inn, r)?;
                        if gain > threshold {
                            return found(out, inn, gain);
                        }
                    }
                }
            }
        }
    } else {
        let base = principal_metric(&principal(w, set.as_slice()), r)?;
        if base.is_zero {
            return Err(CurError::ZeroVolume);
        }
        for out in set.iter() {
            for &inn in &outside {
                let cand = set.swap(out, inn)?;
                let gain = principal_metric(&principal(w, cand.as_slice()), r)?.log_ratio(&base);
                if gain > threshold {
                    return found(out, inn, gain);
                }
            }
        }
    }
    Ok(IndexUpdate {
        set: set.clone(),
        swap: None,
        log_gain: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsdOutcome {
    pub set: IndexSet,
    /// GECP starting set.
    pub initial: Selection,
    /// Accepted swaps.
    pub updates: usize,
    /// Calls to [`index_update`], including the final certifying one.
    pub sweeps: usize,
    /// Rank actually used; smaller than requested only if GECP ran out of pivots.
    pub rank: usize,
    pub access_count: usize,
}

/// GECP start followed by index updates until a fixed point.
///
/// If GECP stops early (the matrix has rank below `K`) the shorter set is
/// kept and the rank is reduced to fit it.
pub fn spsd_main<E: Entries + ?Sized>(w: &E, cfg: &SpsdConfig) -> Result<SpsdOutcome> {
    let n = w.rows();
    if w.cols() != n {
        return Err(CurError::Dimension("SPSD input must be square".into()));
    }
    cfg.validate(n)?;
    let initial = gecp_spsd(w, cfg.gen_size)?;
    let mut set = initial.set.clone();
    let rank = cfg.rank.min(set.len());
    let mut updates = 0;
    let mut sweeps = 0;
    if rank > 0 {
        let budget = cfg.update_budget(n);
        loop {
            let step = index_update(w, &set, rank, cfg.eps)?;
            sweeps += 1;
            if step.swap.is_none() {
                break;
            }
            if updates == budget {
                return Err(CurError::UpdateBudgetExhausted {
                    limit: budget,
                    best: step.set,
                });
            }
            set = step.set;
            updates += 1;
        }
    }
    Ok(SpsdOutcome {
        set,
        initial,
        updates,
        sweeps,
        rank,
        access_count: w.access_count(),
    })
}

/// `C = W[:, I]`, `R = W[I, :]` (taken as `Cᵀ` by symmetry), and the nucleus
/// `W[I,I]⁻¹` when `|I| = r`, `(W[I,I])_r⁺` when `|I| > r`.
pub fn build_cur_spsd<E: Entries + ?Sized>(w: &E, set: &IndexSet, r: usize) -> Result<CurFactors> {
    let n = w.rows();
    set.check_bound(n)?;
    let k = set.len();
    if r == 0 || r > k {
        return Err(CurError::InvalidArgument(format!("rank {r} must be in 1..={k}")));
    }
    let idx = set.as_slice();
    let c = DenseMatrix::from_fn(n, k, |j, b| sym(w, j, idx[b]));
    let generator = c.select_rows(idx);
    let u = if k == r {
        if volume(&generator)?.is_zero {
            return Err(CurError::SingularGenerator);
        }
        Lu::new(&generator)?.solve(&DenseMatrix::identity(k))?
    } else {
        truncated_pseudo_inverse(&generator, r)?
    };
    let rmat = c.transpose();
    CurFactors::from_parts(set.clone(), set.clone(), c, u, rmat, r)
}

/// [`spsd_main`] followed by [`build_cur_spsd`].
pub fn spsd_cur<E: Entries + ?Sized>(w: &E, cfg: &SpsdConfig) -> Result<(SpsdOutcome, CurFactors)> {
    let outcome = spsd_main(w, cfg)?;
    if outcome.rank == 0 {
        return Err(CurError::ZeroVolume);
    }
    let cur = build_cur_spsd(w, &outcome.set, outcome.rank)?;
    Ok((outcome, cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::EntryOracle;
    use crate::cur::cheb_error;
    use crate::linalg::random_gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_spsd(n: usize, rank: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gaussian(n, rank, &mut rng);
        g.matmul(&g.transpose()).unwrap()
    }

    fn oracle(m: DenseMatrix) -> EntryOracle {
        EntryOracle::from_matrix(m)
    }

    #[test]
    fn greedy_examples() {
        let s = greedy_column_subset(&DenseMatrix::from_diag(&[2.0, 1.0]), 1).unwrap();
        assert_eq!(s.set.as_slice(), &[0]);
        let s = greedy_column_subset(&DenseMatrix::identity(3), 2).unwrap();
        assert_eq!(s.set.as_slice(), &[0, 1]);
        assert!(!s.exhausted);
        let ones = DenseMatrix::from_fn(3, 3, |_, _| 1.0);
        let s = greedy_column_subset(&ones, 2).unwrap();
        assert_eq!(s.picks, vec![0]);
        assert!(s.exhausted);
    }

    #[test]
    fn gecp_examples() {
        let s = gecp_spsd(&oracle(DenseMatrix::from_diag(&[5.0, 3.0, 1.0])), 2).unwrap();
        assert_eq!(s.set.as_slice(), &[0, 1]);
        let ones = oracle(DenseMatrix::from_fn(3, 3, |_, _| 1.0));
        let s = gecp_spsd(&ones, 2).unwrap();
        assert_eq!(s.picks, vec![0]);
        assert!(s.exhausted);
    }

    #[test]
    fn gecp_reads_only_diagonal_and_pivot_columns() {
        let w = oracle(random_spsd(40, 6, 5));
        gecp_spsd(&w, 3).unwrap();
        // diagonal + 3 pivot columns, each unordered pair once
        assert!(w.access_count() <= 40 + 3 * 40);
    }

    #[test]
    fn gecp_rejects_negative_diagonal() {
        let w = oracle(DenseMatrix::from_diag(&[1.0, -1.0, 2.0]));
        assert!(matches!(gecp_spsd(&w, 2), Err(CurError::NotSpsd { index: 1, .. })));
    }

    #[test]
    fn volume_ratio_examples() {
        let w = oracle(DenseMatrix::from_diag(&[1.0, 2.0]));
        let set = IndexSet::new(vec![0]).unwrap();
        let lr = principal_volume_ratio(&w, &set, 0, 1, 1).unwrap();
        assert!((lr - 2f64.ln()).abs() < 1e-14);
        assert!(principal_volume_ratio(&w, &set, 1, 0, 1).is_err());
    }

    #[test]
    fn volume_ratio_matches_recomputation() {
        let dense = random_spsd(6, 6, 9);
        let w = oracle(dense.clone());
        let set = IndexSet::new(vec![1, 3, 4]).unwrap();
        for (out, inn) in [(1, 0), (3, 5), (4, 2)] {
            let fast = principal_volume_ratio(&w, &set, out, inn, 3).unwrap();
            let next = set.swap(out, inn).unwrap();
            let slow = volume(&dense.select(next.as_slice(), next.as_slice()))
                .unwrap()
                .log_ratio(&volume(&dense.select(set.as_slice(), set.as_slice())).unwrap());
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
            let proj = principal_volume_ratio(&w, &set, out, inn, 2).unwrap();
            let slow2 = projective_volume(&dense.select(next.as_slice(), next.as_slice()), 2)
                .unwrap()
                .log_ratio(&projective_volume(&dense.select(set.as_slice(), set.as_slice()), 2).unwrap());
            assert!((proj - slow2).abs() < 1e-9);
        }
    }

    #[test]
    fn index_update_examples() {
        let w = oracle(DenseMatrix::from_diag(&[1.0, 2.0]));
        let up = index_update(&w, &IndexSet::new(vec![0]).unwrap(), 1, 0.5).unwrap();
        assert_eq!(up.set.as_slice(), &[1]);
        let w = oracle(DenseMatrix::from_diag(&[2.0, 1.0]));
        let up = index_update(&w, &IndexSet::new(vec![0]).unwrap(), 1, 0.5).unwrap();
        assert_eq!(up.set.as_slice(), &[0]);
        assert!(up.swap.is_none());
    }

    #[test]
    fn index_update_zero_base_is_error() {
        let w = oracle(DenseMatrix::from_diag(&[0.0, 1.0, 1.0]));
        let r = index_update(&w, &IndexSet::new(vec![0, 1]).unwrap(), 2, 0.1);
        assert_eq!(r, Err(CurError::ZeroVolume));
    }

    #[test]
    fn main_rank_one_picks_largest_coordinate() {
        let x = [0.3, -2.0, 1.0, 0.5];
        let w = oracle(DenseMatrix::from_fn(4, 4, |i, j| x[i] * x[j]));
        let out = spsd_main(&w, &SpsdConfig::new(1, 0.1)).unwrap();
        assert_eq!(out.set.as_slice(), &[1]);
        let cur = build_cur_spsd(&w, &out.set, 1).unwrap();
        assert!(cheb_error(&w, &cur) <= 1e-12 * 4.0);
    }

    #[test]
    fn main_diagonal_picks_leading_indices() {
        let w = oracle(DenseMatrix::from_diag(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]));
        let out = spsd_main(&w, &SpsdConfig::new(2, 0.1)).unwrap();
        assert_eq!(out.set.as_slice(), &[0, 1]);
        assert_eq!(out.updates, 0);
    }

    #[test]
    fn exact_reconstruction_rank_two() {
        let dense = random_spsd(4, 2, 13);
        let w = oracle(dense.clone());
        let (_, cur) = spsd_cur(&w, &SpsdConfig::new(2, 0.1)).unwrap();
        assert!(cheb_error(&w, &cur) <= 1e-10 * dense.max_abs());
    }

    #[test]
    fn early_gecp_stop_reduces_rank() {
        let dense = random_spsd(8, 2, 21);
        let w = oracle(dense.clone());
        let out = spsd_main(&w, &SpsdConfig::new(3, 0.1).with_gen_size(4)).unwrap();
        assert!(out.initial.exhausted);
        assert_eq!(out.rank, 2);
        let cur = build_cur_spsd(&w, &out.set, out.rank).unwrap();
        assert!(cheb_error(&w, &cur) <= 1e-9 * dense.max_abs());
    }

    #[test]
    fn update_budget_is_enforced() {
        let dense = random_spsd(30, 30, 2);
        let w = oracle(dense);
        let mut cfg = SpsdConfig::new(4, 1e-6);
        cfg.max_updates = Some(0);
        match spsd_main(&w, &cfg) {
            Ok(out) => assert_eq!(out.updates, 0),
            Err(CurError::UpdateBudgetExhausted { limit, best }) => {
                assert_eq!(limit, 0);
                assert_eq!(best.len(), 4);
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn singular_square_generator_is_rejected() {
        let w = oracle(DenseMatrix::from_diag(&[1.0, 0.0, 1.0]));
        let r = build_cur_spsd(&w, &IndexSet::new(vec![0, 1]).unwrap(), 2);
        assert!(matches!(r, Err(CurError::SingularGenerator)));
    }

    #[test]
    fn config_validation() {
        assert!(SpsdConfig::new(2, 0.1).validate(2).is_err());
        assert!(SpsdConfig::new(2, 0.0).validate(5).is_err());
        assert!(SpsdConfig::new(3, 0.1).with_gen_size(2).validate(5).is_err());
        assert_eq!(square_update_bound(1, 0.1), 0);
        assert_eq!(square_update_bound(2, 0.1), 8);
    }
}
