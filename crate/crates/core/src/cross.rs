//! Cross approximation: alternating row/column maximal-volume selection on
//! strips of an implicit matrix, with sampled error verification.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::access::{Entries, IndexSet};
use crate::cur::CurFactors;
use crate::error::{CurError, Result};
use crate::linalg::{
    col_piv_qr, numerical_rank, projective_volume, zero_threshold, DenseMatrix, LogVolume, Lu,
};

/// A swap is accepted only if it grows the volume by more than this factor minus one.
pub const SWAP_TOL: f64 = 1e-3;

/// Relative singular-value cutoff used by [`projective_to_volume`] to decide the rank.
pub const RANK_TOL: f64 = 1e-10;

const MAX_SWAPS: usize = 10_000;

/// Result of a maximal-volume column selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnChoice {
    pub set: IndexSet,
    /// `r`-projective volume of the selected columns.
    pub log_volume: LogVolume,
    /// Largest volume ratio any single swap could still achieve (`>= 1`).
    pub local_factor: f64,
    /// Upper bound on `max over all column sets / found` within the strip,
    /// available when the strip has exactly `r` rows and `r` columns are chosen.
    pub global_bound: Option<f64>,
    pub swaps: usize,
}

/// Chooses `count` columns of `strip` whose `r`-projective volume is locally
/// maximal: column-pivoted QR gives the start, then single-column swaps are
/// taken while one improves the volume by more than `1 + SWAP_TOL`.
///
/// `warm` replaces the QR start when its volume is at least as large, which
/// makes repeated selection on nested strips monotone.
pub fn select_columns(
    strip: &DenseMatrix,
    count: usize,
    r: usize,
    warm: Option<&IndexSet>,
) -> Result<ColumnChoice> {
    let (p, q) = strip.shape();
    if r == 0 || r > p || r > count || count > q {
        return Err(CurError::InvalidArgument(format!(
            "cannot pick {count} of {q} columns at rank {r} from {p} rows"
        )));
    }
    let metric = |cols: &[usize]| projective_volume(&strip.select_cols(cols), r);

    let qr = col_piv_qr(strip);
    let lead = qr.r[(0, 0)].abs();
    if lead == 0.0 || qr.r[(r - 1, r - 1)].abs() <= zero_threshold(p, q, lead) {
        return Err(CurError::DegenerateStrip { rank: r });
    }
    let mut cols: Vec<usize> = qr.perm[..count].to_vec();
    let mut vol = metric(&cols)?;
    if let Some(w) = warm.filter(|w| w.len() == count && w.max().is_some_and(|m| m < q)) {
        let wv = metric(w.as_slice())?;
        if wv >= vol {
            cols = w.as_slice().to_vec();
            vol = wv;
        }
    }
    if vol.is_zero {
        return Err(CurError::DegenerateStrip { rank: r });
    }

    let (local_factor, global_bound, swaps) = if p == r && count == r {
        square_swaps(strip, &mut cols)?
    } else {
        let (f, s) = general_swaps(strip, &mut cols, &mut vol, metric)?;
        (f, None, s)
    };
    let set = IndexSet::new(cols)?;
    let log_volume = projective_volume(&strip.select_cols(set.as_slice()), r)?;
    Ok(ColumnChoice {
        set,
        log_volume,
        local_factor,
        global_bound,
        swaps,
    })
}

/// Classic maxvol on an `r x q` strip: with `B` the chosen columns,
/// `Z = B⁻¹ M` holds every single-swap determinant ratio.
fn square_swaps(strip: &DenseMatrix, cols: &mut [usize]) -> Result<(f64, Option<f64>, usize)> {
    let r = strip.rows();
    let limit = 1.0 + SWAP_TOL;
    let mut swaps = 0;
    loop {
        let lu = Lu::new(&strip.select_cols(cols))?;
        let z = lu
            .solve(strip)
            .map_err(|_| CurError::DegenerateStrip { rank: r })?;
        let mut best = (0.0f64, 0, 0);
        for a in 0..r {
            for (j, &v) in z.row(a).iter().enumerate() {
                if v.abs() > best.0 {
                    best = (v.abs(), a, j);
                }
            }
        }
        if best.0 > limit && swaps < MAX_SWAPS {
            cols[best.1] = best.2;
            swaps += 1;
            continue;
        }
        // Hadamard: |det Z[:, S]| <= product of the column norms of Z[:, S].
        let mut norms: Vec<f64> = (0..z.cols())
            .map(|j| (0..r).map(|a| z[(a, j)] * z[(a, j)]).sum::<f64>().sqrt())
            .collect();
        norms.sort_by(|a, b| b.total_cmp(a));
        let bound: f64 = norms[..r].iter().product();
        return Ok((best.0.max(1.0), Some(bound.max(1.0)), swaps));
    }
}

fn general_swaps(
    strip: &DenseMatrix,
    cols: &mut [usize],
    vol: &mut LogVolume,
    metric: impl Fn(&[usize]) -> Result<LogVolume>,
) -> Result<(f64, usize)> {
    let q = strip.cols();
    let threshold = SWAP_TOL.ln_1p();
    let mut swaps = 0;
    loop {
        let inside: Vec<bool> = (0..q).map(|j| cols.contains(&j)).collect();
        let mut best = (f64::NEG_INFINITY, 0, 0, LogVolume::ZERO);
        let mut trial = cols.to_vec();
        for a in 0..cols.len() {
            for j in (0..q).filter(|&j| !inside[j]) {
                trial[a] = j;
                let v = metric(&trial)?;
                let gain = v.log_ratio(vol);
                if gain > best.0 {
                    best = (gain, a, j, v);
                }
            }
            trial[a] = cols[a];
        }
        if best.0 > threshold && swaps < MAX_SWAPS {
            cols[best.1] = best.2;
            *vol = best.3;
            swaps += 1;
            continue;
        }
        return Ok((best.0.max(0.0).exp(), swaps));
    }
}

/// Rows chosen by maximal volume: [`select_columns`] on the transpose.
pub fn select_rows(
    strip: &DenseMatrix,
    count: usize,
    r: usize,
    warm: Option<&IndexSet>,
) -> Result<ColumnChoice> {
    select_columns(&strip.transpose(), count, r, warm)
}

/// A `k x l` submatrix of a strip, with the quality certificate of the
/// selection that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmatrixChoice {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub log_volume: LogVolume,
    pub local_factor: f64,
    pub global_bound: Option<f64>,
}

/// Locally maximal `r`-projective-volume `k x l` submatrix of a `p x q` strip.
///
/// When `p = k` the columns are chosen; when `q = l` the rows are. Otherwise
/// columns are chosen against all `p` rows first and rows are then chosen
/// inside those columns.
pub fn maxvol_submatrix(m: &DenseMatrix, k: usize, l: usize, r: usize) -> Result<SubmatrixChoice> {
    let (p, q) = m.shape();
    if r == 0 || r > k || r > l || k > p || l > q {
        return Err(CurError::InvalidArgument(format!(
            "need r <= k <= p and r <= l <= q, got r={r}, k={k}, l={l}, p={p}, q={q}"
        )));
    }
    if p == k && q == l {
        return Ok(SubmatrixChoice {
            rows: IndexSet::range(p),
            cols: IndexSet::range(q),
            log_volume: projective_volume(m, r)?,
            local_factor: 1.0,
            global_bound: Some(1.0),
        });
    }
    if q == l {
        let c = select_rows(m, k, r, None)?;
        return Ok(SubmatrixChoice {
            rows: c.set,
            cols: IndexSet::range(q),
            log_volume: c.log_volume,
            local_factor: c.local_factor,
            global_bound: c.global_bound,
        });
    }
    let c = select_columns(m, l, r, None)?;
    if p == k {
        return Ok(SubmatrixChoice {
            rows: IndexSet::range(p),
            cols: c.set,
            log_volume: c.log_volume,
            local_factor: c.local_factor,
            global_bound: c.global_bound,
        });
    }
    let inner = select_rows(&m.select_cols(c.set.as_slice()), k, r, None)?;
    Ok(SubmatrixChoice {
        rows: inner.set,
        cols: c.set,
        log_volume: inner.log_volume,
        local_factor: inner.local_factor,
        global_bound: inner.global_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Rows,
    Cols,
}

/// Selects `l` columns (or rows) of a rank-`r` matrix with locally maximal
/// `r`-projective volume, working on the `r x n` leading block of its
/// column-pivoted QR factor. Orthogonal row transformations leave that
/// block's volumes, and hence the result, unchanged.
pub fn projective_to_volume(
    w: &DenseMatrix,
    r: usize,
    l: usize,
    orientation: Orientation,
) -> Result<IndexSet> {
    let m = match orientation {
        Orientation::Cols => w.clone(),
        Orientation::Rows => w.transpose(),
    };
    if r == 0 || r > l || l > m.cols() {
        return Err(CurError::InvalidArgument(format!(
            "need 1 <= r <= l <= {}, got r={r}, l={l}",
            m.cols()
        )));
    }
    let found = numerical_rank(&m, RANK_TOL)?;
    if found != r {
        return Err(CurError::RankMismatch { expected: r, found });
    }
    let rows: Vec<usize> = (0..r).collect();
    let lead = col_piv_qr(&m).r_original_order().select_rows(&rows);
    Ok(select_columns(&lead, l, r, None)?.set)
}

/// Sampled residual of a CUR approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    /// Largest sampled `|w_ij - (CUR)_ij|`.
    pub chebyshev: f64,
    /// Root mean square of the samples scaled by `sqrt(m n)`.
    pub frobenius: f64,
}

/// Estimates `‖W − CUR‖` from `samples` uniformly drawn cells (with
/// replacement). Each sample is one counted read of `W`.
pub fn verify_error<E: Entries + ?Sized>(
    w: &E,
    cur: &CurFactors,
    samples: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if samples == 0 {
        return Err(CurError::InvalidArgument("need at least one sample".into()));
    }
    let (m, n) = (w.rows(), w.cols());
    if cur.shape() != (m, n) {
        return Err(CurError::Dimension("CUR shape does not match input".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut sq = 0.0;
    for _ in 0..samples {
        let i = rng.random_range(0..m);
        let j = rng.random_range(0..n);
        let e = (w.get(i, j) - cur.entry(i, j)).abs();
        worst = worst.max(e);
        sq += e * e;
    }
    Ok(ErrorEstimate {
        chebyshev: worst,
        frobenius: (sq / samples as f64 * (m * n) as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaConfig {
    pub rank: usize,
    pub k: usize,
    pub l: usize,
    /// Vertical strip height; each horizontal strip is `W[I, :]` with `|I| = k`, so `p = k`.
    pub p: usize,
    /// Horizontal strip width; each vertical strip is `W[:, J]` with `|J| = l`, so `q = l`.
    pub q: usize,
    /// Number of C-A steps (a loop is one vertical plus one horizontal step).
    pub max_iters: usize,
    pub tau: f64,
    pub seed: u64,
    /// Cells sampled by [`verify_error`] after each step; 0 skips verification.
    pub verify_samples: usize,
    /// Initial columns; drawn from `seed` when absent.
    pub initial_cols: Option<IndexSet>,
    /// Initial rows, used as the starting point of the first vertical step.
    pub initial_rows: Option<IndexSet>,
    /// Fresh initial column draws allowed after a degenerate strip.
    pub degenerate_retries: usize,
}

impl CaConfig {
    /// `k = l = p = q = rank`, 100 verification samples, 3 retries.
    pub fn new(rank: usize, max_iters: usize, tau: f64, seed: u64) -> Self {
        CaConfig {
            rank,
            k: rank,
            l: rank,
            p: rank,
            q: rank,
            max_iters,
            tau,
            seed,
            verify_samples: 100,
            initial_cols: None,
            initial_rows: None,
            degenerate_retries: 3,
        }
    }

    pub fn with_generator(mut self, k: usize, l: usize) -> Self {
        self.k = k;
        self.l = l;
        self.p = k;
        self.q = l;
        self
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        let fail = |msg: String| Err(CurError::InvalidArgument(msg));
        if self.rank == 0 || self.rank > self.k || self.rank > self.l {
            return fail(format!("need 1 <= r <= min(k, l), got r={}, k={}, l={}", self.rank, self.k, self.l));
        }
        if self.k > m || self.l > n {
            return fail(format!("generator {}x{} does not fit {m}x{n}", self.k, self.l));
        }
        if self.p != self.k || self.q != self.l {
            return fail(format!(
                "strips are W[I,:] and W[:,J], so p must equal k and q must equal l (got p={}, q={})",
                self.p, self.q
            ));
        }
        if self.max_iters == 0 {
            return fail("need at least one step".into());
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return fail("tau must be non-negative".into());
        }
        if let Some(j) = &self.initial_cols {
            if j.len() != self.l {
                return fail(format!("{} initial columns given, l={}", j.len(), self.l));
            }
            j.check_bound(n)?;
        }
        if let Some(i) = &self.initial_rows {
            if i.len() != self.k {
                return fail(format!("{} initial rows given, k={}", i.len(), self.k));
            }
            i.check_bound(m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    Converged,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Rows chosen from `W[:, J]`.
    Vertical,
    /// Columns chosen from `W[I, :]`.
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaStep {
    pub kind: StepKind,
    pub rows: IndexSet,
    pub cols: IndexSet,
    /// `r`-projective volume of the generator after this step.
    pub log_volume: LogVolume,
    pub local_factor: f64,
    pub global_bound: Option<f64>,
    pub estimate: Option<ErrorEstimate>,
}

#[derive(Debug, Clone)]
pub struct CaOutcome {
    pub status: CaStatus,
    pub cur: CurFactors,
    pub steps_executed: usize,
    pub loops_executed: usize,
    /// Estimate after the last step; `None` when verification is disabled.
    pub estimated_error: Option<ErrorEstimate>,
    pub access_count: usize,
    pub steps: Vec<CaStep>,
    /// Initial column draws discarded because of degenerate strips.
    pub restarts: usize,
}

/// Alternating C-A steps. Odd steps are vertical, even steps horizontal;
/// the canonical CUR on the current generator is verified after every step
/// and returned as soon as the estimate is within `tau`.
pub fn ca_iterations<E: Entries + ?Sized>(w: &E, cfg: &CaConfig) -> Result<CaOutcome> {
    let (m, n) = (w.rows(), w.cols());
    cfg.validate(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut attempt = 0;
    loop {
        let start = match (&cfg.initial_cols, attempt) {
            (Some(j), 0) => j.clone(),
            _ => IndexSet::new(sample(&mut rng, n, cfg.l).into_vec())?,
        };
        match run_steps(w, cfg, start) {
            Err(CurError::DegenerateStrip { .. }) if attempt < cfg.degenerate_retries => attempt += 1,
            Ok(mut out) => {
                out.restarts = attempt;
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_steps<E: Entries + ?Sized>(w: &E, cfg: &CaConfig, start: IndexSet) -> Result<CaOutcome> {
    let r = cfg.rank;
    let mut cols = start;
    let mut rows: Option<IndexSet> = cfg.initial_rows.clone();
    let mut strip_c = w.fetch_cols(cols.as_slice());
    let mut strip_r = DenseMatrix::zeros(0, 0);
    let mut steps = Vec::with_capacity(cfg.max_iters);
    let mut last = None;
    for step in 1..=cfg.max_iters {
        let (kind, choice) = if step % 2 == 1 {
            let choice = select_rows(&strip_c, cfg.k, r, rows.as_ref())?;
            rows = Some(choice.set.clone());
            strip_r = w.fetch_rows(choice.set.as_slice());
            (StepKind::Vertical, choice)
        } else {
            let choice = select_columns(&strip_r, cfg.l, r, Some(&cols))?;
            cols = choice.set.clone();
            strip_c = w.fetch_cols(cols.as_slice());
            (StepKind::Horizontal, choice)
        };
        let row_set = rows.clone().expect("set by the first (vertical) step");
        let cur = CurFactors::canonical(row_set.clone(), cols.clone(), strip_c.clone(), strip_r.clone(), r)?;
        let generator = cur.generator();
        let estimate = if cfg.verify_samples > 0 {
            Some(verify_error(w, &cur, cfg.verify_samples, cfg.seed.wrapping_add(step as u64))?)
        } else {
            None
        };
        steps.push(CaStep {
            kind,
            rows: row_set,
            cols: cols.clone(),
            log_volume: projective_volume(&generator, r)?,
            local_factor: choice.local_factor,
            global_bound: choice.global_bound,
            estimate,
        });
        let done = estimate.is_some_and(|e| e.chebyshev <= cfg.tau);
        last = Some(cur);
        if done {
            break;
        }
    }
    let steps_executed = steps.len();
    let estimated_error = steps.last().and_then(|s| s.estimate);
    let status = if estimated_error.is_some_and(|e| e.chebyshev <= cfg.tau) {
        CaStatus::Converged
    } else {
        CaStatus::Failure
    };
    Ok(CaOutcome {
        status,
        cur: last.expect("at least one step"),
        steps_executed,
        loops_executed: steps_executed.div_ceil(2),
        estimated_error,
        access_count: w.access_count(),
        steps,
        restarts: 0,
    })
}
