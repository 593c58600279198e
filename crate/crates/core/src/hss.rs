//! Hierarchically semiseparable (HSS) compression of an implicit matrix.
//!
//! The index range is split recursively into halves down to `leaf_size`.
//! Leaf diagonal blocks are stored densely; for every internal node the two
//! off-diagonal blocks between its children are compressed by cross
//! approximation into `F · H` with `F = C U` and `H = R`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::access::{BlockView, Entries, EntryOracle, IndexSet};
use crate::cross::{ca_iterations, CaConfig};
use crate::cur::CurFactors;
use crate::error::{CurError, Result};
use crate::linalg::{norms, singular_values, DenseMatrix};

/// Dense assembly is refused above this order.
pub const DENSE_LIMIT: usize = 4096;

/// Fresh cells sampled per rank probe, on top of already-read cells.
const PROBE_SAMPLES: usize = 8;

const POWER_ITERS: usize = 10;

/// A probe whose generator has `sigma_r < GENERATOR_CUTOFF * xi * sigma_1`
/// counts as exceeding the block's rank.
const GENERATOR_CUTOFF: f64 = 1e-2;

/// `1 / (x_i - y_j)`.
pub fn cauchy_oracle(x: Vec<f64>, y: Vec<f64>) -> Result<EntryOracle> {
    if x.iter().chain(&y).any(|v| !v.is_finite()) {
        return Err(CurError::InvalidArgument("Cauchy nodes must be finite".into()));
    }
    let mut xs = x.clone();
    let mut ys = y.clone();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (mut a, mut b) = (0, 0);
    while a < xs.len() && b < ys.len() {
        if xs[a] == ys[b] {
            return Err(CurError::InvalidArgument(format!("coincident Cauchy nodes at {}", xs[a])));
        }
        if xs[a] < ys[b] {
            a += 1;
        } else {
            b += 1;
        }
    }
    let (m, n) = (x.len(), y.len());
    Ok(EntryOracle::from_fn(m, n, move |i, j| 1.0 / (x[i] - y[j])))
}

/// `x_i = i + 1`, `y_j = j + 1.5`.
pub fn default_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    (
        (0..n).map(|i| i as f64 + 1.0).collect(),
        (0..n).map(|j| j as f64 + 1.5).collect(),
    )
}

/// Default nodes, each shifted by an independent uniform draw in `[-0.1, 0.1]`.
pub fn perturbed_nodes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let (mut x, mut y) = default_nodes(n);
    for v in x.iter_mut().chain(y.iter_mut()) {
        *v += rng.random_range(-0.1..=0.1);
    }
    (x, y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HssConfig {
    pub leaf_size: usize,
    /// Relative tolerance for each off-diagonal block.
    pub xi: f64,
    pub max_rank: usize,
    /// C-A loops per rank probe (two steps each).
    pub ca_loops: usize,
    pub seed: u64,
}

impl HssConfig {
    pub fn new(leaf_size: usize, xi: f64, max_rank: usize, ca_loops: usize, seed: u64) -> Self {
        HssConfig {
            leaf_size,
            xi,
            max_rank,
            ca_loops,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.leaf_size == 0 {
            return Err(CurError::InvalidArgument("leaf size must be positive".into()));
        }
        if self.xi.is_nan() || self.xi <= 0.0 {
            return Err(CurError::InvalidArgument("xi must be positive".into()));
        }
        if self.max_rank == 0 || self.ca_loops == 0 {
            return Err(CurError::InvalidArgument("max rank and loop count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LeafBlock {
    pub start: usize,
    pub dense: DenseMatrix,
}

/// Off-diagonal block `W[row0.., col0..] ≈ F H`.
#[derive(Debug, Clone)]
pub struct OffDiagonalBlock {
    /// Depth of the parent node; the root is level 1.
    pub level: usize,
    pub row0: usize,
    pub col0: usize,
    pub f: DenseMatrix,
    pub h: DenseMatrix,
    pub rank: usize,
    /// False when no rank up to `max_rank` met the tolerance.
    pub within_tolerance: bool,
}

impl OffDiagonalBlock {
    pub fn shape(&self) -> (usize, usize) {
        (self.f.rows(), self.h.cols())
    }
}

#[derive(Debug, Clone)]
pub struct HssTree {
    pub n: usize,
    pub leaf_size: usize,
    pub xi: f64,
    pub levels: usize,
    pub leaves: Vec<LeafBlock>,
    pub blocks: Vec<OffDiagonalBlock>,
    /// Distinct entries read during the build.
    pub access_count: usize,
}

/// Contiguous index ranges `(start, len)` of the leaves, left to right.
pub fn leaf_partition(n: usize, leaf_size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    split(0, n, leaf_size, &mut |s, l| out.push((s, l)), &mut |_, _, _, _| {}, 1);
    out
}

fn split(
    start: usize,
    len: usize,
    leaf: usize,
    on_leaf: &mut dyn FnMut(usize, usize),
    on_node: &mut dyn FnMut(usize, usize, usize, usize),
    level: usize,
) {
    if len <= leaf {
        on_leaf(start, len);
        return;
    }
    let half = len / 2;
    on_node(level, start, half, len - half);
    split(start, half, leaf, on_leaf, on_node, level + 1);
    split(start + half, len - half, leaf, on_leaf, on_node, level + 1);
}

impl HssTree {
    pub fn hss_rank(&self) -> usize {
        self.blocks.iter().map(|b| b.rank).max().unwrap_or(0)
    }

    /// `T v` together with the number of multiply-adds spent.
    pub fn matvec_counted(&self, v: &[f64]) -> (Vec<f64>, usize) {
        assert_eq!(v.len(), self.n, "vector length must equal the matrix order");
        let mut y = vec![0.0; self.n];
        let mut flops = 0;
        for leaf in &self.leaves {
            let s = leaf.dense.rows();
            let part = leaf.dense.matvec(&v[leaf.start..leaf.start + s]);
            for (t, p) in part.into_iter().enumerate() {
                y[leaf.start + t] += p;
            }
            flops += s * s;
        }
        for b in &self.blocks {
            let (h, w) = b.shape();
            if b.rank == 0 {
                continue;
            }
            let inner = b.h.matvec(&v[b.col0..b.col0 + w]);
            let part = b.f.matvec(&inner);
            for (t, p) in part.into_iter().enumerate() {
                y[b.row0 + t] += p;
            }
            flops += b.rank * (h + w);
        }
        (y, flops)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.matvec_counted(v).0
    }

    /// Dense assembly; refused above [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        if self.n > DENSE_LIMIT {
            return Err(CurError::DenseTooLarge {
                n: self.n,
                limit: DENSE_LIMIT,
            });
        }
        let mut out = DenseMatrix::zeros(self.n, self.n);
        for leaf in &self.leaves {
            let s = leaf.dense.rows();
            for i in 0..s {
                for j in 0..s {
                    out[(leaf.start + i, leaf.start + j)] = leaf.dense[(i, j)];
                }
            }
        }
        for b in &self.blocks {
            if b.rank == 0 {
                continue;
            }
            let prod = b.f.matmul(&b.h)?;
            let (h, w) = b.shape();
            for i in 0..h {
                for j in 0..w {
                    out[(b.row0 + i, b.col0 + j)] = prod[(i, j)];
                }
            }
        }
        Ok(out)
    }
}

/// Builds the HSS representation from entry reads only.
///
/// Each off-diagonal block gets the smallest rank whose cross approximation
/// passes the block test: doubling probes `1, 2, 4, ...` bracket the rank and
/// bisection finishes it. A probe passes when the estimated residual is at
/// most `xi` times the estimated spectral norm of the block; see
/// [`block_deviation`].
pub fn build_hss(w: &EntryOracle, cfg: &HssConfig) -> Result<HssTree> {
    cfg.validate()?;
    let n = w.rows();
    if w.cols() != n {
        return Err(CurError::Dimension("HSS input must be square".into()));
    }
    let mut leaves_idx = Vec::new();
    let mut nodes = Vec::new();
    let mut depth = 0;
    split(
        0,
        n,
        cfg.leaf_size,
        &mut |s, l| leaves_idx.push((s, l)),
        &mut |level, s, a, b| {
            depth = depth.max(level);
            nodes.push((level, s, a, b));
        },
        1,
    );

    let leaves: Vec<LeafBlock> = leaves_idx
        .iter()
        .map(|&(s, l)| LeafBlock {
            start: s,
            dense: w.fetch(&(s..s + l).collect::<Vec<_>>(), &(s..s + l).collect::<Vec<_>>()),
        })
        .collect();

    let mut specs = Vec::with_capacity(2 * nodes.len());
    for &(level, s, a, b) in &nodes {
        specs.push((level, s, s + a, a, b));
        specs.push((level, s + a, s, b, a));
    }
    let blocks = specs
        .par_iter()
        .enumerate()
        .map(|(idx, &(level, row0, col0, h, wd))| {
            let view = BlockView::new(w, row0, col0, h, wd);
            let seed = cfg.seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            compress_block(&view, level, cfg, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(HssTree {
        n,
        leaf_size: cfg.leaf_size,
        xi: cfg.xi,
        levels: depth,
        leaves,
        blocks,
        access_count: w.access_count(),
    })
}

struct Probe {
    cur: CurFactors,
    passes: bool,
}

fn compress_block(view: &BlockView<'_>, level: usize, cfg: &HssConfig, seed: u64) -> Result<OffDiagonalBlock> {
    let (h, wd) = (view.rows(), view.cols());
    let (row0, col0) = view.offset();
    let cap = cfg.max_rank.min(h).min(wd);
    // Cross of the last usable probe; later probes start from it so that
    // they mostly re-read cells already paid for.
    let mut warm: Option<(IndexSet, IndexSet)> = None;
    let mut probes: Vec<(usize, Option<Probe>)> = Vec::new();

    let run = |r: usize, warm: &mut Option<(IndexSet, IndexSet)>| -> Result<Option<Probe>> {
        let mut ca = CaConfig::new(r, 2 * cfg.ca_loops, 0.0, seed.wrapping_add(r as u64));
        ca.verify_samples = 0;
        ca.degenerate_retries = 1;
        if let Some((rows, cols)) = warm.as_ref() {
            ca.initial_rows = Some(resize_set(rows, r, h));
            ca.initial_cols = Some(resize_set(cols, r, wd));
        }
        let out = match ca_iterations(view, &ca) {
            Ok(out) => out,
            // Numerical rank below r: no probe at this rank or above can help.
            Err(CurError::DegenerateStrip { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let s = singular_values(&out.cur.generator())?;
        if s[r - 1] < GENERATOR_CUTOFF * cfg.xi * s[0] {
            // The generator is far more ill-conditioned than the tolerance
            // needs; its inverse would only amplify rounding error.
            return Ok(None);
        }
        *warm = Some((out.cur.rows().clone(), out.cur.cols().clone()));
        let (dev, norm) = block_deviation(view, &out.cur, seed)?;
        Ok(Some(Probe {
            passes: dev <= cfg.xi * norm,
            cur: out.cur,
        }))
    };

    // Doubling phase: find the first passing (or degenerate) rank.
    let mut lo = 1;
    let mut hi = None;
    let mut r = 1;
    while r <= cap {
        let p = run(r, &mut warm)?;
        let stop = p.as_ref().is_none_or(|p| p.passes);
        probes.push((r, p));
        if stop {
            hi = Some(r);
            break;
        }
        lo = r + 1;
        if r == cap {
            break;
        }
        r = (2 * r).min(cap);
    }
    // Bisection on [lo, hi): find the smallest passing rank.
    if let Some(mut top) = hi {
        while lo < top {
            let mid = (lo + top) / 2;
            let p = run(mid, &mut warm)?;
            let ok = p.as_ref().is_none_or(|p| p.passes);
            probes.push((mid, p));
            if ok {
                top = mid;
            } else {
                lo = mid + 1;
            }
        }
        hi = Some(top);
    }

    let passing = |r: usize| {
        probes
            .iter()
            .find(|(pr, p)| *pr == r && p.as_ref().is_some_and(|p| p.passes))
    };
    let pick = match hi {
        Some(top) => match passing(top) {
            Some((_, Some(p))) => Some((p.cur.clone(), true)),
            // Degenerate at `top`: keep the largest non-degenerate probe below it.
            _ => probes
                .iter()
                .filter(|(pr, p)| *pr < top && p.is_some())
                .max_by_key(|(pr, _)| *pr)
                .map(|(_, p)| (p.as_ref().expect("filtered").cur.clone(), true)),
        },
        None => probes
            .iter()
            .filter(|(_, p)| p.is_some())
            .max_by_key(|(pr, _)| *pr)
            .map(|(_, p)| (p.as_ref().expect("filtered").cur.clone(), false)),
    };

    Ok(match pick {
        Some((cur, ok)) => OffDiagonalBlock {
            level,
            row0,
            col0,
            f: cur.left_factor().clone(),
            h: cur.r().clone(),
            rank: cur.rank(),
            within_tolerance: ok,
        },
        None => OffDiagonalBlock {
            level,
            row0,
            col0,
            f: DenseMatrix::zeros(h, 0),
            h: DenseMatrix::zeros(0, wd),
            rank: 0,
            within_tolerance: true,
        },
    })
}

/// Warm-start indices of size `r` from a previous probe: truncate, or pad
/// with evenly spaced unused indices.
fn resize_set(prev: &IndexSet, r: usize, n: usize) -> IndexSet {
    let mut cols: Vec<usize> = prev.iter().take(r).collect();
    let mut t = 0;
    while cols.len() < r {
        let c = (t * n) / r % n;
        let c = (c..n).chain(0..c).find(|c| !cols.contains(c)).expect("r <= n");
        cols.push(c);
        t += 1;
    }
    IndexSet::new(cols).expect("distinct by construction")
}

/// `(deviation, norm)` for a probe: `norm` is a power-iteration estimate of
/// `‖C U R‖₂`; `deviation` is the root-mean-square residual over every
/// already-read block cell outside the cross plus a few fresh seeded
/// samples, scaled by `sqrt(h w)` to a Frobenius-norm proxy.
///
/// Both estimates use only cells already paid for (and the fresh samples),
/// so the test stays sublinear in the block size.
pub fn block_deviation(view: &BlockView<'_>, cur: &CurFactors, seed: u64) -> Result<(f64, f64)> {
    let (h, wd) = (view.rows(), view.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sq = 0.0;
    let mut count = 0usize;
    for _ in 0..PROBE_SAMPLES {
        let i = rng.random_range(0..h);
        let j = rng.random_range(0..wd);
        view.get(i, j);
    }
    for i in 0..h {
        if cur.rows().contains(i) {
            continue;
        }
        for j in (0..wd).filter(|&j| !cur.cols().contains(j)) {
            if view.was_accessed(i, j) {
                let e = view.peek(i, j) - cur.entry(i, j);
                sq += e * e;
                count += 1;
            }
        }
    }
    let dev = if count == 0 {
        0.0
    } else {
        (sq / count as f64 * (h * wd) as f64).sqrt()
    };
    Ok((dev, cur_spectral_estimate(cur, &mut rng)))
}

fn cur_spectral_estimate<R: Rng + ?Sized>(cur: &CurFactors, rng: &mut R) -> f64 {
    let n = cur.shape().1;
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut est = 0.0;
    for _ in 0..POWER_ITERS {
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let u = cur.apply(&v);
        est = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = cur.apply_transpose(&u);
    }
    est
}

#[derive(Debug, Clone, PartialEq)]
pub struct HssBenchConfig {
    pub sizes: Vec<usize>,
    pub max_ranks: Vec<usize>,
    pub loops: Vec<usize>,
    pub leaf_size: usize,
    pub xi: f64,
    pub trials: usize,
    pub seed: u64,
}

/// One configuration of the benchmark, with per-trial measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct HssBenchRow {
    pub input: String,
    pub n: usize,
    pub max_rank: usize,
    pub loops: usize,
    pub hss_rank: usize,
    /// `‖A − T‖₂ / ‖A‖₂` per trial.
    pub spectral: Vec<f64>,
    /// `‖A − T‖_C / ‖A‖_C` per trial.
    pub chebyshev: Vec<f64>,
    pub accesses: Vec<usize>,
}

pub const CSV_HEADER: &str = "input,loops,hss_rank,spec_mean,spec_std,cheb_mean,cheb_std,accesses,trials";

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

impl HssBenchRow {
    pub fn trials(&self) -> usize {
        self.spectral.len()
    }

    pub fn spectral_stats(&self) -> (f64, f64) {
        mean_std(&self.spectral)
    }

    pub fn chebyshev_stats(&self) -> (f64, f64) {
        mean_std(&self.chebyshev)
    }

    pub fn mean_accesses(&self) -> f64 {
        self.accesses.iter().sum::<usize>() as f64 / self.accesses.len() as f64
    }

    /// Mean accesses divided by `n²`.
    pub fn access_fraction(&self) -> f64 {
        self.mean_accesses() / (self.n * self.n) as f64
    }

    pub fn csv_line(&self) -> String {
        let (sm, ss) = self.spectral_stats();
        let (cm, cs) = self.chebyshev_stats();
        format!(
            "{},{},{},{:.3e},{:.3e},{:.3e},{:.3e},{},{}",
            self.input,
            self.loops,
            self.hss_rank,
            sm,
            ss,
            cm,
            cs,
            self.mean_accesses().round() as u64,
            self.trials()
        )
    }
}

/// Builds, per trial, a Cauchy matrix on freshly perturbed nodes (the same
/// nodes for every loop count and rank cap at a given size and trial),
/// compresses it, and measures relative errors against dense assembly.
pub fn hss_benchmark(cfg: &HssBenchConfig) -> Result<Vec<HssBenchRow>> {
    if cfg.trials == 0 {
        return Err(CurError::InvalidArgument("need at least one trial".into()));
    }
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n > DENSE_LIMIT) {
        return Err(CurError::DenseTooLarge { n, limit: DENSE_LIMIT });
    }
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for &max_rank in &cfg.max_ranks {
            for &loops in &cfg.loops {
                let mut row = HssBenchRow {
                    input: format!("cauchy-{n}"),
                    n,
                    max_rank,
                    loops,
                    hss_rank: 0,
                    spectral: Vec::new(),
                    chebyshev: Vec::new(),
                    accesses: Vec::new(),
                };
                for t in 0..cfg.trials {
                    let trial_seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add((n * 7919 + t) as u64);
                    let (x, y) = perturbed_nodes(n, &mut ChaCha8Rng::seed_from_u64(trial_seed));
                    let oracle = cauchy_oracle(x, y)?;
                    let tree = build_hss(
                        &oracle,
                        &HssConfig::new(cfg.leaf_size, cfg.xi, max_rank, loops, trial_seed),
                    )?;
                    let (spec, cheb) = relative_errors(&oracle, &tree)?;
                    row.hss_rank = row.hss_rank.max(tree.hss_rank());
                    row.spectral.push(spec);
                    row.chebyshev.push(cheb);
                    row.accesses.push(tree.access_count);
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// `(‖A − T‖₂ / ‖A‖₂, ‖A − T‖_C / ‖A‖_C)` by dense assembly.
pub fn relative_errors(w: &EntryOracle, tree: &HssTree) -> Result<(f64, f64)> {
    let a = w.to_dense();
    let e = a.sub(&tree.to_dense()?)?;
    let na = norms(&a)?;
    let ne = norms(&e)?;
    Ok((ne.spectral / na.spectral, ne.chebyshev / na.chebyshev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;

    #[test]
    fn cauchy_examples() {
        let o = cauchy_oracle(vec![1.0], vec![1.5]).unwrap();
        assert_eq!(o.peek(0, 0), -2.0);
        let o = cauchy_oracle(vec![1.0, 2.0], vec![1.5, 2.5]).unwrap();
        assert!((o.peek(0, 1) + 2.0 / 3.0).abs() < 1e-15);
        assert!(cauchy_oracle(vec![1.0, 2.0], vec![2.0]).is_err());
    }

    #[test]
    fn partition_covers_range() {
        let p = leaf_partition(100, 32);
        assert_eq!(p.iter().map(|x| x.1).sum::<usize>(), 100);
        assert!(p.iter().all(|x| x.1 <= 32));
        for w in p.windows(2) {
            assert_eq!(w[0].0 + w[0].1, w[1].0);
        }
    }

    #[test]
    fn block_diagonal_input_has_rank_zero_generators() {
        let n = 16;
        let o = EntryOracle::from_fn(n, n, |i, j| if i / 4 == j / 4 { (i + 2 * j + 1) as f64 } else { 0.0 });
        let tree = build_hss(&o, &HssConfig::new(4, 1e-8, 4, 1, 0)).unwrap();
        assert_eq!(tree.hss_rank(), 0);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let y = tree.matvec(&e1);
        let expect: Vec<f64> = (0..n).map(|i| o.peek(i, 0)).collect();
        assert_eq!(y, expect);
        assert_eq!(tree.matvec(&vec![0.0; n]), vec![0.0; n]);
    }

    #[test]
    fn exact_low_rank_blocks_reconstruct() {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_gaussian(n, 3, &mut rng).matmul(&random_gaussian(3, n, &mut rng)).unwrap();
        let o = EntryOracle::from_matrix(g.clone());
        let tree = build_hss(&o, &HssConfig::new(8, 1e-10, 6, 2, 1)).unwrap();
        assert!(tree.hss_rank() <= 3);
        for b in &tree.blocks {
            let (h, w) = b.shape();
            let exact = g.block(b.row0, b.col0, h, w);
            let approx = b.f.matmul(&b.h).unwrap();
            assert!(exact.sub(&approx).unwrap().max_abs() <= 1e-9 * exact.max_abs());
        }
        let v: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let dense = g.matvec(&v);
        let hss = tree.matvec(&v);
        let err: f64 = dense.iter().zip(&hss).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nrm: f64 = dense.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * nrm);
    }

    #[test]
    fn cauchy_block_rank_is_small() {
        let (x, y) = default_nodes(64);
        let o = cauchy_oracle(x, y).unwrap();
        let block = o.to_dense().block(0, 32, 32, 32);
        let s = crate::linalg::singular_values(&block).unwrap();
        assert!(s.iter().filter(|&&v| v > 1e-8 * s[0]).count() <= 12);
    }

    #[test]
    fn cauchy_tree_is_accurate_and_flops_are_bounded() {
        let n = 256;
        let (x, y) = perturbed_nodes(n, &mut ChaCha8Rng::seed_from_u64(1));
        let o = cauchy_oracle(x, y).unwrap();
        let tree = build_hss(&o, &HssConfig::new(32, 1e-8, 24, 5, 3)).unwrap();
        let (spec, cheb) = relative_errors(&o, &tree).unwrap();
        assert!(spec <= 1e-6 && cheb <= 1e-6, "spec {spec} cheb {cheb}");
        let a = o.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let (y, flops) = tree.matvec_counted(&v);
            let d = a.matvec(&v);
            let err: f64 = d.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let nrm: f64 = d.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err <= 1e-6 * nrm);
            assert!(flops <= 2 * n * (tree.leaf_size + 24 * tree.levels));
        }
    }

    #[test]
    fn benchmark_csv_schema() {
        let cfg = HssBenchConfig {
            sizes: vec![64],
            max_ranks: vec![12],
            loops: vec![1],
            leaf_size: 16,
            xi: 1e-8,
            trials: 2,
            seed: 0,
        };
        let rows = hss_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let line = rows[0].csv_line();
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        assert!(line.starts_with("cauchy-64,1,"));
        assert!(line.ends_with(",2"));
        let big = HssBenchConfig { sizes: vec![5000], ..cfg };
        assert!(matches!(hss_benchmark(&big), Err(CurError::DenseTooLarge { .. })));
    }
}
