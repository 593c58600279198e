//! Seeded property checks for the volume, norm and pseudo-inverse facts the
//! algorithms rely on.
//!
//! Each check maps one random instance to a margin: non-negative means the
//! claim held with the stated slack already applied. The suite keeps the
//! worst margin per check and the trial seed that produced it.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{
    pseudo_inverse, random_gaussian, random_orthonormal, singular_values, truncated_pseudo_inverse,
    DenseMatrix,
};

/// Slack on log-space inequalities.
pub const LOG_SLACK: f64 = 1e-9;
/// Slack on log-space equalities.
pub const LOG_EQ_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// A proved statement: any negative margin is a bug.
    Theorem,
    /// A statement printed in a form that is only true to first order; a
    /// negative margin is expected on some inputs and does not fail the suite.
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub kind: CheckKind,
    pub trials: usize,
    pub violations: usize,
    pub worst_seed: u64,
    pub worst_margin: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed(), self.kind) {
            (true, _) => "PASS",
            (false, CheckKind::Theorem) => "FAIL",
            (false, CheckKind::FirstOrder) => "NOTE",
        };
        write!(
            f,
            "{status} {} seed={} margin={:.3e} violations={}/{}",
            self.name, self.worst_seed, self.worst_margin, self.violations, self.trials
        )
    }
}

/// Pass/fail ledger of one suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremLedger {
    pub checks: Vec<CheckResult>,
}

impl TheoremLedger {
    /// Every proved statement held on every trial.
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Theorem)
            .all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks
            .iter()
            .filter(|c| c.kind == CheckKind::Theorem && !c.passed())
    }
}

impl fmt::Display for TheoremLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

type Check = fn(&mut ChaCha8Rng) -> f64;

const CHECKS: &[(&str, CheckKind, Check)] = &[
    ("singular values move by at most the perturbation norm", CheckKind::Theorem, weyl),
    ("perturbed projective volume ratio, lower bounds", CheckKind::Theorem, perturbation_lower),
    ("perturbed projective volume ratio, upper bound in unperturbed singular values", CheckKind::Theorem, perturbation_upper_unperturbed),
    ("perturbed projective volume ratio, upper bound in perturbed singular values", CheckKind::FirstOrder, perturbation_upper_perturbed),
    ("product volume equals factor volumes at full inner dimension", CheckKind::Theorem, product_full_inner),
    ("product volume vanishes below full inner dimension", CheckKind::Theorem, product_thin_inner),
    ("product projective volume at most factor projective volumes", CheckKind::Theorem, product_projective),
    ("square product volume at most factor volumes", CheckKind::Theorem, product_square),
    ("orthonormal factors with zero product", CheckKind::Theorem, orthonormal_zero_product),
    ("row selector times singular diagonal", CheckKind::Theorem, selector_times_singular),
    ("pseudo-inverse of a full-rank triple product", CheckKind::Theorem, pinv_triple_product),
    ("SPSD cross minor at most geometric mean of principal minors", CheckKind::Theorem, spsd_cross_minor),
    ("SPSD cross projective volume at most larger principal one", CheckKind::Theorem, spsd_cross_projective),
    ("singular values of a matrix and its pseudo-inverse are reciprocal", CheckKind::Theorem, pinv_reciprocal),
    ("volume ratios are invariant under orthogonal row mixing", CheckKind::Theorem, orthogonal_invariance),
    ("Hadamard bound", CheckKind::Theorem, hadamard),
    ("norm chain Chebyshev, spectral, Frobenius", CheckKind::Theorem, norm_chain),
];

/// Runs every check on `trials` instances seeded `seed, seed + 1, ...`.
pub fn theorem_suite(seed: u64, trials: usize) -> TheoremLedger {
    let trials = trials.max(1);
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(stream, &(name, kind, check))| {
            let mut worst = (f64::INFINITY, seed);
            let mut violations = 0;
            for t in 0..trials as u64 {
                let s = seed.wrapping_add(t);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                rng.set_stream(stream as u64);
                let m = check(&mut rng);
                if m.is_nan() || m < 0.0 {
                    violations += 1;
                }
                if m.is_nan() || m < worst.0 {
                    worst = (m, s);
                }
            }
            CheckResult {
                name,
                kind,
                trials,
                violations,
                worst_seed: worst.1,
                worst_margin: worst.0,
            }
        })
        .collect();
    TheoremLedger { checks }
}

fn sv(m: &DenseMatrix) -> Vec<f64> {
    singular_values(m).expect("small matrices converge")
}

fn log_top(s: &[f64], r: usize) -> f64 {
    s[..r].iter().map(|v| v.ln()).sum()
}

fn dim(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

fn rank_r(rng: &mut ChaCha8Rng, k: usize, l: usize, r: usize) -> DenseMatrix {
    random_gaussian(k, r, rng).matmul(&random_gaussian(r, l, rng)).expect("conforming")
}

/// Rank-`r` matrix `W'` and a perturbation `E`, half the time aligned with
/// the top singular pair of `W'` (the worst case for upper bounds).
fn perturbed_pair(rng: &mut ChaCha8Rng) -> (DenseMatrix, DenseMatrix, usize, f64) {
    let k = dim(rng, 2, 7);
    let l = dim(rng, 2, 7);
    let r = dim(rng, 1, k.min(l));
    let w0 = rank_r(rng, k, l, r);
    let s0 = sv(&w0);
    let eps = rng.random_range(0.01..0.4) * s0[r - 1];
    let e = if rng.random_bool(0.5) {
        let svd = crate::linalg::svd(&w0).expect("converges");
        DenseMatrix::from_fn(k, l, |i, j| eps * svd.left[(i, 0)] * svd.right[(j, 0)])
    } else {
        let g = random_gaussian(k, l, rng);
        g.scale(eps / sv(&g)[0])
    };
    (w0, e, r, eps)
}

fn weyl(rng: &mut ChaCha8Rng) -> f64 {
    let (w0, e, _, _) = perturbed_pair(rng);
    let w = w0.add(&e).expect("same shape");
    let (s0, s, en) = (sv(&w0), sv(&w), sv(&e)[0]);
    let scale = s0[0];
    s0.iter()
        .zip(&s)
        .map(|(a, b)| (en - (a - b).abs()) / scale + 1e-12)
        .fold(f64::INFINITY, f64::min)
}

/// `(1 - ε/σ_r(W))^r ≤ Π(1 - ε/σ_j(W)) ≤ v2,r(W) / v2,r(W')`.
fn perturbation_lower(rng: &mut ChaCha8Rng) -> f64 {
    let (w0, e, r, eps) = perturbed_pair(rng);
    let w = w0.add(&e).expect("same shape");
    let (s0, s) = (sv(&w0), sv(&w));
    let ratio = log_top(&s, r) - log_top(&s0, r);
    let inner: f64 = s[..r].iter().map(|v| (-eps / v).ln_1p()).sum();
    let outer = r as f64 * (-eps / s[r - 1]).ln_1p();
    (inner - outer + LOG_SLACK).min(ratio - inner + LOG_SLACK)
}

/// `v2,r(W) / v2,r(W') ≤ Π(1 + ε/σ_j(W')) ≤ (1 + ε/σ_r(W'))^r`.
fn perturbation_upper_unperturbed(rng: &mut ChaCha8Rng) -> f64 {
    let (w0, e, r, eps) = perturbed_pair(rng);
    let w = w0.add(&e).expect("same shape");
    let (s0, s) = (sv(&w0), sv(&w));
    let ratio = log_top(&s, r) - log_top(&s0, r);
    let inner: f64 = s0[..r].iter().map(|v| (eps / v).ln_1p()).sum();
    let outer = r as f64 * (eps / s0[r - 1]).ln_1p();
    (inner - ratio + LOG_SLACK).min(outer - inner + LOG_SLACK)
}

/// `v2,r(W) / v2,r(W') ≤ Π(1 + ε/σ_j(W))`: holds to first order in `ε`
/// only; `W' = 1, E = ε` already breaks it.
fn perturbation_upper_perturbed(rng: &mut ChaCha8Rng) -> f64 {
    let (w0, e, r, eps) = perturbed_pair(rng);
    let w = w0.add(&e).expect("same shape");
    let (s0, s) = (sv(&w0), sv(&w));
    let ratio = log_top(&s, r) - log_top(&s0, r);
    let inner: f64 = s[..r].iter().map(|v| (eps / v).ln_1p()).sum();
    inner - ratio + LOG_SLACK
}

fn product_full_inner(rng: &mut ChaCha8Rng) -> f64 {
    let m = dim(rng, 1, 6);
    let n = dim(rng, 1, 6);
    let q = m.min(n);
    let g = random_gaussian(m, q, rng);
    let h = random_gaussian(q, n, rng);
    let w = g.matmul(&h).expect("conforming");
    let (sw, sg, sh) = (sv(&w), sv(&g), sv(&h));
    let lhs = log_top(&sw, q);
    let rhs = log_top(&sg, q) + log_top(&sh, q);
    LOG_EQ_TOL * (1.0 + rhs.abs()) - (lhs - rhs).abs()
}

fn product_thin_inner(rng: &mut ChaCha8Rng) -> f64 {
    let m = dim(rng, 2, 7);
    let n = dim(rng, 2, 7);
    let q = dim(rng, 1, m.min(n) - 1);
    let w = random_gaussian(m, q, rng).matmul(&random_gaussian(q, n, rng)).expect("conforming");
    let s = sv(&w);
    1e-12 - s[m.min(n) - 1] / s[0]
}

fn product_projective(rng: &mut ChaCha8Rng) -> f64 {
    let (m, q, n) = (dim(rng, 1, 6), dim(rng, 1, 6), dim(rng, 1, 6));
    let r = dim(rng, 1, m.min(q).min(n));
    let g = random_gaussian(m, q, rng);
    let h = random_gaussian(q, n, rng);
    let w = g.matmul(&h).expect("conforming");
    log_top(&sv(&g), r) + log_top(&sv(&h), r) - log_top(&sv(&w), r) + LOG_SLACK
}

fn product_square(rng: &mut ChaCha8Rng) -> f64 {
    let n = dim(rng, 1, 5);
    let q = dim(rng, n, 7);
    let g = random_gaussian(n, q, rng);
    let h = random_gaussian(q, n, rng);
    let w = g.matmul(&h).expect("conforming");
    log_top(&sv(&g), n) + log_top(&sv(&h), n) - log_top(&sv(&w), n) + LOG_SLACK
}

/// `G` has orthonormal rows, `H` orthonormal columns, `G H = O`.
fn orthonormal_zero_product(rng: &mut ChaCha8Rng) -> f64 {
    let q = dim(rng, 2, 7);
    let a = dim(rng, 1, q - 1);
    let b = dim(rng, 1, q - a);
    let o = random_orthonormal(q, q, rng);
    let g = DenseMatrix::from_fn(a, q, |i, j| o[(j, i)]);
    let h = DenseMatrix::from_fn(q, b, |i, j| o[(i, a + j)]);
    let gh = g.matmul(&h).expect("conforming");
    let unit = |m: &DenseMatrix| sv(m).iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    (1e-12 - unit(&g)).min(1e-12 - unit(&h)).min(1e-12 - sv(&gh)[0])
}

/// `G = (1 | 0)`, `H = diag(1, 0)`: `v2(G) = v2(GH) = 1` and `v2(H) = 0`.
fn selector_times_singular(_: &mut ChaCha8Rng) -> f64 {
    let g = DenseMatrix::from_rows(&[vec![1.0, 0.0]]);
    let h = DenseMatrix::from_diag(&[1.0, 0.0]);
    let gh = g.matmul(&h).expect("conforming");
    let vg: f64 = sv(&g).iter().product();
    let vh: f64 = sv(&h).iter().product();
    let vgh: f64 = sv(&gh).iter().product();
    if vg == 1.0 && vgh == 1.0 && vh == 0.0 {
        0.0
    } else {
        -1.0
    }
}

/// `‖(G Σ H)⁺‖ ≤ ‖G⁺‖ ‖Σ⁺‖ ‖H⁺‖` for full-rank `k x r`, `r x r`, `r x l`.
fn pinv_triple_product(rng: &mut ChaCha8Rng) -> f64 {
    let k = dim(rng, 1, 6);
    let l = dim(rng, 1, 6);
    let r = dim(rng, 1, k.min(l));
    let g = random_gaussian(k, r, rng);
    let s = random_gaussian(r, r, rng);
    let h = random_gaussian(r, l, rng);
    let w = g.matmul(&s).and_then(|gs| gs.matmul(&h)).expect("conforming");
    let norm_pinv = |m: &DenseMatrix| sv(&pseudo_inverse(m).expect("converges"))[0].ln();
    norm_pinv(&g) + norm_pinv(&s) + norm_pinv(&h) - norm_pinv(&w) + LOG_SLACK
}

fn spsd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let g = random_gaussian(n, n, rng);
    g.matmul(&g.transpose()).expect("conforming")
}

fn spsd_cross_minor(rng: &mut ChaCha8Rng) -> f64 {
    let n = dim(rng, 2, 8);
    let k = dim(rng, 1, n - 1);
    let w = spsd(rng, n);
    let (i, j) = (subset(rng, n, k), subset(rng, n, k));
    let cross = sv(&w.select(&i, &j));
    let ii = sv(&w.select(&i, &i));
    let jj = sv(&w.select(&j, &j));
    if cross[k - 1] == 0.0 {
        return 0.0;
    }
    log_top(&ii, k) + log_top(&jj, k) - 2.0 * log_top(&cross, k) + LOG_SLACK
}

fn spsd_cross_projective(rng: &mut ChaCha8Rng) -> f64 {
    let n = dim(rng, 2, 8);
    let k = dim(rng, 1, n - 1);
    let r = dim(rng, 1, k);
    let w = spsd(rng, n);
    let (i, j) = (subset(rng, n, k), subset(rng, n, k));
    let cross = log_top(&sv(&w.select(&i, &j)), r);
    let ii = log_top(&sv(&w.select(&i, &i)), r);
    let jj = log_top(&sv(&w.select(&j, &j)), r);
    (ii.max(jj) - cross + LOG_SLACK).min(0.5 * (ii + jj) - cross + LOG_SLACK)
}

/// `σ_j(W) σ_{ρ+1-j}(W⁺) = 1`, `v2(W) v2(W⁺) = 1` and
/// `v2,r(W) v2,r(W_r⁺) = 1`.
fn pinv_reciprocal(rng: &mut ChaCha8Rng) -> f64 {
    let m = dim(rng, 1, 7);
    let n = dim(rng, 1, 7);
    let rho = m.min(n);
    let r = dim(rng, 1, rho);
    let w = random_gaussian(m, n, rng);
    let s = sv(&w);
    let sp = sv(&pseudo_inverse(&w).expect("converges"));
    let st = sv(&truncated_pseudo_inverse(&w, r).expect("converges"));
    let pairs = (0..rho)
        .map(|j| (s[j].ln() + sp[rho - 1 - j].ln()).abs())
        .fold(0.0, f64::max);
    let full = (log_top(&s, rho) + log_top(&sp, rho)).abs();
    let proj = (log_top(&s, r) + log_top(&st, r)).abs();
    LOG_EQ_TOL - pairs.max(full).max(proj)
}

fn orthogonal_invariance(rng: &mut ChaCha8Rng) -> f64 {
    let k = dim(rng, 1, 6);
    let n = dim(rng, 2, 8);
    let l = dim(rng, 1, n - 1);
    let r = dim(rng, 1, k.min(l));
    let a = random_gaussian(k, n, rng);
    let qa = random_orthonormal(k, k, rng).matmul(&a).expect("conforming");
    let (j1, j2) = (subset(rng, n, l), subset(rng, n, l));
    let ratio = |m: &DenseMatrix, t: usize| {
        log_top(&sv(&m.select_cols(&j1)), t) - log_top(&sv(&m.select_cols(&j2)), t)
    };
    let t = k.min(l);
    let full = (ratio(&a, t) - ratio(&qa, t)).abs();
    let proj = (ratio(&a, r) - ratio(&qa, r)).abs();
    LOG_EQ_TOL - full.max(proj)
}

/// `|det M| ≤ min(Π‖m_j‖, Π‖m̄_i‖, r^{r/2} max|m_ij|^r)`.
fn hadamard(rng: &mut ChaCha8Rng) -> f64 {
    let r = dim(rng, 1, 7);
    let m = random_gaussian(r, r, rng);
    let logdet = log_top(&sv(&m), r);
    let cols: f64 = (0..r)
        .map(|j| m.column(j).iter().map(|v| v * v).sum::<f64>().sqrt().ln())
        .sum();
    let rows: f64 = (0..r)
        .map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt().ln())
        .sum();
    let entry = 0.5 * r as f64 * (r as f64).ln() + r as f64 * m.max_abs().ln();
    cols.min(rows).min(entry) - logdet + LOG_SLACK
}

/// `‖W‖_C ≤ ‖W‖ ≤ ‖W‖_F ≤ √(mn) ‖W‖_C` and `‖W‖_F² ≤ min(m, n) ‖W‖²`.
fn norm_chain(rng: &mut ChaCha8Rng) -> f64 {
    let m = dim(rng, 1, 8);
    let n = dim(rng, 1, 8);
    let w = random_gaussian(m, n, rng);
    let (c, s, f) = (w.max_abs(), sv(&w)[0], w.frobenius());
    let rel = 1e-12 * s;
    [
        s - c,
        f - s,
        ((m * n) as f64).sqrt() * c - f,
        ((m.min(n)) as f64).sqrt() * s - f,
    ]
    .into_iter()
    .map(|d| d + rel)
    .fold(f64::INFINITY, f64::min)
}
