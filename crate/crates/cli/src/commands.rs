use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use curlra::cross::StepKind;
use curlra::generate::{geometric_spectrum, MatrixSpec, SPEC_GRAMMAR};
use curlra::hss::{hss_benchmark, HssBenchConfig, CSV_HEADER};
use curlra::linalg::singular_values;
use curlra::spsd::{build_cur_spsd, projective_update_bound, square_update_bound};
use curlra::verify::{
    adversary_demo, brute_force_max_volume, optimal_error, theorem_suite, AdversarialFamily,
    AdversaryOutcome,
};
use curlra::{
    build_hss, ca_iterations, cheb_error, spsd_cur, CaConfig, CaStatus, CurError, DenseMatrix,
    Entries, EntryOracle, HssConfig, SpsdConfig,
};

use crate::matrix_file;

/// Largest order for which reports compute exact errors and `sigma_{r+1}`
/// from a dense copy.
pub const VERIFY_LIMIT: usize = 512;

/// Report text plus whether the run hit a FAILURE outcome (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub failure: bool,
}

/// Where a command's input matrix comes from.
#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Spec { spec: MatrixSpec, seed: u64 },
}

impl Source {
    pub fn new(input: Option<PathBuf>, spec: Option<String>, seed: Option<u64>) -> Result<Self, String> {
        match (input, spec) {
            (Some(path), None) => Ok(Source::File(path)),
            (None, Some(s)) => {
                let spec: MatrixSpec = s.parse().map_err(|e: CurError| e.to_string())?;
                let seed = match (&spec, seed) {
                    (_, Some(seed)) => seed,
                    (MatrixSpec::Cauchy { .. } | MatrixSpec::Delta { .. }, None) => 0,
                    _ => return Err(format!("`{spec}` is randomized; pass --seed")),
                };
                Ok(Source::Spec { spec, seed })
            }
            (Some(_), Some(_)) => Err("pass either --input or --spec, not both".into()),
            (None, None) => Err(format!("pass --input FILE or --spec ({SPEC_GRAMMAR})")),
        }
    }

    fn label(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Spec { spec, seed } => format!("{spec} (seed {seed})"),
        }
    }

    /// Counted oracle plus, at test scale, a dense copy for verification.
    fn load(&self) -> Result<(EntryOracle, Option<DenseMatrix>), String> {
        match self {
            Source::File(p) => {
                let m = matrix_file::read(p)?;
                let dense = (m.rows().max(m.cols()) <= VERIFY_LIMIT).then(|| m.clone());
                Ok((EntryOracle::from_matrix(m), dense))
            }
            Source::Spec { spec, seed } => {
                let oracle = spec.oracle(*seed).map_err(|e| e.to_string())?;
                let (m, n) = spec.shape();
                let dense = (m.max(n) <= VERIFY_LIMIT).then(|| oracle.to_dense());
                Ok((oracle, dense))
            }
        }
    }

    /// Singular values known in closed form for generated SPSD input.
    fn known_spectrum(&self) -> Option<Vec<f64>> {
        match self {
            Source::Spec {
                spec: MatrixSpec::Spsd { n, ratio },
                ..
            } => Some(geometric_spectrum(*n, *ratio)),
            _ => None,
        }
    }
}

fn line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key}: {value}").expect("writing to a String");
}

fn time_line(out: &mut String, start: Instant) {
    line(out, "time", format!("{:.3}s", start.elapsed().as_secs_f64()));
}

fn access_line(out: &mut String, count: usize, m: usize, n: usize) {
    line(out, "access count", format!("{count} of {} ({:.4})", m * n, count as f64 / (m * n) as f64));
}

pub fn cmd_gen(spec: &str, seed: Option<u64>, out: Option<&PathBuf>) -> Result<Outcome, String> {
    let Source::Spec { spec, seed } = Source::new(None, Some(spec.to_string()), seed)? else {
        unreachable!("built from a spec")
    };
    let m = spec.dense(seed).map_err(|e| e.to_string())?;
    let report = match out {
        Some(path) => {
            matrix_file::write(path, &m)?;
            format!("wrote {spec} ({} x {}) to {}\n", m.rows(), m.cols(), path.display())
        }
        None => matrix_file::to_text(&m),
    };
    Ok(Outcome { report, failure: false })
}

pub struct SpsdArgs {
    pub source: Source,
    pub rank: usize,
    pub gen_size: Option<usize>,
    pub eps: f64,
    pub max_updates: Option<usize>,
}

pub fn cmd_spsd(args: &SpsdArgs) -> Result<Outcome, String> {
    let start = Instant::now();
    let (oracle, dense) = args.source.load()?;
    let n = oracle.rows();
    let k = args.gen_size.unwrap_or(args.rank);
    let mut cfg = SpsdConfig::new(args.rank, args.eps).with_gen_size(k);
    cfg.max_updates = args.max_updates;
    let mut out = String::new();
    line(&mut out, "input", args.source.label());
    line(&mut out, "size", format!("{n} x {}", oracle.cols()));
    line(&mut out, "rank", args.rank);
    line(&mut out, "generator size", k);
    line(&mut out, "eps", args.eps);

    let (outcome, cur) = match spsd_cur(&oracle, &cfg) {
        Ok(pair) => pair,
        Err(CurError::UpdateBudgetExhausted { limit, best }) => {
            line(&mut out, "status", format!("FAILURE: index update budget of {limit} exhausted"));
            line(&mut out, "best set", best);
            access_line(&mut out, oracle.access_count(), n, n);
            time_line(&mut out, start);
            return Ok(Outcome { report: out, failure: true });
        }
        Err(e) => return Err(e.to_string()),
    };
    let r = outcome.rank;
    line(&mut out, "initial set (diagonal pivoting)", &outcome.initial.set);
    line(&mut out, "final set", &outcome.set);
    if r < args.rank {
        line(&mut out, "rank used", format!("{r} (pivots ran out)"));
    }
    let (update_bound, bound_name) = if k == r {
        (square_update_bound(r, args.eps), "ceil(log_{1+eps}(r!))")
    } else {
        (projective_update_bound(r, n, args.eps), "ceil(log_{1+eps}(2^{r(r-1)} n^r))")
    };
    let mut failure = outcome.updates > update_bound;
    line(
        &mut out,
        "index updates",
        format!("{} in {} sweeps (index update count bound {bound_name} = {update_bound})", outcome.updates, outcome.sweeps),
    );
    access_line(&mut out, outcome.access_count, n, n);

    let sigma = match (args.source.known_spectrum(), &dense) {
        (Some(s), _) => Some(s),
        (None, Some(d)) => Some(singular_values(d).map_err(|e| e.to_string())?),
        (None, None) => None,
    };
    match (&dense, sigma) {
        (Some(_), Some(s)) => {
            let err = cheb_error(&oracle, &cur);
            let next = s.get(r).copied().unwrap_or(0.0);
            let slack = 1e-9 * oracle.to_dense().max_abs();
            let (factor, name) = if k == r {
                ((1.0 + args.eps) * (r + 1) as f64, "square-generator volume bound (1+eps)(r+1) sigma_{r+1}")
            } else if k + 1 >= 2 * r {
                (2.0 * (1.0 + args.eps), "oversampled-generator volume bound 2(1+eps) sigma_{r+1} with K >= 2r-1")
            } else {
                let c = (k + 1) as f64 / r as f64;
                (c / (c - 1.0) * (1.0 + args.eps), "oversampled-generator volume bound (1+eps) c/(c-1) sigma_{r+1} with K = cr-1")
            };
            let holds = err <= factor * next + slack;
            failure |= !holds;
            line(&mut out, "chebyshev error", format!("{err:.6e}"));
            line(&mut out, "sigma_{r+1}", format!("{next:.6e}"));
            let ratio = if next > 0.0 { format!("{:.4}", err / next) } else { "n/a (sigma_{r+1} = 0)".into() };
            line(&mut out, "error / sigma_{r+1}", ratio);
            line(
                &mut out,
                &format!("bound ({name})"),
                format!("factor {factor:.4}, {}", if holds { "holds" } else { "VIOLATED" }),
            );
        }
        _ => line(&mut out, "verification", format!("skipped (order above {VERIFY_LIMIT})")),
    }
    line(&mut out, "status", if failure { "FAILURE" } else { "OK" });
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure })
}

pub struct CaArgs {
    pub source: Source,
    pub rank: usize,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub iters: usize,
    pub tau: f64,
    pub seed: u64,
    pub samples: usize,
}

pub fn cmd_ca(args: &CaArgs) -> Result<Outcome, String> {
    let start = Instant::now();
    let (oracle, dense) = args.source.load()?;
    let (m, n) = (oracle.rows(), oracle.cols());
    let (k, l) = (args.k.unwrap_or(args.rank), args.l.unwrap_or(args.rank));
    let mut cfg = CaConfig::new(args.rank, args.iters, args.tau, args.seed).with_generator(k, l);
    cfg.verify_samples = args.samples;
    let res = ca_iterations(&oracle, &cfg).map_err(|e| e.to_string())?;

    let mut out = String::new();
    line(&mut out, "input", args.source.label());
    line(&mut out, "size", format!("{m} x {n}"));
    line(&mut out, "rank", args.rank);
    line(&mut out, "generator", format!("{k} x {l}"));
    line(&mut out, "tau", args.tau);
    line(&mut out, "seed", args.seed);
    if res.restarts > 0 {
        line(&mut out, "restarts after degenerate strips", res.restarts);
    }
    for (i, s) in res.steps.iter().enumerate() {
        let kind = match s.kind {
            StepKind::Vertical => "vertical",
            StepKind::Horizontal => "horizontal",
        };
        let certified = s.global_bound.map_or("n/a".to_string(), |b| format!("{b:.4}"));
        let estimate = s.estimate.map_or("n/a".to_string(), |e| format!("chebyshev {:.4e} frobenius {:.4e}", e.chebyshev, e.frobenius));
        line(
            &mut out,
            &format!("step {}", i + 1),
            format!(
                "{kind} rows {} cols {} ln v2,r {:.6} local factor {:.4} certified factor {certified} estimate {estimate}",
                s.rows,
                s.cols,
                s.log_volume.log_value,
                s.local_factor
            ),
        );
    }
    access_line(&mut out, res.access_count, m, n);
    if let Some(d) = &dense {
        let err = cheb_error(&oracle, &res.cur);
        let (sigma, _) = optimal_error(d, args.rank).map_err(|e| e.to_string())?;
        let r = args.rank as f64;
        let (kf, lf) = (k as f64, l as f64);
        let f = ((kf + 1.0) * (lf + 1.0) / ((kf - r + 1.0) * (lf - r + 1.0))).sqrt();
        line(&mut out, "chebyshev error", format!("{err:.6e}"));
        line(&mut out, "sigma_{r+1}", format!("{sigma:.6e}"));
        let ratio = if sigma > 0.0 { format!("{:.4}", err / sigma) } else { "n/a (sigma_{r+1} = 0)".into() };
        line(&mut out, "error / sigma_{r+1}", ratio);
        line(&mut out, "bound factor (locally h-maximal projective volume bound h f(k,l,r) sigma_{r+1}, before h)", format!("{f:.4}"));
    }
    let failure = res.status == CaStatus::Failure;
    line(
        &mut out,
        "status",
        match res.status {
            CaStatus::Converged => format!("converged after {} steps", res.steps_executed),
            CaStatus::Failure => format!("FAILURE after {} steps", res.steps_executed),
        },
    );
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure })
}

pub struct HssArgs {
    pub sizes: Vec<usize>,
    pub max_ranks: Vec<usize>,
    pub loops: Vec<usize>,
    pub leaf: usize,
    pub xi: f64,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn cmd_hss_bench(args: &HssArgs) -> Result<Outcome, String> {
    let start = Instant::now();
    let cfg = HssBenchConfig {
        sizes: args.sizes.clone(),
        max_ranks: args.max_ranks.clone(),
        loops: args.loops.clone(),
        leaf_size: args.leaf,
        xi: args.xi,
        trials: args.trials,
        seed: args.seed,
    };
    let rows = hss_benchmark(&cfg).map_err(|e| e.to_string())?;
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &rows {
        writeln!(csv, "{}", r.csv_line()).expect("writing to a String");
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:>8} {:>5} {:>8} {:>11} {:>11} {:>11} {:>11} {:>9}",
        "input", "max_rank", "loops", "hss_rank", "spec_mean", "spec_std", "cheb_mean", "cheb_std", "accessed"
    )
    .expect("writing to a String");
    for r in &rows {
        let (sm, ss) = r.spectral_stats();
        let (cm, cs) = r.chebyshev_stats();
        writeln!(
            out,
            "{:<12} {:>8} {:>5} {:>8} {sm:>11.3e} {ss:>11.3e} {cm:>11.3e} {cs:>11.3e} {:>9.4}",
            r.input,
            r.max_rank,
            r.loops,
            r.hss_rank,
            r.access_fraction()
        )
        .expect("writing to a String");
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?;
            line(&mut out, "csv", path.display());
        }
        None => {
            out.push('\n');
            out.push_str(&csv);
        }
    }
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure: false })
}

type Procedure = Box<dyn Fn(&EntryOracle) -> DenseMatrix>;

/// Fixed-parameter runs of every oracle-based procedure, for the adversary suite.
fn adversary_procedures(n: usize, seed: u64) -> Vec<(&'static str, Procedure)> {
    let zero = move |r: curlra::Result<DenseMatrix>| r.unwrap_or_else(|_| DenseMatrix::zeros(n, n));
    vec![
        ("spsd K=r", Box::new(move |o: &EntryOracle| zero(spsd_cur(o, &SpsdConfig::new(2, 0.1)).map(|c| c.1.reconstruct())))),
        ("spsd K>r", Box::new(move |o: &EntryOracle| zero(spsd_cur(o, &SpsdConfig::new(2, 0.1).with_gen_size(4)).map(|c| c.1.reconstruct())))),
        ("diagonal pivoting", Box::new(move |o: &EntryOracle| {
            zero(curlra::spsd::gecp_spsd(o, 3).and_then(|s| build_cur_spsd(o, &s.set, s.set.len().max(1)).map(|c| c.reconstruct())))
        })),
        ("cross approximation", Box::new(move |o: &EntryOracle| zero(ca_iterations(o, &CaConfig::new(2, 4, 1e-6, seed)).map(|c| c.cur.reconstruct())))),
        ("hss", Box::new(move |o: &EntryOracle| zero(build_hss(o, &HssConfig::new(8, 1e-8, 4, 1, seed)).and_then(|t| t.to_dense())))),
    ]
}

pub fn cmd_theorems(seed: u64, trials: usize) -> Result<Outcome, String> {
    let start = Instant::now();
    let ledger = theorem_suite(seed, trials);
    let mut out = ledger.to_string();
    let failed = ledger.failures().count();
    line(&mut out, "status", if failed == 0 { "all checks pass".to_string() } else { format!("FAILURE: {failed} checks failed") });
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure: failed > 0 })
}

pub fn cmd_adversary(size: usize, seed: u64) -> Result<Outcome, String> {
    let start = Instant::now();
    if size < 16 {
        return Err("adversary suite needs --size of at least 16".into());
    }
    let mut out = String::new();
    let mut failure = false;
    for (name, proc_) in adversary_procedures(size, seed) {
        let res = adversary_demo(&AdversarialFamily::delta(size, size), size * size - 1, |o| proc_(o))
            .map_err(|e| e.to_string())?;
        match res {
            AdversaryOutcome::Witness(w) => {
                failure |= !w.certified();
                line(
                    &mut out,
                    name,
                    format!(
                        "witness cell ({}, {}), {} reads, identical outputs {}, errors {:.3} / {:.3} (combined error at least 1: {})",
                        w.cell.0,
                        w.cell.1,
                        w.accessed,
                        w.outputs_identical,
                        w.error_on_base,
                        w.error_on_member,
                        if w.certified() { "yes" } else { "NO" }
                    ),
                );
            }
            AdversaryOutcome::NotSublinear { accessed } => {
                failure = true;
                line(&mut out, name, format!("not sublinear ({accessed} reads)"));
            }
        }
    }
    line(&mut out, "status", if failure { "FAILURE" } else { "OK" });
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure })
}

pub fn cmd_brute(source: &Source, k: usize, l: usize, rank: usize) -> Result<Outcome, String> {
    let start = Instant::now();
    let (oracle, _) = source.load()?;
    let w = oracle.to_dense();
    let best = brute_force_max_volume(&w, k, l, rank).map_err(|e| e.to_string())?;
    let (spec, frob) = optimal_error(&w, rank).map_err(|e| e.to_string())?;
    let mut out = String::new();
    line(&mut out, "input", source.label());
    line(&mut out, "rows", &best.rows);
    line(&mut out, "cols", &best.cols);
    line(&mut out, "ln v2,r", format!("{:.12}", best.log_volume.log_value));
    line(&mut out, "optimal spectral error (Eckart-Young)", format!("{spec:.6e}"));
    line(&mut out, "optimal frobenius error (Eckart-Young)", format!("{frob:.6e}"));
    time_line(&mut out, start);
    Ok(Outcome { report: out, failure: false })
}
