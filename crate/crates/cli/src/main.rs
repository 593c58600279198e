use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use curlra_cli::commands::{self, CaArgs, HssArgs, SpsdArgs};
use curlra_cli::{Outcome, Source};

/// Sublinear CUR and HSS approximation from entry oracles.
#[derive(Parser)]
#[command(name = "curlra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file: a `m n` header then m rows of n numbers.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generated input, e.g. spsd:256:geo:0.5, rank:100:80:5, cauchy:64, delta:4:4:0:1.
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Theorems,
    Adversary,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated matrix in the text format.
    Gen {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CUR of a symmetric positive semidefinite matrix by diagonal pivoting and index updates.
    Spsd {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rank: usize,
        /// Generator size K; defaults to the rank.
        #[arg(long)]
        gen_size: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on accepted index updates; reaching it is reported as a failure.
        #[arg(long)]
        max_updates: Option<usize>,
    },
    /// Alternating row and column cross approximation iterations.
    Ca {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        rank: usize,
        /// Row count of the generator; defaults to the rank.
        #[arg(long)]
        k: Option<usize>,
        /// Column count of the generator; defaults to the rank.
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Stopping tolerance on the estimated Chebyshev error.
        #[arg(long, default_value_t = 1e-8)]
        tau: f64,
        #[arg(long)]
        seed: u64,
        /// Random entries sampled per step for the error estimate; 0 disables early stopping.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// HSS approximation benchmark on Cauchy-like matrices, with CSV output.
    HssBench {
        #[arg(long, value_delimiter = ',', default_value = "256,512")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "24")]
        max_rank: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,5")]
        loops: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        leaf: usize,
        #[arg(long, default_value_t = 1e-8)]
        xi: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized checks of the volume inequalities, the adversary, and brute-force maximizers.
    Oracle {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances per inequality check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Matrix order for the adversary suite.
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[command(flatten)]
        input: InputArgs,
        /// Rows, columns and rank of the brute-force maximizer.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
}

fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::Gen { spec, seed, out } => commands::cmd_gen(&spec, seed, out.as_ref()),
        Command::Spsd { input, rank, gen_size, eps, seed, max_updates } => commands::cmd_spsd(&SpsdArgs {
            source: Source::new(input.input, input.spec, seed)?,
            rank,
            gen_size,
            eps,
            max_updates,
        }),
        Command::Ca { input, rank, k, l, iters, tau, seed, samples } => commands::cmd_ca(&CaArgs {
            source: Source::new(input.input, input.spec, Some(seed))?,
            rank,
            k,
            l,
            iters,
            tau,
            seed,
            samples,
        }),
        Command::HssBench { sizes, max_rank, loops, leaf, xi, trials, seed, out } => {
            commands::cmd_hss_bench(&HssArgs { sizes, max_ranks: max_rank, loops, leaf, xi, trials, seed, out })
        }
        Command::Oracle { suite, seed, trials, size, input, k, l, rank } => match suite {
            Suite::Theorems => commands::cmd_theorems(seed, trials),
            Suite::Adversary => commands::cmd_adversary(size, seed),
            Suite::Brute => commands::cmd_brute(&Source::new(input.input, input.spec, Some(seed))?, k, l, rank),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(if outcome.failure { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
