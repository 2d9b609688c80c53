//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical breakdown,
//! 3 invariant violation detected by `--self-check`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use toeplitz_bbh::harness::{bench, compute_metrics, factor_backward_error, BenchConfig};
use toeplitz_bbh::io::{Matrix, MatrixFile, RFactorFile, RotationLogFile};
use toeplitz_bbh::oracles::{householder_solve, DenseMatrix};
use toeplitz_bbh::seminormal::{least_squares, solve};
use toeplitz_bbh::{
    factor, hankel_adapter, Error, FactorOptions, HankelSpec, SolveOptions, SolveReport, StorageMode, Tally,
    ToeplitzSpec, UNIT_ROUNDOFF,
};

/// Self-check constant for the factor backward error bound `K n² ε ‖AᵀA‖`.
const SELF_CHECK_K: f64 = 100.0;

#[derive(Parser)]
#[command(name = "toeplitz-bbh", version, about = "Fast weakly stable Toeplitz solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize AᵀA + αI = RᵀR and print R as JSON.
    Factor(FactorArgs),
    /// Solve a square system Ax = b.
    Solve(SolveArgs),
    /// Solve min ‖Ax - b‖₂ for full column rank A.
    Lsq(SolveArgs),
    /// Run the random-ensemble stability benchmark.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file ({"kind":"toeplitz"|"hankel","col":[…],"row":[…]}).
    #[arg(long)]
    input: PathBuf,
    /// Treat the matrix as Hankel (first column, last row).
    #[arg(long)]
    hankel: bool,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Verify output invariants; exit 3 if any fails.
    #[arg(long)]
    self_check: bool,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FactorArgs {
    #[command(flatten)]
    common: InputArgs,
    /// Print the multiplication count to stderr.
    #[arg(long)]
    tally: bool,
    /// Also write the rotation log as JSON.
    #[arg(long)]
    rotation_log: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Storage {
    Dense,
    Rotreverse,
    Checkpoint,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: InputArgs,
    /// Right-hand side as a JSON array.
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, default_value_t = 0)]
    refine: usize,
    #[arg(long, value_enum, default_value = "dense")]
    storage: Storage,
    #[arg(long, default_value_t = 8)]
    checkpoint_block: usize,
    /// Report κ₁(R) and e1/e2/e3 (e2 against a dense Householder solution).
    #[arg(long)]
    metrics: bool,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON file with any of the fields n, mu_sigma, count, seed, format,
    /// singular; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    mu_sigma: Option<Vec<f64>>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include the a₋₁ = a₀ = a₁ family.
    #[arg(long)]
    singular: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    n: Option<Vec<usize>>,
    mu_sigma: Option<Vec<f64>>,
    count: Option<usize>,
    seed: Option<u64>,
    format: Option<Format>,
    singular: Option<bool>,
}

enum Failure {
    Usage(String),
    Numerical(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Loads the matrix and right-hand side, routing Hankel input through the
/// row-reversal adapter.
fn load_system(args: &InputArgs, rhs: Option<&Path>) -> Result<(ToeplitzSpec, Option<Vec<f64>>), Failure> {
    let file: MatrixFile = read_json(&args.input)?;
    let matrix = if args.hankel {
        let (MatrixFile::Toeplitz { col, row } | MatrixFile::Hankel { col, row }) = file;
        Matrix::Hankel(HankelSpec::new(col, row)?)
    } else {
        file.validate()?
    };
    let b: Option<Vec<f64>> = rhs.map(read_json).transpose()?;
    Ok(match matrix {
        Matrix::Toeplitz(t) => (t, b),
        Matrix::Hankel(h) => {
            let zeros = vec![0.0; h.rows()];
            let (t, jb) = hankel_adapter(&h, b.as_deref().unwrap_or(&zeros))?;
            (t, b.map(|_| jb))
        }
    })
}

fn run_factor(args: &FactorArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&args.common, None)?;
    let mut tally = Tally::new();
    let opts = FactorOptions::with_alpha(args.common.alpha);
    let f = factor(&t, &opts, &mut tally)?;
    let file = RFactorFile::from_factor(&f).expect("dense factor");
    if args.common.self_check {
        let rows = f.rows.as_ref().expect("dense factor");
        if rows.rows().any(|r| !(r[0] > 0.0) || r.iter().any(|v| !v.is_finite())) {
            return Err(Failure::Invariant("factor has a nonpositive diagonal or non-finite entry".into()));
        }
        let n = f.n as f64;
        let err = factor_backward_error(&t, args.common.alpha, rows);
        if err > SELF_CHECK_K * n * n * UNIT_ROUNDOFF {
            return Err(Failure::Invariant(format!("factor backward error {err:e} exceeds K n² ε")));
        }
    }
    if args.tally {
        eprintln!("tally {}", tally.get());
    }
    if let Some(p) = &args.rotation_log {
        let text = serde_json::to_string(&RotationLogFile::from(&f.log)).expect("serializable");
        write_out(Some(p), &text)?;
    }
    write_out(args.common.out.as_deref(), &serde_json::to_string(&file).expect("serializable"))
}

fn run_solve(args: &SolveArgs, square: bool) -> Result<(), Failure> {
    let (t, b) = load_system(&args.common, Some(&args.rhs))?;
    let b = b.expect("rhs loaded");
    let opts = SolveOptions {
        alpha: args.common.alpha,
        refine_steps: args.refine,
        storage_mode: match args.storage {
            Storage::Dense => StorageMode::Dense,
            Storage::Rotreverse => StorageMode::RotationReverse,
            Storage::Checkpoint => StorageMode::Checkpointed,
        },
        checkpoint_block: args.checkpoint_block,
        compute_cond1: args.metrics,
    };
    let mut report: SolveReport = if square { solve(&t, &b, &opts)? } else { least_squares(&t, &b, &opts)? };
    if args.metrics {
        let f = factor(&t, &FactorOptions::with_alpha(args.common.alpha), &mut Tally::new())?;
        let x_ref = householder_solve(&DenseMatrix::from_toeplitz(&t), &b)?;
        let m = compute_metrics(&t, &x_ref, &b, &report.x, f.rows.as_ref().expect("dense"), UNIT_ROUNDOFF)?;
        report.metrics = Some(m.stability());
    }
    if args.common.self_check {
        let finite = report.x.iter().all(|v| v.is_finite())
            && report.residual_2norm.is_finite()
            && report.normal_residual_2norm.is_finite();
        if !finite {
            return Err(Failure::Invariant("solution or residual is not finite".into()));
        }
    }
    write_out(args.common.out.as_deref(), &serde_json::to_string(&report).expect("serializable"))
}

fn run_bench(args: &BenchArgs) -> Result<(), Failure> {
    let file: BenchFile = match &args.config {
        Some(p) => read_json(p)?,
        None => BenchFile::default(),
    };
    let cfg = BenchConfig {
        ns: args.n.clone().or(file.n).unwrap_or_else(|| vec![50, 100, 200]),
        mu_sigmas: args.mu_sigma.clone().or(file.mu_sigma).unwrap_or_else(|| vec![0.0, 1.0, 10.0, 100.0, 1000.0]),
        count: args.count.or(file.count).unwrap_or(5),
        seed: args.seed.or(file.seed).unwrap_or(0),
        singular_family: args.singular || file.singular.unwrap_or(false),
    };
    if cfg.count == 0 || cfg.ns.contains(&0) || cfg.mu_sigmas.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage("bench needs count >= 1, n >= 1 and finite mu/sigma".into()));
    }
    let table = bench(&cfg);
    let text = match args.format.or(file.format).unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &args.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
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
    let result = match &cli.command {
        Command::Factor(a) => run_factor(a),
        Command::Solve(a) => run_solve(a, true),
        Command::Lsq(a) => run_solve(a, false),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical breakdown: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("self-check failed: {msg}");
            ExitCode::from(3)
        }
    }
}
