//! Command-line surface: reproducible pursuit runs, constants, tie
//! counterexamples, lemma suites, and ensemble sweeps.
//!
//! Exit codes: 0 on success, 1 when a verification flag is false or a
//! certified recovery fails, 2 on usage or i/o errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use omplab::error::Error;
use omplab::experiment::{run_experiment, run_lemma_suite, ExperimentConfig, OutputFormat};
use omplab::io;
use omplab::linalg::Vector;
use omplab::omp::{check_recovery, run_omp, TieBreakRule, DEFAULT_RESIDUAL_TOL};
use omplab::report::{CounterexampleDto, RicReportDto, TraceDto};
use omplab::ric::{ric_exact, ric_lower_bound_mc, DEFAULT_ENUMERATION_CAP};
use omplab::sharpness::{build_counterexample, verify_counterexample, DEFAULT_RECOVERY_TOL};

#[derive(Parser)]
#[command(name = "omplab", version, about = "Greedy sparse recovery workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restricted isometry constant of a matrix, exact or Monte Carlo.
    Ric(RicArgs),
    /// Orthogonal matching pursuit with a full trace.
    Omp(OmpArgs),
    /// Build the order-s tie instance and verify its predictions.
    Counterexample(CounterexampleArgs),
    /// Identity, tie-parameter, and dominance suites.
    VerifyLemmas(VerifyLemmasArgs),
    /// Recovery-rate sweep over a random ensemble, from a config file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RicArgs {
    /// Matrix CSV file (one row per line, no header).
    #[arg(long)]
    matrix: PathBuf,
    /// Sparsity order s.
    #[arg(long)]
    order: usize,
    /// Sample this many random supports instead of enumerating exactly.
    #[arg(long)]
    mc: Option<u64>,
    /// Seed for Monte Carlo sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on exhaustive enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OmpArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Sparse signal CSV (two lines: 1-based indices, values); the
    /// right-hand side becomes A x and recovery is checked.
    #[arg(long, conflicts_with = "rhs")]
    signal: Option<PathBuf>,
    /// Dense right-hand side CSV, when no ground truth is available.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Iteration count; defaults to the signal sparsity, or min(rows, cols).
    #[arg(long)]
    iters: Option<usize>,
    /// Tie-break rule: low, high, or rand:SEED.
    #[arg(long, default_value = "low")]
    tie: String,
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL)]
    residual_tol: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Sparsity order of the instance.
    #[arg(long)]
    s: usize,
    /// Also write the matrix as CSV.
    #[arg(long)]
    emit_matrix: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyLemmasArgs {
    #[arg(long)]
    s_max: usize,
    /// Random instances per sparsity and sign.
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; see the README for the schema.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp so identical configs give byte-identical reports.
    #[arg(long)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ric(args) => cmd_ric(args),
        Command::Omp(args) => cmd_omp(args),
        Command::Counterexample(args) => cmd_counterexample(args),
        Command::VerifyLemmas(args) => cmd_verify_lemmas(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn cmd_ric(args: RicArgs) -> Result<ExitCode, Error> {
    let a = io::read_matrix(&args.matrix)?;
    let report = match args.mc {
        Some(trials) => ric_lower_bound_mc(&a, args.order, trials, args.seed)?,
        None => ric_exact(&a, args.order, args.cap)?,
    };
    let dto = RicReportDto::from(&report);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&dto).expect("report serializes"));
    } else {
        print!("{}", dto.render_text());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_omp(args: OmpArgs) -> Result<ExitCode, Error> {
    let a = io::read_matrix(&args.matrix)?;
    let tie: TieBreakRule = args.tie.parse()?;

    let (b, truth) = match (&args.signal, &args.rhs) {
        (Some(path), None) => {
            let x = io::read_signal(path, a.cols())?;
            let b = Vector::new(a.matvec(&x.to_dense())?)?;
            (b, Some(x))
        }
        (None, Some(path)) => (Vector::new(io::read_vector(path)?)?, None),
        _ => {
            return Err(Error::InvalidArgument(
                "exactly one of --signal and --rhs is required".into(),
            ))
        }
    };

    let iters = args.iters.unwrap_or_else(|| {
        truth
            .as_ref()
            .map(|x| x.sparsity())
            .unwrap_or_else(|| a.rows().min(a.cols()))
    });
    let trace = run_omp(&a, &b, iters, tie, args.residual_tol)?;
    let recovered = match &truth {
        Some(x) => Some(check_recovery(&trace.final_estimate, x, DEFAULT_RECOVERY_TOL)?),
        None => None,
    };

    let dto = TraceDto::new(&trace, recovered);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&dto).expect("trace serializes"));
    } else {
        print!("{}", dto.render_text());
    }
    Ok(match recovered {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}

fn cmd_counterexample(args: CounterexampleArgs) -> Result<ExitCode, Error> {
    let bundle = build_counterexample(args.s)?;
    if let Some(path) = &args.emit_matrix {
        io::write_matrix(path, &bundle.matrix)?;
    }
    let report = verify_counterexample(&bundle)?;
    let dto = CounterexampleDto::new(
        bundle.predicted_delta,
        &bundle.predicted_spectrum,
        bundle.predicted_tie_value,
        &report,
    );
    if args.json {
        println!("{}", serde_json::to_string_pretty(&dto).expect("report serializes"));
    } else {
        print!("{}", dto.render_text());
    }
    Ok(if dto.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_verify_lemmas(args: VerifyLemmasArgs) -> Result<ExitCode, Error> {
    let report = run_lemma_suite(args.s_max, args.trials, args.seed)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!(
            "identity suite: max scaled residual {} (bound {}) .. {}",
            io::format_f64(report.max_identity_residual),
            io::format_f64(report.identity_bound),
            if report.identity_pass { "ok" } else { "FAIL" },
        );
        println!(
            "tie parameter: max closed-form defect {} .. {}",
            io::format_f64(report.max_t_algebra_defect),
            if report.t_algebra_pass { "ok" } else { "FAIL" },
        );
        println!(
            "dominance suite: min margin {} over {} margins on {} certified matrices .. {}",
            io::format_f64(report.min_dominance_margin),
            report.margins_checked,
            report.certified_matrices,
            if report.dominance_pass { "ok" } else { "FAIL" },
        );
    }
    Ok(if report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config file: {e}")))?;
    let mut report = run_experiment(&config)?;
    if !args.no_timestamp {
        report.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    let rendered = match config.output_format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }

    if report.any_violation() {
        eprintln!("recovery guarantee violated; see the failures column");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
