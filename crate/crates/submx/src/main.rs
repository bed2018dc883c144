//! `submx` command line: experiment runners E1-E7 plus small utilities
//! for the threshold-size solver, the theta_k estimate, the comparison
//! bound and LAS on a user-supplied matrix.
//!
//! Exit status: 0 iff all checks pass, 2 on any failed check, 1 on
//! usage or domain errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use submx::asymptotics::{comparison_bound, solve_k_tilde, theta_k_estimate};
use submx::experiments::{run_experiment, write_outputs, ExperimentConfig, ExperimentId};
use submx::matrix::GaussianMatrix;
use submx::rng::Stream;
use submx::search::las_search;
use submx::{Error, Result};

#[derive(Parser)]
#[command(name = "submx", version, about = "Large-average-submatrix experiments on Gaussian random matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Matrix side length.
    #[arg(long)]
    n: usize,
    /// Submatrix side length.
    #[arg(long)]
    k: usize,
    /// Threshold for the localization experiment.
    #[arg(long)]
    tau: Option<f64>,
    /// Number of replicates.
    #[arg(long)]
    replicates: usize,
    /// Master seed; replicate streams are derived from it.
    #[arg(long)]
    seed: u64,
    /// Output directory for report.json, replicates.csv, hist.dat, qq.dat.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Enumeration budget override, applied to both the (n choose k)
    /// census and the (n choose k)^2 exhaustive scan.
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Gumbel limit of the scaled global maximum.
    E1(RunArgs),
    /// Centered structure of the global optimum.
    E2(RunArgs),
    /// Two-point localization of the largest threshold-reaching size.
    E3(RunArgs),
    /// Structure of local optima (scores, ANOVA effects, concentration).
    E4(RunArgs),
    /// Mean/variance scaling of the local-optima count.
    E5(RunArgs),
    /// Central limit theorem for the local-optima count.
    E6(RunArgs),
    /// Local-versus-global averages and LAS convergence.
    E7(RunArgs),
    /// Monte Carlo estimate of theta_k.
    Theta {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Real solution of (n choose x)^2 Phi-bar(x tau) = 1.
    Ktilde {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: f64,
    },
    /// Finite-n Gaussian comparison bound at threshold u.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        u: f64,
    },
    /// LAS search on a CSV matrix (n rows of n comma-separated reals).
    Las {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_rounds: usize,
    },
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
    match dispatch(cli.command) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every check passed (non-experiment commands always
/// pass).
fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::E1(a) => run(ExperimentId::E1, a),
        Command::E2(a) => run(ExperimentId::E2, a),
        Command::E3(a) => run(ExperimentId::E3, a),
        Command::E4(a) => run(ExperimentId::E4, a),
        Command::E5(a) => run(ExperimentId::E5, a),
        Command::E6(a) => run(ExperimentId::E6, a),
        Command::E7(a) => run(ExperimentId::E7, a),
        Command::Theta { k, samples, seed } => {
            let (estimate, stderr) = theta_k_estimate(k, samples, seed)?;
            println!("theta_{k} = {estimate:.6} (stderr {stderr:.2e}, {samples} samples)");
            Ok(true)
        }
        Command::Ktilde { n, tau } => {
            let s = solve_k_tilde(n, tau)?;
            println!("k_tilde = {:.9}", s.k_tilde);
            println!("k_star  = {}", s.k_star);
            Ok(true)
        }
        Command::Bound { n, k, u } => {
            let report = comparison_bound(n, k, u)?;
            println!("comparison bound at n={n} k={k} u={u}: {:.9e}", report.total);
            for ((s, t), term) in &report.per_overlap_terms {
                println!("  overlap ({s},{t}): {term:.9e}");
            }
            Ok(true)
        }
        Command::Las { input, k, restarts, seed, max_rounds } => {
            las_command(&input, k, restarts, seed, max_rounds)?;
            Ok(true)
        }
    }
}

fn run(id: ExperimentId, args: RunArgs) -> Result<bool> {
    let config = ExperimentConfig {
        experiment_id: id,
        n: args.n,
        k: args.k,
        tau: args.tau,
        replicates: args.replicates,
        master_seed: args.seed,
        census_budget: args.budget,
        exhaustive_budget: args.budget,
        threads: args.threads,
    };
    let report = run_experiment(&config)?;
    write_outputs(&report, &args.out)?;

    for s in &report.summary {
        match s.stderr {
            Some(se) => println!("{}: {:.6} (stderr {:.2e})", s.name, s.value, se),
            None => println!("{}: {:.6}", s.name, s.value),
        }
    }
    for c in &report.checks {
        let op = match c.op {
            submx::experiments::CheckOp::LessEq => "<=",
            submx::experiments::CheckOp::GreaterEq => ">=",
        };
        println!(
            "[{}] {}: {:.6} {} {:.6}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            op,
            c.threshold
        );
    }
    println!("report written to {}", args.out.display());
    Ok(report.all_pass())
}

fn las_command(input: &PathBuf, k: usize, restarts: usize, seed: u64, max_rounds: usize) -> Result<()> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be positive".into()));
    }
    let text = std::fs::read_to_string(input)?;
    let mut values = Vec::new();
    let mut n_cols = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {cell:?}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        match n_cols {
            None => n_cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse(format!(
                    "line {}: expected {c} columns, got {}",
                    lineno + 1,
                    row.len()
                )));
            }
            _ => {}
        }
        values.extend(row);
    }
    let n_rows = values.len() / n_cols.unwrap_or(1).max(1);
    let n_cols = n_cols.ok_or_else(|| Error::Parse("empty matrix".into()))?;
    if n_rows != n_cols {
        return Err(Error::NotSquare { rows: n_rows, cols: n_cols });
    }
    let matrix = GaussianMatrix::from_values(n_rows, values, seed)?;

    let mut stream = Stream::new(seed);
    let mut best: Option<submx::search::LasResult> = None;
    for _ in 0..restarts {
        let mut pool: Vec<usize> = (1..=n_rows).collect();
        for i in 0..k {
            let j = i + (stream.next_u64() as usize) % (n_rows - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        let result = las_search(&matrix, k, &pool, max_rounds)?;
        if best.as_ref().is_none_or(|b| result.final_average > b.final_average) {
            best = Some(result);
        }
    }
    let best = best.expect("restarts >= 1");
    println!("best average: {:.6}", best.final_average);
    println!("rows: {:?}", best.final_index.rows());
    println!("cols: {:?}", best.final_index.cols());
    println!("rounds: {}{}", best.iterations, if best.truncated { " (truncated)" } else { "" });
    Ok(())
}
