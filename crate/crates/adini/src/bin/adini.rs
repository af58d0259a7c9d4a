//! Command-line front end: convergence studies and verification suites.
//!
//! Exit codes: 0 on success, 1 when a solver or a numerical invariant
//! fails, 2 for usage errors such as unknown solution or suite names.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adini::study::{format_table, run_study, write_csv, SolverChoice, StudyConfig};
use adini::verify::{format_suite_report, run_suite};
use adini::Error;

#[derive(Parser)]
#[command(
    name = "adini",
    version,
    about = "Convergence laboratory for a nonconforming rectangular plate element"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the clamped plate problem on a refinement sequence and report
    /// error norms and decomposition diagnostics per level.
    Study {
        /// Manufactured solution to study.
        #[arg(long, default_value = "sine2")]
        solution: String,
        /// Cells per direction on the coarsest mesh.
        #[arg(long, default_value_t = 4)]
        n0: usize,
        /// Number of meshes; each level doubles the cell count.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Domain side length in x.
        #[arg(long, default_value_t = 1.0)]
        lx: f64,
        /// Domain side length in y.
        #[arg(long, default_value_t = 1.0)]
        ly: f64,
        /// Linear solver: "cholesky" or "cg".
        #[arg(long, default_value = "cholesky")]
        solver: String,
        /// Also write the rows as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run one seeded randomized verification suite.
    Verify {
        /// Suite name: basis, interp, expansion, commuting, identity, or
        /// quadrature.
        #[arg(long)]
        suite: String,
        /// Seed for the random inputs; identical seeds replay identical
        /// trials.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of random trials per check.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Study {
            solution,
            n0,
            levels,
            lx,
            ly,
            solver,
            csv,
        } => {
            let solver = SolverChoice::parse(&solver).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown solver '{solver}'; available: cholesky, cg"
                ))
            })?;
            let config = StudyConfig {
                solution,
                n0,
                levels,
                lx,
                ly,
                solver,
            };
            let report = run_study(&config)?;
            println!(
                "solution '{}' on a {} x {} domain, meshes {}..{}, {:?} solver",
                config.solution,
                config.lx,
                config.ly,
                config.n0,
                config.n0 << (config.levels - 1),
                config.solver
            );
            print!("{}", format_table(&report.rows));
            if let Some(path) = csv {
                write_csv(&path, &report.rows)
                    .map_err(|e| Error::Internal(format!("writing {}: {e}", path.display())))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Verify {
            suite,
            seed,
            trials,
        } => {
            let report = run_suite(&suite, seed, trials)?;
            print!("{}", format_suite_report(&report));
            if !report.passed() {
                return Err(Error::Internal(format!(
                    "suite '{}' failed; rerun with --seed {} to replay",
                    suite, seed
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::InvalidArgument(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
