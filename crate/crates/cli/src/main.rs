use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splinetraj::Method;
use splinetraj_cli::bench::{JevalsOptions, ScalingOptions};
use splinetraj_cli::commands::{
    cmd_bench_conditioning, cmd_bench_jevals, cmd_bench_scaling, cmd_fixed, cmd_rrt, cmd_variable,
    ConditioningOptions, FixedOptions, RrtOptions, VariableOptions, DEFAULT_SAMPLES,
};
use splinetraj_cli::output::{default_output_dir, resolve_output};
use splinetraj_cli::{CliError, CliResult};

/// Minimum-derivative spline trajectories.
///
/// Output paths default to files in $SPLINETRAJ_OUT_DIR (or the working
/// directory).
#[derive(Parser)]
#[command(name = "splinetraj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a fixed-time problem file and write the sampled trajectory.
    Fixed {
        problem: PathBuf,
        /// Trajectory CSV (default trajectory.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also solve with the dense reference solver and print the deviation.
        #[arg(long)]
        oracle: bool,
        /// Evenly spaced sample times (knots are always included).
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Optimize the knot times of a problem file.
    Variable {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// exact, findiff or random.
        #[arg(long, default_value = "exact")]
        method: String,
        /// Write the descent trace (iter, J, step, evaluations) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Overrides the seed of the problem file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plan in a world file with the snap-cost RRT*.
    Rrt {
        world: PathBuf,
        /// Directory for edges.csv, trajectory.csv and metrics.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also run the Euclidean-distance RRT* on every trial.
        #[arg(long)]
        baseline: bool,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Time the fixed-time solver over a doubling grid of segment counts.
    BenchScaling {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        lmin: usize,
        #[arg(long, default_value_t = 8192)]
        lmax: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count objective evaluations of the three time-allocation methods.
    BenchJevals {
        /// Segment counts (repeat the flag or separate with commas).
        #[arg(long = "l", value_delimiter = ',', default_values_t = [6, 8, 10])]
        ls: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare KKT conditioning of normalized and absolute-time forms.
    BenchConditioning {
        #[arg(long, default_value_t = 50)]
        l: usize,
        /// Start time of the first knot.
        #[arg(long, default_value_t = 100.0)]
        shift: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> CliResult<Vec<String>> {
    match command {
        Command::Fixed {
            problem,
            out,
            oracle,
            samples,
        } => {
            let out = resolve_output(out.as_deref(), "trajectory.csv");
            Ok(cmd_fixed(&FixedOptions {
                problem: &problem,
                out: &out,
                oracle,
                samples,
            })?
            .summary())
        }
        Command::Variable {
            problem,
            out,
            method,
            trace,
            samples,
            seed,
        } => {
            let method: Method = method
                .parse()
                .map_err(|e: splinetraj::Error| CliError::input(e.to_string()))?;
            let out = resolve_output(out.as_deref(), "trajectory.csv");
            Ok(cmd_variable(&VariableOptions {
                problem: &problem,
                out: &out,
                method,
                trace: trace.as_deref(),
                samples,
                seed,
            })?
            .summary())
        }
        Command::Rrt {
            world,
            out_dir,
            baseline,
            trials,
            samples,
        } => {
            let out_dir = out_dir.unwrap_or_else(default_output_dir);
            Ok(cmd_rrt(&RrtOptions {
                world: &world,
                out_dir: &out_dir,
                baseline,
                trials,
                samples,
            })?
            .summary())
        }
        Command::BenchScaling {
            k,
            lmin,
            lmax,
            reps,
            seed,
            out,
        } => cmd_bench_scaling(
            &ScalingOptions {
                k,
                lmin,
                lmax,
                reps,
                seed,
            },
            &resolve_output(out.as_deref(), "scaling.csv"),
        ),
        Command::BenchJevals {
            ls,
            trials,
            k,
            seed,
            out,
        } => cmd_bench_jevals(
            &JevalsOptions {
                ls,
                trials,
                k,
                seed,
                ..JevalsOptions::default()
            },
            &resolve_output(out.as_deref(), "jevals.csv"),
        ),
        Command::BenchConditioning {
            l,
            shift,
            k,
            seed,
            out,
        } => cmd_bench_conditioning(
            &ConditioningOptions { k, l, shift, seed },
            &resolve_output(out.as_deref(), "conditioning.csv"),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are invalid input; --help and --version succeed
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(lines) => {
            // a closed stdout (e.g. piped into `head`) is not a failure
            let mut stdout = std::io::stdout().lock();
            for line in lines {
                if writeln!(stdout, "{line}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
