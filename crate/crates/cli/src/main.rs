use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use netsir_cli::pipeline::{cmd_compare, cmd_run, cmd_sweep, cmd_validate, RunOptions, SweepSpec};

#[derive(Parser)]
#[command(
    name = "netsir",
    version,
    about = "Networked SIR epidemics: simulation, stability certificates, state estimation \
             from testing data, and distributed eradication control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file: structure, parameter assumptions, and
    /// control hypotheses.
    Validate { config: PathBuf },
    /// Execute pipeline stages into a run directory.
    Run {
        config: PathBuf,
        /// Run every stage the scenario configures (the default).
        #[arg(long)]
        all: bool,
        /// Comma-separated stage list: simulate,certify,gen-data,estimate,control,compare.
        #[arg(long = "stage", value_delimiter = ',')]
        stage: Vec<String>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: scenario output_dir or `runs/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the simulation horizon.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Grid sweeps: estimation error over (t1, s0_hat), or control
    /// outcomes over a uniform epsilon grid.
    Sweep {
        config: PathBuf,
        /// Testing start times, `start:end[:step]`.
        #[arg(long)]
        t1: Option<String>,
        /// Assumed initial susceptible grid, start:end:step (default 0.90:1.00:0.005).
        #[arg(long)]
        s0: Option<String>,
        /// Uniform control margin grid, start:end:step (selects the control sweep).
        #[arg(long)]
        epsilon: Option<String>,
        /// Step at which the estimation error is evaluated (default 100).
        #[arg(long)]
        k_eval: Option<usize>,
        /// Node label to sweep (default: first declared node).
        #[arg(long)]
        node: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run the no-control, true-state, and estimated-state variants and
    /// write their average curves side by side.
    Compare {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn main() -> ExitCode {
    // die quietly on a closed pipe, like other unix filters
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => cmd_validate(&config).map(|()| None),
        Command::Run {
            config,
            all,
            stage,
            seed,
            out,
            horizon,
        } => cmd_run(
            &config,
            &RunOptions {
                stages: stage,
                all,
                seed,
                out,
                horizon,
            },
        )
        .map(Some),
        Command::Sweep {
            config,
            t1,
            s0,
            epsilon,
            k_eval,
            node,
            seed,
            out,
            horizon,
        } => {
            let spec = SweepSpec {
                t1,
                s0,
                epsilon,
                k_eval,
                node,
            };
            cmd_sweep(
                &config,
                &spec,
                &RunOptions {
                    seed,
                    out,
                    horizon,
                    ..RunOptions::default()
                },
            )
            .map(Some)
        }
        Command::Compare {
            config,
            seed,
            out,
            horizon,
        } => cmd_compare(
            &config,
            &RunOptions {
                seed,
                out,
                horizon,
                ..RunOptions::default()
            },
        )
        .map(Some),
    };

    match result {
        Ok(Some(dir)) => {
            println!("artifacts in {}", dir.display());
            ExitCode::SUCCESS
        }
        Ok(None) => {
            println!("validation passed");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
