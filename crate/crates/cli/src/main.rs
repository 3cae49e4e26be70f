use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lg_cli::config::ExperimentConfig;
use lg_cli::runner::{run_single, run_sweep, with_threads, RunOptions};
use lg_cli::CliError;

#[derive(Parser)]
#[command(name = "lgfem", version, about = "Lagrange-Galerkin transport experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration with a single time step.
    Run(Common),
    /// Run every time step of the configuration and write summary.csv.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory (overrides `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
    /// Write mesh.txt.
    #[arg(long)]
    dump_mesh: bool,
    /// Write the field every K steps.
    #[arg(long, value_name = "EVERY_K")]
    dump_field: Option<usize>,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cfg = ExperimentConfig::parse(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (sweep, args) = match cli.command {
        Command::Run(a) => (false, a),
        Command::Sweep(a) => (true, a),
    };
    let cfg = load(&args.config)?;
    let opts = RunOptions {
        out: args.out,
        dump_mesh: args.dump_mesh,
        dump_field_every: args.dump_field,
    };
    let threads = args.threads.unwrap_or(cfg.threads);
    with_threads(threads, || {
        if sweep {
            for row in run_sweep(&cfg, &opts)? {
                match &row.outcome {
                    Ok(r) => println!("dt={} l2_error={:e} flags={}", row.dt, r.l2_error, r.flags.render()),
                    Err(m) => println!("dt={} failed: {m}", row.dt),
                }
            }
        } else {
            if cfg.dt.len() != 1 {
                return Err(CliError::Config(format!(
                    "`run` takes one time step, the configuration lists {}; use `sweep`",
                    cfg.dt.len()
                )));
            }
            let r = run_single(&cfg, cfg.dt[0], &opts)?;
            println!("dt={} l2_error={:e} flags={}", cfg.dt[0], r.l2_error, r.flags.render());
        }
        Ok(())
    })?
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
