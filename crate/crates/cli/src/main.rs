use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod error;
mod json;
mod run;

use config::{load_config, Mode};
use error::CliError;
use run::{RunOptions, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Curvature tensors of pseudo-Finsler spaces, with oracle verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the requested tensors at every configured point and emit JSON.
    Eval(RunArgs),
    /// Compare factored formulas with the definitional oracles and run the identity suite.
    Verify(RunArgs),
    /// List catalog norms, frames and tensor names.
    Catalog,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// JSON output path; overrides `output` in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Uniform relative tolerance replacing every tolerance class.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Worker threads for point-level parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    points_parallel: Option<u64>,
}

fn execute(mode: Mode, args: &RunArgs) -> Result<i32, CliError> {
    let cfg = load_config(&args.config)?;
    if cfg.mode != mode {
        eprintln!("note: config mode is {:?}; running {:?} as requested on the command line", cfg.mode, mode);
    }
    if let Some(t) = args.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Invalid(format!("--tolerance must be a positive number, got {t}")));
        }
    }
    let opts = RunOptions {
        tolerance: args.tolerance,
        threads: args.points_parallel.map(|n| n as usize),
    };
    let outcome = match mode {
        Mode::Eval => run::run_eval(&cfg, &opts)?,
        Mode::Verify => run::run_verify(&cfg, &opts)?,
    };
    let text = json::to_string(&outcome.document, true)?;
    match args.output.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            println!("{}", outcome.summary);
        }
        None if mode == Mode::Eval => {
            print!("{text}");
            eprintln!("{}", outcome.summary);
        }
        None => println!("{}", outcome.summary),
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(args) => execute(Mode::Eval, args),
        Command::Verify(args) => execute(Mode::Verify, args),
        Command::Catalog => {
            print!("{}", run::catalog());
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
