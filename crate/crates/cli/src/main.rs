use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod run;

/// Numerical laboratory for weighted Fourier extension estimates in the plane.
#[derive(Parser)]
#[command(name = "mtlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path override, e.g. --set grid.n=512 (repeatable).
    #[arg(long = "set", value_parser = parse_kv, value_name = "KEY=VALUE")]
    set: Vec<(String, String)>,
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Force sequential execution (bit-stable reports, timings omitted).
    #[arg(long)]
    seq: bool,
    /// Override the config's rng seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Increase log verbosity on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Fit Fourier decay exponents of a curve measure.
    Decay(RunArgs),
    /// Evaluate the growth functionals and tube suprema of a weight.
    Functional(RunArgs),
    /// Run the exponent bootstrap recursion and its closed forms.
    Bootstrap(RunArgs),
    /// Measure a weighted-norm / tube-supremum ratio.
    MtRatio(RunArgs),
    /// Weak-type level-set probe of the extension operator.
    LevelSet(RunArgs),
    /// Local growth study over increasing balls.
    LocalGrowth(RunArgs),
    /// Check the convex-curve hypothesis battery.
    Hypotheses(RunArgs),
    /// Extremizer search over densities and weight parameters.
    Search(RunArgs),
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Decay(a) => ("decay", a),
        Command::Functional(a) => ("functional", a),
        Command::Bootstrap(a) => ("bootstrap", a),
        Command::MtRatio(a) => ("mt_ratio", a),
        Command::LevelSet(a) => ("level_set", a),
        Command::LocalGrowth(a) => ("local_growth", a),
        Command::Hypotheses(a) => ("hypotheses", a),
        Command::Search(a) => ("search", a),
    };
    match run::run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mtlab: {err:#}");
            ExitCode::FAILURE
        }
    }
}
