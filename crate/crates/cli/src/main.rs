mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::{Command, RunConfig};

#[derive(Parser)]
#[command(name = "extremal", version, about = "Regularity indicators, certificates and radial branches for -Δu = λf(u)")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hypothesis checks, growth indicators and regularity verdicts.
    Analyze(Common),
    /// Test-function profile, first-integral residual and growth chain.
    Certificate(Common),
    /// Minimal branch in one dimension.
    Solve(Common),
    /// Minimal branches over a list of dimensions, in parallel.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (flat key = value, optional [command] sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog name (exp, power, example_1_1, example_1_2) or an expression in t.
    #[arg(long)]
    f: Option<String>,
    /// Comma-separated catalog parameters.
    #[arg(long)]
    params: Option<String>,
    /// Dimension: a value, a comma list or a:b:step.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated subset of csv, json, gnuplot.
    #[arg(long)]
    format: Option<String>,
    /// Number of radial nodes.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    beta1: Option<String>,
    #[arg(long)]
    beta3: Option<String>,
    /// thm11 (ξ = β₁ f/F) or thm12 (ξ = f/(2F)).
    #[arg(long)]
    xi: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long = "t-max")]
    t_max: Option<String>,
    /// Any config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(command: Command, args: Common) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::defaults(command);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        config.apply_file(&text)?;
    }
    let flags = [
        ("f", args.f),
        ("params", args.params),
        ("n", args.n),
        ("out", args.out),
        ("format", args.format),
        ("grid", args.grid),
        ("jobs", args.jobs),
        ("beta1", args.beta1),
        ("beta3", args.beta3),
        ("xi", args.xi),
        ("t0", args.t0),
        ("t_max", args.t_max),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    for pair in &args.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{pair}`")))?;
        config.set(key.trim(), value)?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Certificate(a) => (Command::Certificate, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    let outcome = resolve(command, args).and_then(|config| commands::run(&config));
    match outcome {
        Ok(artifacts) => {
            for path in artifacts.written() {
                println!("wrote {}", path.display());
            }
            println!("config_hash: {}", artifacts.hash());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
