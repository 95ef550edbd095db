use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casimir_cli::output::{render, render_checks};
use casimir_cli::{parse_config, run, CliError, Family, Format};
use casimir_core::verify::run_suite;
use clap::{Args, Parser, Subcommand};

/// Casimir interaction free energy, internal energy and entropy of
/// oscillators coupled through mediators, and of retarded dipole pairs.
#[derive(Parser)]
#[command(name = "casimir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coordinate-coupled three-oscillator model.
    Tm3(RunArgs),
    /// Momentum-coupled three-oscillator model.
    Te3(RunArgs),
    /// Two oscillators coupled through a bath of mediators (tm_bath or te_bath).
    Bath(RunArgs),
    /// Pair of isotropic oscillating dipoles; temperature or distance sweep.
    Dipole(RunArgs),
    /// Run the invariant and oracle suite and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (overrides output.path).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (overrides output.format).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Override a scalar config field, e.g. `--set sweep.T_min=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format; plain text when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tm3(args) => run_model(Family::Tm3, args),
        Command::Te3(args) => run_model(Family::Te3, args),
        Command::Bath(args) => run_model(Family::Bath, args),
        Command::Dipole(args) => run_model(Family::Dipole, args),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.kind().exit_code())
        }
    }
}

fn run_model(family: Family, args: RunArgs) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| CliError::io(args.config.display().to_string(), e))?;
    let mut overrides = args.overrides;
    if let Some(f) = args.format {
        overrides.push(format!("output.format={}", format_name(f)));
    }
    let mut config = parse_config(&text, family, &overrides)?;
    if let Some(out) = args.out {
        config.output.path = Some(out);
    }
    let report = run(&config)?;
    emit(&render(&report, config.format()), config.output.path.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let results = run_suite();
    emit(&render_checks(&results, args.format), args.out.as_deref())?;
    Ok(if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}
