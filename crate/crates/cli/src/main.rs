use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use driven_lindblad_cli::{check_validity, render_csv, simulate, sweep, RawConfig, RunError, SweepPlan};

#[derive(Parser)]
#[command(name = "driven-lindblad", version, about = "Driven-qubit open-system simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `engine` key.
    #[arg(long)]
    engine: Option<String>,
    /// Output file (simulate) or directory (sweep).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one engine and writes CSV.
    Simulate(Common),
    /// Prints the regime checks; exit code 3 if any fails.
    CheckValidity(Common),
    /// Runs one simulation per value of `sweep_key`.
    Sweep(Common),
}

fn load(c: &Common) -> Result<RawConfig, RunError> {
    let mut raw = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            RawConfig::parse(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        }
        None => RawConfig::default(),
    };
    for s in &c.set {
        raw.apply_override(s)?;
    }
    if let Some(e) = &c.engine {
        raw.set("engine", e)?;
    }
    Ok(raw)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| RunError::Config(format!("--out {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<u8, RunError> {
    match cmd {
        Command::Simulate(c) => {
            let raw = load(&c)?;
            let rc = raw.resolve()?;
            let out = simulate(&rc)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            write_out(&c.out, &render_csv(&raw, &rc, &out))?;
            Ok(0)
        }
        Command::CheckValidity(c) => {
            let raw = load(&c)?;
            let rc = raw.resolve()?;
            let (text, ok) = check_validity(&raw, &rc)?;
            write_out(&c.out, &text)?;
            Ok(if ok { 0 } else { 3 })
        }
        Command::Sweep(c) => {
            let raw = load(&c)?;
            raw.resolve()?;
            let plan = SweepPlan::from_config(&raw)?;
            let dir = c.out.clone().ok_or_else(|| RunError::Config("sweep needs --out DIR".into()))?;
            let runs = sweep(&raw, &plan, &dir)?;
            let mut failed = false;
            for r in &runs {
                if let Err(e) = &r.result {
                    eprintln!("{} = {}: {e}", plan.key, r.value);
                    failed = true;
                }
            }
            Ok(if failed { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
