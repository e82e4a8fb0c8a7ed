use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use discord_witness::experiment::{execute, parse_config_with_overrides, Command};

#[derive(Parser, Debug)]
#[command(
    name = "discord-witness",
    version,
    about = "Run a configured discord-witness experiment"
)]
struct Cli {
    /// One of: discord, witness-trajectory, haar-average, theorem-check,
    /// lemma-check, choi-check, structured-average
    command: String,
    /// Path to the `key = value` configuration file
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Monte Carlo worker threads
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: config: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if Command::from_name(&cli.command).is_none() {
        eprintln!("error: command: unknown command `{}`", cli.command);
        return ExitCode::from(2);
    }

    let mut overrides = vec![("command", cli.command.clone())];
    if let Some(s) = cli.seed {
        overrides.push(("seed", s.to_string()));
    }
    if let Some(o) = &cli.output {
        overrides.push(("output", o.display().to_string()));
    }
    if let Some(f) = &cli.format {
        overrides.push(("format", f.clone()));
    }
    if let Some(w) = cli.workers {
        overrides.push(("workers", w.to_string()));
    }

    let cfg = match parse_config_with_overrides(&text, &overrides) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("error: invalid configuration");
            for e in errors {
                eprintln!("  {e}");
            }
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(record) => {
            for w in &record.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} {} seed={} workers={} in {:.3}s",
                record.version,
                record.command,
                record.seed,
                cfg.workers,
                record.duration.as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
