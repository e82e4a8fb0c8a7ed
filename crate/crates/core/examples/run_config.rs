//! Parse a configuration file and run it in-process, printing the record as
//! JSON. Defaults to `configs/discord.cfg`.
//!
//!     cargo run --example run_config -- crates/core/configs/theorem-check.cfg

use discord_witness::experiment::{parse_config, run, write_record, OutputFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/discord.cfg").to_string());
    let text = std::fs::read_to_string(&path)?;
    let cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(errors) => {
            for e in &errors {
                eprintln!("{path}: {e}");
            }
            std::process::exit(2);
        }
    };
    let record = run(&cfg)?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }
    write_record(&record, OutputFormat::Json, std::io::stdout().lock())?;
    eprintln!(
        "{} in {:.3}s",
        record.command,
        record.duration.as_secs_f64()
    );
    Ok(())
}
