//! Library half of the `qnv` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use config::{Format, RunConfig};
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Price,
    Verify,
    Defect,
}

/// Runs one command and returns the text to write. A failed `verify` yields
/// [`CliError::Verify`] carrying the full report.
pub fn run(command: Command, cfg: &RunConfig, format: Option<Format>, timing: bool) -> Result<String, CliError> {
    let chosen = format.or(cfg.format);
    match command {
        Command::Classify => commands::cmd_classify(cfg, chosen),
        Command::Price => commands::cmd_price(cfg, chosen.unwrap_or(Format::Json), timing),
        Command::Defect => commands::cmd_defect(cfg, chosen.unwrap_or(Format::Json)),
        Command::Verify => {
            let report = verify::verify_report(cfg)?;
            let text = match chosen.unwrap_or(Format::Json) {
                Format::Json => output::to_json(&report)?,
                Format::Csv => {
                    let rows: Vec<(String, String)> = report
                        .suites
                        .iter()
                        .map(|s| (s.name.to_string(), format!("{} worst={}", if s.passed { "pass" } else { "fail" }, s.worst.text())))
                        .collect();
                    output::pairs_csv(&rows)?
                }
            };
            if report.passed {
                Ok(text)
            } else {
                Err(CliError::Verify(text))
            }
        }
    }
}
