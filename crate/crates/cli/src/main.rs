use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qnv_cli::config::{Format, RunConfig};
use qnv_cli::error::CliError;
use qnv_cli::{run, Command};

#[derive(Parser)]
#[command(name = "qnv", version, about = "Pricing and diagnostics for quadratic normal volatility models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Root profile, solution branch and martingale status
    Classify(Opts),
    /// Price the configured claim
    Price(Opts),
    /// Run the invariant suites
    Verify(Opts),
    /// Martingale defect over the configured horizons
    Defect(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report wall-clock time in `runtime_ms`
    #[arg(long)]
    timing: bool,
}

fn execute(command: Command, opts: &Opts) -> Result<(String, Option<String>), CliError> {
    let text = std::fs::read_to_string(&opts.config)?;
    let cfg = RunConfig::parse(&text)?;
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Parse("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Resource(e.to_string()))?;
    }
    let format = opts.format.map(|f| match f {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    });
    match run(command, &cfg, format, opts.timing) {
        Ok(out) => Ok((out, cfg.path.clone())),
        Err(CliError::Verify(report)) => {
            emit(&report, cfg.path.as_deref())?;
            Err(CliError::Verify("one or more suites failed".into()))
        }
        Err(e) => Err(e),
    }
}

fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, opts) = match &cli.command {
        Cmd::Classify(o) => (Command::Classify, o),
        Cmd::Price(o) => (Command::Price, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Defect(o) => (Command::Defect, o),
    };
    match execute(command, opts).and_then(|(out, path)| emit(&out, path.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qnv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
