mod commands;
mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use crate::config::{RunConfig, Verb};
use crate::error::CliError;

/// Semiclassical partition functions, classical path inventories and
/// catastrophe maps from a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "caustica", version)]
struct Cli {
    /// Command to run; the configuration must contain the matching section.
    #[arg(value_enum)]
    command: Verb,

    /// Configuration file (optional for `selftest`).
    config: Option<PathBuf>,

    /// Print the normalised configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

/// `out.csv` becomes `out_z.csv`.
fn secondary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_z.{}", ext.to_string_lossy()),
        None => format!("{stem}_z"),
    };
    path.with_file_name(name)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None if cli.command == Verb::Selftest => RunConfig::default(),
        None => return Err(CliError::Usage(format!("`{}` needs a configuration file", cli.command.key()))),
    };
    let job = cfg.job(cli.command)?;
    if cli.dump_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let spec = if cli.command == Verb::Selftest {
        None
    } else {
        Some(cfg.spec()?)
    };
    let artifact = commands::run(&job, spec.as_ref(), cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => {
            write(path, &artifact.main)?;
            if let Some(extra) = &artifact.secondary {
                write(&secondary_path(path), extra)?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let mut text = artifact.main;
            if let Some(extra) = &artifact.secondary {
                text.push('\n');
                text.push_str(extra);
            }
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
