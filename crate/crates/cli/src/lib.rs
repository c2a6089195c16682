//! Scenario runner and file verifier for the `decoherence` library.

pub mod config;
pub mod error;
pub mod scenarios;
pub mod summarize;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::scenarios::{channel_report, read, run_scenario, state_report};

#[derive(Debug, Parser)]
#[command(
    name = "decoherence",
    version,
    about = "Open-quantum-system scenarios and verifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario described by a key = value config file.
    Run {
        config: PathBuf,
        /// Overrides the `seed` key.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the `output` key. CSV scenarios write their verdict
        /// next to it with a `.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=value` override, repeatable; later ones win.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Validate a density-matrix file, with a PPT test if `--bipartite` is given.
    Check {
        matrix_file: PathBuf,
        /// Subsystem dimensions such as `2x2`.
        #[arg(long)]
        bipartite: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check completeness and complete positivity of a Kraus channel file.
    Channel {
        channel_file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge verdict JSON files into one report.
    Summarize {
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail =
        |e: std::io::Error| CliError::validation(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn path_str(p: &Path) -> CliResult<&str> {
    p.to_str()
        .ok_or_else(|| CliError::parse(format!("path {} is not valid UTF-8", p.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn sidecar(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        let mut s = out.as_os_str().to_owned();
        s.push(".verdict.json");
        PathBuf::from(s)
    } else {
        out.with_extension("json")
    }
}

/// Executes one command and returns the summary line for standard output.
pub fn execute(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            set,
        } => {
            let mut cfg = Config::parse(&read(path_str(&config)?)?)
                .map_err(|e| e.context(config.display()))?;
            for pair in &set {
                cfg.set_pair(pair)?;
            }
            if let Some(seed) = seed {
                cfg.set("seed", seed.to_string());
            }
            if let Some(out) = &out {
                cfg.set("output", path_str(out)?);
            }
            let artifacts = run_scenario(&cfg)?;
            let output = cfg.raw("output").map(PathBuf::from);
            match (&artifacts.csv, &output) {
                (Some(csv), Some(path)) => {
                    write_atomic(path, csv)?;
                    write_atomic(&sidecar(path), &pretty(&artifacts.verdict))?;
                }
                (Some(_), None) => {
                    return Err(CliError::validation(format!(
                        "scenario {} writes CSV and needs --out or an output key",
                        artifacts.scenario.name()
                    )))
                }
                (None, Some(path)) => write_atomic(path, &pretty(&artifacts.verdict))?,
                (None, None) => {}
            }
            Ok(artifacts.verdict.to_string())
        }
        Command::Check {
            matrix_file,
            bipartite,
            tol,
            out,
        } => {
            let path = path_str(&matrix_file)?;
            let mut report = state_report(&read(path)?, bipartite.as_deref(), tol)
                .map_err(|e| e.context(path))?;
            report["file"] = Value::from(path);
            if let Some(out) = out {
                write_atomic(&out, &pretty(&report))?;
            }
            Ok(report.to_string())
        }
        Command::Channel {
            channel_file,
            tol,
            out,
        } => {
            let path = path_str(&channel_file)?;
            let mut report = channel_report(&read(path)?, tol).map_err(|e| e.context(path))?;
            report["file"] = Value::from(path);
            if report["pass"] != Value::Bool(true) {
                return Err(CliError::validation(format!(
                    "{path}: not a channel: {report}"
                )));
            }
            if let Some(out) = out {
                write_atomic(&out, &pretty(&report))?;
            }
            Ok(report.to_string())
        }
        Command::Summarize { files, out } => {
            let mut texts = Vec::with_capacity(files.len());
            for f in &files {
                let p = path_str(f)?;
                texts.push((p.to_string(), read(p)?));
            }
            let report = summarize::summarize(&texts)?;
            if let Some(out) = out {
                write_atomic(&out, &pretty(&report))?;
            }
            Ok(report.to_string())
        }
    }
}
