//! Command-line front end.
//!
//! Every run writes `result.json`, `report.txt` and `effective-config.toml`
//! into the output directory, plus command-specific CSV files. Exit codes:
//! 0 success, 2 failed precondition or predicate, 1 anything else.

pub mod config;
mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
pub use config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Envelope,
    Reduce,
    Membrane,
    GammaProbe,
    Check,
    OracleFixtures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Envelope => "envelope",
            Command::Reduce => "reduce",
            Command::Membrane => "membrane",
            Command::GammaProbe => "gamma-probe",
            Command::Check => "check",
            Command::OracleFixtures => "oracle-fixtures",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "quasirelax", version, about = "Quasiconvex envelope brackets, membrane reduction and thin-film probes")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory (default: `out` in the config, else `./out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced, before it is written out.
pub struct Outcome {
    /// Fields merged into `result.json`.
    pub fields: Map<String, Value>,
    pub csv: Vec<(String, String)>,
    pub report: String,
    /// Set when a predicate failed: the run completes with exit code 2.
    pub failed: Option<String>,
}

pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    run(&cli)
}

/// Runs one command and writes its outputs; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let command = cli.command.name();
    let text = match &cli.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return 1;
            }
        },
        None => String::new(),
    };
    let loaded = config::load(&text, command, &cli.overrides);
    let out = cli
        .out
        .clone()
        .or_else(|| loaded.as_ref().ok().and_then(|c| c.out.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return 1;
    }
    let result = loaded.and_then(|cfg| {
        fs::write(out.join("effective-config.toml"), config::to_toml(&cfg)?)?;
        let outcome = commands::execute(cli.command, &cfg)?;
        Ok((cfg, outcome))
    });
    match emit(&out, command, result) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: cannot write outputs: {e}");
            1
        }
    }
}

fn emit(out: &Path, command: &str, result: Result<(RunConfig, Outcome)>) -> Result<i32> {
    let mut doc = Map::new();
    doc.insert("command".into(), json!(command));
    let (code, report) = match result {
        Ok((cfg, outcome)) => {
            let code = if outcome.failed.is_some() { 2 } else { 0 };
            doc.insert("status".into(), json!(if code == 0 { "ok" } else { "predicate-failed" }));
            doc.insert("exit_code".into(), json!(code));
            doc.insert("integrand".into(), commands::integrand_summary(&cfg));
            doc.insert(
                "error".into(),
                match &outcome.failed {
                    Some(msg) => json!({"kind": "predicate", "message": msg,
                                        "witness": outcome.fields.get("witness").cloned().unwrap_or(Value::Null)}),
                    None => Value::Null,
                },
            );
            for (k, v) in outcome.fields {
                doc.insert(k, v);
            }
            for (name, body) in &outcome.csv {
                fs::write(out.join(name), body)?;
            }
            (code, outcome.report)
        }
        Err(e) => {
            let code = if matches!(e, Error::Precondition { .. }) { 2 } else { 1 };
            let witness = match &e {
                Error::Precondition { witness: Some(w), .. } => json!(w),
                _ => Value::Null,
            };
            doc.insert("status".into(), json!(if code == 2 { "precondition-failed" } else { "error" }));
            doc.insert("exit_code".into(), json!(code));
            doc.insert("integrand".into(), Value::Null);
            doc.insert("error".into(), json!({"kind": e.kind(), "message": e.to_string(), "witness": witness}));
            eprintln!("error: {e}");
            (code, format!("{command}: {e}\n"))
        }
    };
    let body = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(out.join("result.json"), body + "\n")?;
    fs::write(out.join("report.txt"), report)?;
    Ok(code)
}
