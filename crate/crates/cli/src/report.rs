//! Exit-code classification and output files.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use qdrepeater::ParameterSet;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum Failure {
    /// Acceptance or oracle checks failed.
    Validation(String),
    Usage(anyhow::Error),
    Config(anyhow::Error),
    /// I/O and other runtime faults.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) | Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Usage(e) => write!(f, "{e:#}"),
            Failure::Config(e) => write!(f, "configuration: {e:#}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

/// Provenance of one command run.
pub struct Provenance<'a> {
    pub command: &'static str,
    pub config: Option<&'a Path>,
    pub overrides: &'a [String],
    pub params: &'a ParameterSet,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn metadata(p: &Provenance<'_>, extra: Value) -> Value {
    json!({
        "command": p.command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_file": p.config.map(|c| c.display().to_string()),
        "overrides": p.overrides,
        "seed": p.seed,
        "trials": p.trials,
        "parameters": p.params,
        "parameters_config": p.params.to_config_string(),
        "details": extra,
    })
}

/// Writes `body` to `out` (with its metadata companion) or to stdout.
pub fn emit(out: Option<&Path>, body: &str, provenance: &Provenance<'_>, extra: Value) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, body)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(Failure::Runtime)?;
            let meta = serde_json::to_string_pretty(&metadata(provenance, extra))
                .context("serializing metadata")
                .map_err(Failure::Runtime)?;
            let meta_path = metadata_path(path);
            fs::write(&meta_path, meta + "\n")
                .with_context(|| format!("writing {}", meta_path.display()))
                .map_err(Failure::Runtime)
        }
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .context("writing to stdout")
            .map_err(Failure::Runtime),
    }
}
