//! Run outputs: CSV tables, the echoed config and the JSON summary.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a float with the shortest representation that round-trips.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub struct Report {
    dir: PathBuf,
    command: &'static str,
    seed: u64,
    config: Value,
    timestamp: bool,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

impl Report {
    pub fn new(dir: &Path, command: &'static str, seed: u64, config: &impl Serialize, timestamp: bool) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        let config = serde_json::to_value(config).map_err(|source| CliError::Json { path: dir.join("config.json"), source })?;
        Ok(Report { dir: dir.to_path_buf(), command, seed, config, timestamp, outputs: Vec::new(), warnings: Vec::new() })
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        if !self.warnings.contains(&msg) {
            self.warnings.push(msg);
        }
    }

    pub fn warn_all(&mut self, msgs: impl IntoIterator<Item = String>) {
        for m in msgs {
            self.warn(m);
        }
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.dir.join(name);
        let csv_err = |source| CliError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len(), "{name}");
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes `config.json` (the effective configuration) and `summary.json`.
    pub fn finish(mut self, results: Value) -> CliResult<()> {
        let config_text = pretty(&self.config, &self.dir.join("config.json"))?;
        self.write_text("config.json", &config_text)?;
        let mut summary = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "config": self.config,
            "outputs": self.outputs,
            "results": results,
            "warnings": self.warnings,
        });
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            summary["generated_at_unix"] = json!(secs);
        }
        let path = self.dir.join("summary.json");
        let text = pretty(&summary, &path)?;
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        log::info!("wrote {} outputs to {}", self.outputs.len() + 1, self.dir.display());
        Ok(())
    }
}

fn pretty(v: &Value, path: &Path) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    s.push('\n');
    Ok(s)
}
