//! One module per subcommand.

pub mod cluster;
pub mod ingest;
pub mod match_cmd;
pub mod multimatch;
pub mod power;

use std::path::PathBuf;

use omnimatch::assign::AlignMode;
use serde::Serialize;

use crate::config::ModeName;
use crate::error::{CliError, CliResult};
use crate::output::Report;

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct Context {
    pub out_dir: PathBuf,
    pub timestamp: bool,
}

impl Context {
    pub fn report(&self, command: &'static str, seed: u64, config: &impl Serialize) -> CliResult<Report> {
        Report::new(&self.out_dir, command, seed, config, self.timestamp)
    }
}

/// Anchor defaults to the last graph.
pub fn align_mode(mode: ModeName, anchor: Option<usize>, m: usize) -> CliResult<AlignMode> {
    match mode {
        ModeName::Pairwise => Ok(AlignMode::Pairwise),
        ModeName::Anchor => {
            let a = anchor.unwrap_or(m.saturating_sub(1));
            if a >= m {
                return Err(CliError::usage(format!("anchor {a} out of range for {m} graphs")));
            }
            Ok(AlignMode::Anchor(a))
        }
    }
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
