use std::path::Path;

use nalgebra::DMatrix;
use omnimatch::graph::io::{matrix_to_csv, parse_matrix_csv};
use omnimatch::Graph;
use serde_json::json;

use super::Context;
use crate::config::IngestConfig;
use crate::error::{CliError, CliResult};

fn read_embeddings(path: &Path) -> CliResult<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let m = parse_matrix_csv(&text, &path.display().to_string())?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(CliError::usage(format!("{}: no embedding rows", path.display())));
    }
    Ok(m)
}

/// Cosine similarity between rows, zero diagonal, optionally thresholded.
pub fn cosine_graph(x: &DMatrix<f64>, threshold: Option<f64>, source: &str) -> CliResult<Graph> {
    let n = x.nrows();
    let mut unit = x.clone();
    for (i, mut row) in unit.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm == 0.0 {
            return Err(CliError::usage(format!("{source}: row {} has zero norm", i + 1)));
        }
        row /= norm;
    }
    let mut w = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let mut s = unit.row(i).dot(&unit.row(j)).clamp(-1.0, 1.0);
            if threshold.is_some_and(|t| s < t) {
                s = 0.0;
            }
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    Ok(Graph::from_matrix(w)?)
}

pub fn run(ctx: &Context, cfg: IngestConfig) -> CliResult<()> {
    if cfg.embeddings.is_empty() {
        return Err(CliError::usage("no embedding files: pass --embeddings <file> once per corpus"));
    }
    if cfg.threshold.is_some_and(|t| !t.is_finite()) {
        return Err(CliError::usage("`threshold` must be finite"));
    }
    let mut report = ctx.report("ingest-embeddings", 0, &cfg)?;
    let mut rows = None;
    let mut graphs = Vec::new();
    for (k, path) in cfg.embeddings.iter().enumerate() {
        let x = read_embeddings(path)?;
        match rows {
            None => rows = Some(x.nrows()),
            Some(r) if r != x.nrows() => {
                return Err(CliError::usage(format!(
                    "{}: {} rows, but {} has {r}",
                    path.display(),
                    x.nrows(),
                    cfg.embeddings[0].display()
                )))
            }
            Some(_) => {}
        }
        let g = cosine_graph(&x, cfg.threshold, &path.display().to_string())?;
        let degenerate = g.weights().iter().all(|&w| w == 0.0);
        if degenerate {
            report.warn(format!("{}: every similarity is zero; the graph is degenerate", path.display()));
        }
        let name = format!("graph_{k}.csv");
        report.write_text(&name, &matrix_to_csv(g.weights()))?;
        graphs.push(json!({
            "source": path,
            "file": name,
            "vertices": g.n(),
            "dimension": x.ncols(),
            "degenerate": degenerate,
        }));
    }
    report.finish(json!({ "graphs": graphs }))
}
