//! Text formats for graphs and real matrices.
//!
//! * Dense CSV: `n` rows of `n` comma-separated reals.
//! * Edge list: whitespace-separated `i j [w]` lines, 0-based, weight
//!   defaulting to 1. Blank lines and lines starting with `#` are skipped.
//!
//! Both loaders symmetrize and zero the diagonal, reporting a warning when a
//! nonzero diagonal entry was dropped.

use std::path::Path;

use nalgebra::DMatrix;

use super::Graph;
use crate::error::{Error, Result};

/// A graph together with the non-fatal issues found while loading it.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { source_name: source.to_string(), line, message: message.into() }
}

/// Parses rows of comma-separated reals into a matrix. Rows must all have the
/// same length.
pub fn parse_matrix_csv(text: &str, source: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| parse_err(source, lineno + 1, format!("cannot parse `{tok}` as a real number")))
                    .and_then(|v| {
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(parse_err(source, lineno + 1, "non-finite value"))
                        }
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    source,
                    lineno + 1,
                    format!("ragged row: expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Dense adjacency CSV. Entries mirrored across the diagonal must agree to
/// within `1e-9` relative; they are then averaged to make the matrix exactly
/// symmetric.
pub fn parse_dense_csv(text: &str, source: &str) -> Result<Loaded> {
    let m = parse_matrix_csv(text, source)?;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(parse_err(source, 0, format!("adjacency matrix must be square, got {}x{}", n, m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let mut warnings = Vec::new();
    let mut w = m.clone();
    for i in 0..n {
        if w[(i, i)] != 0.0 {
            warnings.push(format!("{source}: nonzero diagonal entry at vertex {i} set to zero"));
            w[(i, i)] = 0.0;
        }
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return Err(parse_err(source, i + 1, format!("matrix is not symmetric at ({i}, {j})")));
            }
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            w[(i, j)] = avg;
            w[(j, i)] = avg;
        }
    }
    for msg in &warnings {
        log::warn!("{msg}");
    }
    Ok(Loaded { graph: Graph::from_symmetric(w), warnings })
}

/// Edge list. The vertex count is `n` when given, otherwise one more than the
/// largest index seen.
pub fn parse_edge_list(text: &str, source: &str, n: Option<usize>) -> Result<Loaded> {
    let mut edges = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(parse_err(source, lineno + 1, "expected `i j [w]`"));
        }
        let idx = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| parse_err(source, lineno + 1, format!("cannot parse `{t}` as a vertex index")))
        };
        let i = idx(toks[0])?;
        let j = idx(toks[1])?;
        let w = match toks.get(2) {
            Some(t) => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(source, lineno + 1, format!("cannot parse `{t}` as a weight")))?,
            None => 1.0,
        };
        max_index = max_index.max(i).max(j);
        edges.push((lineno + 1, i, j, w));
    }
    let n = match n {
        Some(n) => {
            if let Some(&(line, i, j, _)) = edges.iter().find(|e| e.1 >= n || e.2 >= n) {
                return Err(parse_err(source, line, format!("edge ({i}, {j}) out of range for {n} vertices")));
            }
            n
        }
        None if edges.is_empty() => 0,
        None => max_index + 1,
    };
    let mut w = DMatrix::zeros(n, n);
    let mut warnings = Vec::new();
    for (line, i, j, weight) in edges {
        if i == j {
            if weight != 0.0 {
                warnings.push(format!("{source}:{line}: self-loop at vertex {i} dropped"));
            }
            continue;
        }
        w[(i, j)] = weight;
        w[(j, i)] = weight;
    }
    for msg in &warnings {
        log::warn!("{msg}");
    }
    Ok(Loaded { graph: Graph::from_symmetric(w), warnings })
}

/// Loads a graph file: `.csv` as a dense matrix, anything else as an edge list.
pub fn load_graph(path: &Path) -> Result<Loaded> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(&source, 0, format!("cannot read file: {e}")))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => parse_dense_csv(&text, &source),
        _ => parse_edge_list(&text, &source, None),
    }
}

/// Dense CSV text for a real matrix. Values use the shortest round-trip
/// representation.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
