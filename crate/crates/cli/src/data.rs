//! Reading user-supplied graphs, seed lists and label sidecars.

use std::path::Path;

use omnimatch::graph::io::load_graph;
use omnimatch::{Graph, SeedSplit};

use crate::config::{FileSource, WeightTransform};
use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Loads every graph and checks that they share a vertex count.
pub fn load_graphs(paths: &[std::path::PathBuf], transform: WeightTransform) -> CliResult<(Vec<Graph>, Vec<String>)> {
    let mut graphs = Vec::with_capacity(paths.len());
    let mut warnings = Vec::new();
    for path in paths {
        let loaded = load_graph(path)?;
        warnings.extend(loaded.warnings);
        let g = match transform {
            WeightTransform::Raw => loaded.graph,
            WeightTransform::Log1p => loaded.graph.map_weights(f64::ln_1p)?,
        };
        if let Some(first) = graphs.first().map(Graph::n) {
            if g.n() != first {
                return Err(CliError::usage(format!(
                    "{}: {} vertices, but {} has {first}",
                    path.display(),
                    g.n(),
                    paths[0].display()
                )));
            }
        }
        graphs.push(g);
    }
    Ok((graphs, warnings))
}

/// One 0-based vertex index per line; blank lines and `#` comments skipped.
pub fn load_seeds(path: &Path, n: usize) -> CliResult<Vec<usize>> {
    let text = read(path)?;
    let mut seeds = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: usize = line
            .parse()
            .map_err(|_| CliError::usage(format!("{}:{}: `{line}` is not a vertex index", path.display(), lineno + 1)))?;
        if v >= n {
            return Err(CliError::usage(format!("{}:{}: seed {v} out of range for {n} vertices", path.display(), lineno + 1)));
        }
        seeds.push(v);
    }
    Ok(seeds)
}

/// One label token per line, in graph order. Labels are numbered by first
/// appearance.
pub fn load_labels(path: &Path, m: usize) -> CliResult<(Vec<usize>, Vec<String>)> {
    let text = read(path)?;
    let mut names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let id = match names.iter().position(|n| n == line) {
            Some(id) => id,
            None => {
                names.push(line.to_string());
                names.len() - 1
            }
        };
        labels.push(id);
    }
    if labels.len() != m {
        return Err(CliError::usage(format!("{}: {} labels for {m} graphs", path.display(), labels.len())));
    }
    Ok((labels, names))
}

/// Graphs from a file source, reordered so the seeds come first.
pub struct FileData {
    pub graphs: Vec<Graph>,
    /// Split over the reordered graphs (seeds `0..s`).
    pub split: SeedSplit,
    /// Split over the original vertex ids.
    pub original: SeedSplit,
    pub warnings: Vec<String>,
}

pub fn load_file_source(src: &FileSource) -> CliResult<FileData> {
    if src.graphs.len() < 2 {
        return Err(CliError::usage(format!("need at least two --graph files, got {}", src.graphs.len())));
    }
    let seeds_path = src
        .seeds
        .as_deref()
        .ok_or_else(|| CliError::usage("graph files need a seed list: pass --seeds <file>"))?;
    let (graphs, warnings) = load_graphs(&src.graphs, src.transform)?;
    let n = graphs[0].n();
    let seeds = load_seeds(seeds_path, n)?;
    let original = SeedSplit::from_seeds(n, &seeds)?;
    let mut canonical = Vec::with_capacity(graphs.len());
    let mut split = original.clone();
    for g in &graphs {
        let (c, s, _) = original.canonicalize(g)?;
        canonical.push(c);
        split = s;
    }
    Ok(FileData { graphs: canonical, split, original, warnings })
}
