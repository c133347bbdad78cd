//! Experiment harness for the `omnimatch` library: simulation studies,
//! matching and clustering of user graphs, and embedding ingestion. Each
//! subcommand writes long-format CSV tables, the effective config and a JSON
//! summary into the output directory.

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;

use std::path::PathBuf;

use args::{Cli, Command, DataArgs};
use commands::Context;
use config::{ClusterSource, FileSource, MatchSource, MultiSource};
use error::{CliError, CliResult};

/// Applies `--graph/--seeds/--aligned/--labels` on top of a config's file source.
fn merge_files(existing: Option<&FileSource>, data: &DataArgs, labels: Option<&PathBuf>) -> CliResult<Option<FileSource>> {
    let given = !data.graphs.is_empty() || data.seeds.is_some() || data.aligned || labels.is_some();
    if !given {
        return Ok(existing.cloned());
    }
    let mut src = match existing {
        Some(s) => s.clone(),
        None if data.graphs.is_empty() => {
            return Err(CliError::usage("--seeds, --aligned and --labels apply to graph files; pass --graph <file>"));
        }
        None => FileSource {
            graphs: Vec::new(),
            seeds: None,
            aligned: false,
            transform: Default::default(),
            labels: None,
        },
    };
    if !data.graphs.is_empty() {
        src.graphs = data.graphs.clone();
    }
    if let Some(s) = &data.seeds {
        src.seeds = Some(s.clone());
    }
    src.aligned |= data.aligned;
    if let Some(l) = labels {
        src.labels = Some(l.clone());
    }
    Ok(Some(src))
}

fn reject_labels(src: &FileSource) -> CliResult<()> {
    if src.labels.is_some() {
        return Err(CliError::usage("subject labels are only used by `cluster`"));
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    let ctx = Context { out_dir: g.out_dir.clone(), timestamp: !g.no_timestamp };
    let path = g.config.as_deref();
    match cli.command {
        Command::Match(data) => {
            let mut cfg: config::MatchConfig = config::load(path)?;
            let existing = match &cfg.source {
                MatchSource::Files(f) => Some(f),
                MatchSource::Model(_) => None,
            };
            if let Some(f) = merge_files(existing, &data, None)? {
                reject_labels(&f)?;
                cfg.source = MatchSource::Files(f);
            }
            cfg.seed = g.seed.unwrap_or(cfg.seed);
            commands::match_cmd::run(&ctx, cfg)
        }
        Command::Multimatch(args) => {
            let mut cfg: config::MultimatchConfig = config::load(path)?;
            let existing = match &cfg.source {
                MultiSource::Files(f) => Some(f),
                MultiSource::Model(_) => None,
            };
            if let Some(f) = merge_files(existing, &args.data, None)? {
                reject_labels(&f)?;
                cfg.source = MultiSource::Files(f);
            }
            cfg.anchor = args.anchor.or(cfg.anchor);
            cfg.seed = g.seed.unwrap_or(cfg.seed);
            commands::multimatch::run(&ctx, cfg)
        }
        Command::Power => {
            let mut cfg: config::PowerConfig = config::load(path)?;
            cfg.seed = g.seed.unwrap_or(cfg.seed);
            commands::power::run(&ctx, cfg)
        }
        Command::Cluster(args) => {
            let mut cfg: config::ClusterConfig = config::load(path)?;
            let existing = match &cfg.source {
                ClusterSource::Files(f) => Some(f),
                ClusterSource::Surrogate(_) => None,
            };
            if let Some(f) = merge_files(existing, &args.data, args.labels.as_ref())? {
                cfg.source = ClusterSource::Files(f);
            }
            cfg.seed = g.seed.unwrap_or(cfg.seed);
            commands::cluster::run(&ctx, cfg)
        }
        Command::IngestEmbeddings(args) => {
            let mut cfg: config::IngestConfig = config::load(path)?;
            if !args.embeddings.is_empty() {
                cfg.embeddings = args.embeddings;
            }
            cfg.threshold = args.threshold.or(cfg.threshold);
            commands::ingest::run(&ctx, cfg)
        }
    }
}
