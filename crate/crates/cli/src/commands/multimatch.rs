use omnimatch::assign::{align_embedded, embed_for_matching, DimSpec};
use omnimatch::graph::apply_shuffle;
use omnimatch::metrics::{pairwise_distances, DistanceMatrix};
use omnimatch::models::{random_shuffle, sample_dirichlet_latents, sample_rdpg_with, InnerProductPolicy, ModelConfig};
use omnimatch::rng::{replicate_rng, stream_id};
use omnimatch::{par_map, Graph, SeedSplit};
use rand::seq::index::sample;
use rand::Rng;
use serde_json::json;

use super::{align_mode, Context};
use crate::config::{ModeName, MultiSource, MultimatchConfig};
use crate::data::load_file_source;
use crate::error::{CliError, CliResult};
use crate::output::{num, Report};

fn validate(cfg: &MultimatchConfig) -> CliResult<()> {
    if cfg.d == 0 {
        return Err(CliError::usage("`d` must be positive"));
    }
    if cfg.modes.is_empty() {
        return Err(CliError::usage("`modes` is empty"));
    }
    if cfg.replicates == 0 {
        return Err(CliError::usage("`replicates` must be positive"));
    }
    Ok(())
}

/// Distances for one set of graphs, one matrix per configured mode.
fn distances(cfg: &MultimatchConfig, graphs: &[Graph], split: &SeedSplit) -> CliResult<Vec<DistanceMatrix>> {
    let embedded = embed_for_matching(graphs, split, DimSpec::Fixed(cfg.d))?;
    cfg.modes
        .iter()
        .map(|&mode| {
            let a = align_embedded(embedded.clone(), align_mode(mode, cfg.anchor, graphs.len())?)?;
            Ok(pairwise_distances(graphs, split, |i, j| a.matching(i, j).permutation.clone(), cfg.squared)?)
        })
        .collect()
}

fn shuffle_all(graphs: &mut [Graph], split: &SeedSplit, rng: &mut impl Rng) -> CliResult<()> {
    for g in graphs.iter_mut() {
        let q = random_shuffle(split.u(), rng);
        *g = apply_shuffle(g, split, &q)?;
    }
    Ok(())
}

struct Study {
    m: usize,
    /// `runs[u_index][replicate][mode_index]`
    runs: Vec<Vec<Vec<DistanceMatrix>>>,
    us: Vec<usize>,
    perturbed: Option<usize>,
}

pub fn run(ctx: &Context, cfg: MultimatchConfig) -> CliResult<()> {
    validate(&cfg)?;
    let mut report = ctx.report("multimatch", cfg.seed, &cfg)?;
    let study = match &cfg.source {
        MultiSource::Model(model) => {
            if model.m < 2 {
                return Err(CliError::usage("multimatch needs m >= 2 graphs"));
            }
            if model.perturb_rows > model.n {
                return Err(CliError::usage("`perturb_rows` exceeds n"));
            }
            let model_cfg = ModelConfig::new(model.n, cfg.d, model.m, cfg.d + model.dirichlet_extra, cfg.seed)?;
            let perturbed = replicate_rng(cfg.seed, stream_id(0, 0)).random_range(0..model.m);
            let mut runs = Vec::new();
            for &u in &cfg.u {
                if u > model.n || model.n - u < cfg.d {
                    return Err(CliError::usage(format!("u = {u} leaves fewer than d = {} seeds", cfg.d)));
                }
                let split = SeedSplit::canonical(model.n, model.n - u)?;
                // the same graphs are drawn for every u
                let reps = par_map(cfg.replicates, |rep| -> CliResult<Vec<DistanceMatrix>> {
                    let mut rng = replicate_rng(cfg.seed, stream_id(1, rep as u64));
                    let x = sample_dirichlet_latents(&model_cfg, &mut rng);
                    let rows = sample(&mut rng, model.n, model.perturb_rows).into_vec();
                    let y = model.noise.apply(&x, &rows, model.err, &mut rng)?;
                    let mut graphs = (0..model.m)
                        .map(|i| sample_rdpg_with(if i == perturbed { &y } else { &x }, &mut rng, InnerProductPolicy::Clamp))
                        .collect::<omnimatch::Result<Vec<_>>>()?;
                    let mut shuffle_rng = replicate_rng(cfg.seed, stream_id(2, rep as u64));
                    shuffle_all(&mut graphs, &split, &mut shuffle_rng)?;
                    distances(&cfg, &graphs, &split)
                });
                runs.push(reps.into_iter().collect::<CliResult<Vec<_>>>()?);
            }
            Study { m: model.m, runs, us: cfg.u.clone(), perturbed: Some(perturbed) }
        }
        MultiSource::Files(src) => {
            let data = load_file_source(src)?;
            report.warn_all(data.warnings.clone());
            let reps = if src.aligned {
                par_map(cfg.replicates, |rep| -> CliResult<Vec<DistanceMatrix>> {
                    let mut graphs = data.graphs.clone();
                    shuffle_all(&mut graphs, &data.split, &mut replicate_rng(cfg.seed, stream_id(2, rep as u64)))?;
                    distances(&cfg, &graphs, &data.split)
                })
            } else {
                vec![distances(&cfg, &data.graphs, &data.split)]
            };
            let runs = vec![reps.into_iter().collect::<CliResult<Vec<_>>>()?];
            Study { m: data.graphs.len(), runs, us: vec![data.split.u()], perturbed: None }
        }
    };
    let results = write_study(&cfg, &study, &mut report)?;
    report.finish(results)
}

fn write_study(cfg: &MultimatchConfig, study: &Study, report: &mut Report) -> CliResult<serde_json::Value> {
    let mut header = vec!["graph".to_string()];
    header.extend((0..study.m).map(|g| format!("g{g}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut ranking_rows = Vec::new();
    let mut replicate_rows = Vec::new();
    let mut cells = Vec::new();
    let anchor = cfg.modes.contains(&ModeName::Anchor).then(|| cfg.anchor.unwrap_or(study.m - 1));

    for (ui, &u) in study.us.iter().enumerate() {
        for (mi, mode) in cfg.modes.iter().enumerate() {
            let mats: Vec<DistanceMatrix> = study.runs[ui].iter().map(|r| r[mi].clone()).collect();
            let mean = DistanceMatrix::mean(&mats)?;
            let rows: Vec<Vec<String>> = (0..study.m)
                .map(|i| std::iter::once(format!("g{i}")).chain((0..study.m).map(|j| num(mean.get(i, j)))).collect())
                .collect();
            report.write_csv(&format!("distances_u{u}_{mode}.csv"), &header, &rows)?;

            let means = mean.row_means();
            for (rank, g) in mean.anomaly_ranking().into_iter().enumerate() {
                ranking_rows.push(vec![u.to_string(), mode.to_string(), (rank + 1).to_string(), g.to_string(), num(means[g])]);
            }
            let mut hits = 0;
            for (rep, d) in mats.iter().enumerate() {
                let top = d.anomaly_ranking()[0];
                hits += usize::from(Some(top) == study.perturbed);
                replicate_rows.push(vec![
                    u.to_string(),
                    mode.to_string(),
                    rep.to_string(),
                    top.to_string(),
                    num(d.row_means()[top]),
                ]);
            }
            let off_diag = mean.values().sum() / (study.m * (study.m - 1)) as f64;
            cells.push(json!({
                "u": u,
                "mode": mode,
                "replicates": mats.len(),
                "top_ranked": mean.anomaly_ranking()[0],
                "detection_rate": study.perturbed.map(|_| hits as f64 / mats.len() as f64),
                "mean_distance": off_diag,
            }));
        }
    }
    report.write_csv("ranking.csv", &["u", "mode", "rank", "graph", "row_mean"], &ranking_rows)?;
    report.write_csv("replicates.csv", &["u", "mode", "replicate", "top_graph", "top_row_mean"], &replicate_rows)?;
    Ok(json!({
        "graphs": study.m,
        "anchor": anchor,
        "perturbed_graph": study.perturbed,
        "cells": cells,
    }))
}
