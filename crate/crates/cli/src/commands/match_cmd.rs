use omnimatch::assign::{align_embedded, cost_matrix, embed_for_matching, omnimatch, soft_match, DimSpec};
use omnimatch::graph::apply_shuffle;
use omnimatch::metrics::{matching_accuracy, soft_accuracy};
use omnimatch::models::{random_shuffle, sample_dirichlet_latents, sample_jrdpg, ModelConfig};
use omnimatch::rng::{replicate_rng, stream_id};
use omnimatch::{par_map, Graph, PermutationMap, SeedSplit};
use serde_json::json;

use super::{align_mode, mean_sd, Context};
use crate::config::{MatchConfig, MatchSource};
use crate::data::{load_file_source, FileData};
use crate::error::{CliError, CliResult};
use crate::output::{num, Report};

const HEADER: [&str; 10] = ["n", "s", "u", "d", "method", "k", "accuracy_mean", "accuracy_sd", "n_mc", "seed"];

fn validate(cfg: &MatchConfig) -> CliResult<()> {
    if cfg.d.is_empty() || cfg.d.contains(&0) {
        return Err(CliError::usage("`d` needs at least one positive dimension"));
    }
    if cfg.k.contains(&0) {
        return Err(CliError::usage("soft matching needs every k >= 1"));
    }
    if !cfg.hard && cfg.k.is_empty() {
        return Err(CliError::usage("nothing to report: `hard` is false and `k` is empty"));
    }
    if cfg.n_mc == 0 {
        return Err(CliError::usage("`n_mc` must be positive"));
    }
    Ok(())
}

/// Labels of the reported methods, in column order of a replicate's result.
fn methods(cfg: &MatchConfig) -> Vec<(&'static str, Option<usize>)> {
    let mut out = Vec::new();
    if cfg.hard {
        out.push(("hard", None));
    }
    out.extend(cfg.k.iter().map(|&k| ("soft", Some(k))));
    out
}

/// Accuracy of every configured method for graph 0 against graph 1, where
/// graph 1's unseeded block was shuffled by `truth`.
fn score(cfg: &MatchConfig, graphs: &[Graph], split: &SeedSplit, d: usize, truths: &[PermutationMap]) -> CliResult<Vec<f64>> {
    let embedded = embed_for_matching(graphs, split, DimSpec::Fixed(d))?;
    let m = graphs.len();
    let mut acc = Vec::new();
    if cfg.hard {
        let a = align_embedded(embedded.clone(), align_mode(cfg.mode, cfg.anchor, m)?)?;
        let mut total = 0.0;
        for j in 1..m {
            total += matching_accuracy(&a.matching(0, j).permutation, &truths[j - 1])?;
        }
        acc.push(total / (m - 1) as f64);
    }
    let pos = &embedded.out_of_sample;
    for &k in &cfg.k {
        let mut total = 0.0;
        for j in 1..m {
            let soft = soft_match(&cost_matrix(&pos[0].positions, &pos[j].positions)?, k)?;
            total += soft_accuracy(&soft, &truths[j - 1])?;
        }
        acc.push(total / (m - 1) as f64);
    }
    Ok(acc)
}

fn push_rows(
    rows: &mut Vec<Vec<String>>,
    cfg: &MatchConfig,
    (n, u, d): (usize, usize, usize),
    runs: &[Vec<f64>],
    summary: &mut Vec<serde_json::Value>,
) {
    for (c, (method, k)) in methods(cfg).into_iter().enumerate() {
        let values: Vec<f64> = runs.iter().map(|r| r[c]).collect();
        let (mean, sd) = mean_sd(&values);
        rows.push(vec![
            n.to_string(),
            (n - u).to_string(),
            u.to_string(),
            d.to_string(),
            method.to_string(),
            k.map_or(String::new(), |k| k.to_string()),
            num(mean),
            num(sd),
            runs.len().to_string(),
            cfg.seed.to_string(),
        ]);
        summary.push(json!({"u": u, "d": d, "method": method, "k": k, "accuracy": mean}));
    }
}

pub fn run(ctx: &Context, cfg: MatchConfig) -> CliResult<()> {
    validate(&cfg)?;
    let mut report = ctx.report("match", cfg.seed, &cfg)?;
    match &cfg.source {
        MatchSource::Model(model) => {
            let mut rows = Vec::new();
            let mut cells = Vec::new();
            for (di, &d) in cfg.d.iter().enumerate() {
                for &u in &cfg.u {
                    if u > model.n || model.n - u < d {
                        return Err(CliError::usage(format!("u = {u} leaves fewer than d = {d} seeds out of n = {}", model.n)));
                    }
                    let model_cfg = ModelConfig::new(model.n, d, 2, d + model.dirichlet_extra, cfg.seed)?;
                    let split = SeedSplit::canonical(model.n, model.n - u)?;
                    // graphs depend on (d, replicate) only, so the u cells are paired
                    let runs = par_map(cfg.n_mc, |rep| -> CliResult<Vec<f64>> {
                        let mut rng = replicate_rng(cfg.seed, stream_id(di as u64 + 1, rep as u64));
                        let x = sample_dirichlet_latents(&model_cfg, &mut rng);
                        let mut graphs = sample_jrdpg(&x, 2, &mut rng)?;
                        let q = random_shuffle(u, &mut rng);
                        graphs[1] = apply_shuffle(&graphs[1], &split, &q)?;
                        score(&cfg, &graphs, &split, d, &[q])
                    });
                    let runs = runs.into_iter().collect::<CliResult<Vec<_>>>()?;
                    push_rows(&mut rows, &cfg, (model.n, u, d), &runs, &mut cells);
                }
            }
            report.write_csv("accuracy.csv", &HEADER, &rows)?;
            report.finish(json!({ "cells": cells }))
        }
        MatchSource::Files(src) => {
            let data = load_file_source(src)?;
            report.warn_all(data.warnings.clone());
            if src.aligned {
                aligned_study(&cfg, &data, &mut report)?;
                report.finish(json!({ "u": data.split.u(), "graphs": data.graphs.len() }))
            } else {
                let written = write_matchings(&cfg, &data, &mut report)?;
                report.finish(json!({ "u": data.split.u(), "graphs": data.graphs.len(), "matched_pairs": written }))
            }
        }
    }
}

/// Shuffle study on graphs that are already vertex-aligned: every replicate
/// shuffles the unseeded block of graphs `1..m` and scores the recovery.
fn aligned_study(cfg: &MatchConfig, data: &FileData, report: &mut Report) -> CliResult<()> {
    let (split, n, u) = (&data.split, data.split.n(), data.split.u());
    let m = data.graphs.len();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for &d in &cfg.d {
        let runs = par_map(cfg.n_mc, |rep| -> CliResult<Vec<f64>> {
            let mut rng = replicate_rng(cfg.seed, stream_id(0, rep as u64));
            let mut graphs = data.graphs.clone();
            let mut truths = Vec::with_capacity(m - 1);
            for g in graphs.iter_mut().skip(1) {
                let q = random_shuffle(u, &mut rng);
                *g = apply_shuffle(g, split, &q)?;
                truths.push(q);
            }
            score(cfg, &graphs, split, d, &truths)
        });
        let runs = runs.into_iter().collect::<CliResult<Vec<_>>>()?;
        push_rows(&mut rows, cfg, (n, u, d), &runs, &mut cells);
    }
    report.write_csv("accuracy.csv", &HEADER, &rows)
}

/// Real graphs without ground truth: write the matchings in original vertex ids.
fn write_matchings(cfg: &MatchConfig, data: &FileData, report: &mut Report) -> CliResult<usize> {
    let m = data.graphs.len();
    let ids = data.original.unseeded_ids();
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for &d in &cfg.d {
        let a = omnimatch(&data.graphs, &data.split, DimSpec::Fixed(d), align_mode(cfg.mode, cfg.anchor, m)?)?;
        for (g, flagged) in a.unidentifiable().iter().enumerate() {
            if !flagged.is_empty() {
                report.warn(format!(
                    "graph {g}: {} unseeded vertices have no seed neighbours and cannot be placed",
                    flagged.len()
                ));
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                let r = a.matching(i, j);
                let c = a.cost_matrix(i, j)?;
                for v in 0..r.permutation.len() {
                    let w = r.permutation.get(v);
                    hard.push(vec![
                        d.to_string(),
                        i.to_string(),
                        j.to_string(),
                        ids[v].to_string(),
                        ids[w].to_string(),
                        num(c.get(v, w)),
                    ]);
                }
                for &k in &cfg.k {
                    let sm = soft_match(&c, k)?;
                    for (v, list) in sm.candidates.iter().enumerate() {
                        for (rank, &(w, cost)) in list.iter().enumerate() {
                            soft.push(vec![
                                d.to_string(),
                                k.to_string(),
                                i.to_string(),
                                j.to_string(),
                                ids[v].to_string(),
                                (rank + 1).to_string(),
                                ids[w].to_string(),
                                num(cost),
                            ]);
                        }
                    }
                }
            }
        }
    }
    let count = hard.len();
    if cfg.hard {
        report.write_csv("matchings.csv", &["d", "graph_i", "graph_j", "vertex_i", "vertex_j", "cost"], &hard)?;
    }
    if !cfg.k.is_empty() {
        report.write_csv(
            "soft_matchings.csv",
            &["d", "k", "graph_i", "graph_j", "vertex_i", "rank", "vertex_j", "cost"],
            &soft,
        )?;
    }
    Ok(count)
}
