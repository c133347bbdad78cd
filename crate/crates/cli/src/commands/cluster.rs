use omnimatch::assign::{align_embedded, embed_for_matching, AlignMode};
use omnimatch::graph::apply_shuffle;
use omnimatch::metrics::{adjusted_rand_index, complete_linkage_clusters, pairwise_distances};
use omnimatch::models::{random_shuffle, sample_dirichlet_latents, sample_jrdpg, LatentPositions, ModelConfig};
use omnimatch::rng::{replicate_rng, stream_id};
use omnimatch::{par_map, Graph, PermutationMap, SeedSplit};
use rand::seq::index::sample;
use serde_json::json;

use super::{mean_sd, Context};
use crate::config::{ClusterConfig, ClusterMethod, ClusterSource, Surrogate};
use crate::data::{load_file_source, load_labels};
use crate::error::{CliError, CliResult};
use crate::output::num;

/// Graphs of the synthetic surrogate and their subject labels.
pub fn surrogate_graphs(sur: &Surrogate, seed: u64) -> CliResult<(Vec<Graph>, Vec<usize>)> {
    if sur.subjects == 0 || sur.scans == 0 {
        return Err(CliError::usage("surrogate needs at least one subject and one scan"));
    }
    if !(0.0..=1.0).contains(&sur.moved_fraction) {
        return Err(CliError::usage("`moved_fraction` must lie in [0, 1]"));
    }
    let model = ModelConfig::new(sur.n, sur.d, sur.scans, sur.d + sur.dirichlet_extra, seed)?;
    let mut rng = replicate_rng(seed, stream_id(0, 0));
    let base = sample_dirichlet_latents(&model, &mut rng);
    let moved = (sur.moved_fraction * sur.n as f64).round() as usize;
    let mut graphs = Vec::with_capacity(sur.subjects * sur.scans);
    let mut labels = Vec::with_capacity(sur.subjects * sur.scans);
    for subject in 0..sur.subjects {
        let fresh = sample_dirichlet_latents(&model, &mut rng);
        let mut values = base.values().clone();
        for v in sample(&mut rng, sur.n, moved) {
            values.row_mut(v).copy_from(&fresh.values().row(v));
        }
        graphs.extend(sample_jrdpg(&LatentPositions::new(values)?, sur.scans, &mut rng)?);
        labels.extend(std::iter::repeat_n(subject, sur.scans));
    }
    Ok((graphs, labels))
}

fn validate(cfg: &ClusterConfig, m: usize, subjects: usize) -> CliResult<usize> {
    if cfg.methods.is_empty() {
        return Err(CliError::usage("`methods` is empty"));
    }
    if cfg.replicates == 0 {
        return Err(CliError::usage("`replicates` must be positive"));
    }
    let k = cfg.clusters.unwrap_or(subjects);
    if k == 0 || k > m {
        return Err(CliError::usage(format!("cannot cut {m} graphs into {k} clusters")));
    }
    if let Some(a) = cfg.anchor {
        if a >= m {
            return Err(CliError::usage(format!("anchor {a} out of range for {m} graphs")));
        }
    }
    Ok(k)
}

/// ARI per configured method for one labelled collection.
fn score(cfg: &ClusterConfig, graphs: &[Graph], split: &SeedSplit, labels: &[usize], k: usize) -> CliResult<Vec<f64>> {
    let m = graphs.len();
    let needs_embedding = cfg.methods.iter().any(|&x| x != ClusterMethod::Omni);
    let embedded = if needs_embedding { Some(embed_for_matching(graphs, split, cfg.d)?) } else { None };
    cfg.methods
        .iter()
        .map(|&method| {
            let dist = match method {
                ClusterMethod::Omni => {
                    let id = PermutationMap::identity(split.u());
                    pairwise_distances(graphs, split, |_, _| id.clone(), false)?
                }
                ClusterMethod::Anchor | ClusterMethod::Pairwise => {
                    let mode = match method {
                        ClusterMethod::Anchor => AlignMode::Anchor(cfg.anchor.unwrap_or(m - 1)),
                        _ => AlignMode::Pairwise,
                    };
                    let e = embedded.clone().expect("embedding computed for aligning methods");
                    let a = align_embedded(e, mode)?;
                    pairwise_distances(graphs, split, |i, j| a.matching(i, j).permutation.clone(), false)?
                }
            };
            let clusters = complete_linkage_clusters(&dist, k)?;
            Ok(adjusted_rand_index(&clusters, labels)?)
        })
        .collect()
}

pub fn run(ctx: &Context, cfg: ClusterConfig) -> CliResult<()> {
    let mut report = ctx.report("cluster", cfg.seed, &cfg)?;
    let (graphs, labels, subjects, fixed_split, shuffle) = match &cfg.source {
        ClusterSource::Surrogate(sur) => {
            let (g, l) = surrogate_graphs(sur, cfg.seed)?;
            (g, l, sur.subjects, None, true)
        }
        ClusterSource::Files(src) => {
            let path = src.labels.as_deref().ok_or_else(|| CliError::usage("clustering files needs --labels <file>"))?;
            let data = load_file_source(src)?;
            report.warn_all(data.warnings.clone());
            let (labels, names) = load_labels(path, data.graphs.len())?;
            (data.graphs, labels, names.len(), Some(data.split), src.aligned)
        }
    };
    let m = graphs.len();
    let k = validate(&cfg, m, subjects)?;
    let n = graphs[0].n();

    let splits: Vec<SeedSplit> = match &fixed_split {
        Some(s) => vec![s.clone()],
        None => cfg
            .u
            .iter()
            .map(|&u| {
                if u > n {
                    return Err(CliError::usage(format!("u = {u} exceeds n = {n}")));
                }
                Ok(SeedSplit::canonical(n, n - u)?)
            })
            .collect::<CliResult<_>>()?,
    };
    let reps = if shuffle { cfg.replicates } else { 1 };

    let mut ari_rows = Vec::new();
    let mut table_rows = Vec::new();
    let mut table = Vec::new();
    for (si, split) in splits.iter().enumerate() {
        let runs = par_map(reps, |rep| -> CliResult<Vec<f64>> {
            if !shuffle {
                return score(&cfg, &graphs, split, &labels, k);
            }
            // a fresh random set of shuffled vertices per replicate
            let mut rng = replicate_rng(cfg.seed, stream_id(si as u64 + 1, rep as u64));
            let mut seeds = sample(&mut rng, n, split.s()).into_vec();
            seeds.sort_unstable();
            let drawn = SeedSplit::from_seeds(n, &seeds)?;
            let mut gs = Vec::with_capacity(m);
            let mut canonical = split.clone();
            for g in &graphs {
                let (c, cs, _) = drawn.canonicalize(g)?;
                gs.push(apply_shuffle(&c, &cs, &random_shuffle(cs.u(), &mut rng))?);
                canonical = cs;
            }
            score(&cfg, &gs, &canonical, &labels, k)
        });
        let runs = runs.into_iter().collect::<CliResult<Vec<_>>>()?;
        let u = split.u();
        for (mi, method) in cfg.methods.iter().enumerate() {
            let values: Vec<f64> = runs.iter().map(|r| r[mi]).collect();
            for (rep, v) in values.iter().enumerate() {
                ari_rows.push(vec![u.to_string(), method.to_string(), rep.to_string(), num(*v)]);
            }
            let (mean, sd) = mean_sd(&values);
            table_rows.push(vec![u.to_string(), method.to_string(), num(mean), num(sd), values.len().to_string()]);
            table.push(json!({"u": u, "method": method, "mean_ari": mean}));
        }
    }
    report.write_csv("ari.csv", &["u", "method", "replicate", "ari"], &ari_rows)?;
    report.write_csv("ari_table.csv", &["u", "method", "mean_ari", "sd_ari", "replicates"], &table_rows)?;
    report.finish(json!({ "graphs": m, "clusters": k, "table": table }))
}
