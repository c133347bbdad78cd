//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function simulates a small problem, runs it through
//! `omnimatch` and returns a JSON string for the page to draw. The same
//! computations are available natively through the `*_view` functions.

use omnimatch::assign::{align_embedded, embed_for_matching, omnimatch, AlignMode, DimSpec};
use omnimatch::graph::apply_shuffle;
use omnimatch::metrics::{matching_accuracy, pairwise_distances};
use omnimatch::models::{
    random_shuffle, sample_dirichlet_latents, sample_jrdpg, sample_rdpg_with, InnerProductPolicy, ModelConfig, NoiseKind,
};
use omnimatch::omni::omnibus_scree;
use omnimatch::rng::replicate_rng;
use omnimatch::spectral::select_dimension;
use omnimatch::{Result, SeedSplit};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 600;

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(omnimatch::Error::InvalidArgument(format!("n must lie in 1..={MAX_N} in the browser demo")));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MatchView {
    pub d: usize,
    /// First two coordinates of each unseeded vertex, graph 0 then graph 1.
    pub points_a: Vec<[f64; 2]>,
    pub points_b: Vec<[f64; 2]>,
    pub matching: Vec<usize>,
    pub truth: Vec<usize>,
    pub accuracy: f64,
}

/// Two graphs from one Dirichlet model; graph 1's last `u` vertices are
/// shuffled and then recovered.
pub fn match_view(n: usize, u: usize, d: usize, seed: u64) -> Result<MatchView> {
    check_n(n)?;
    let mut rng = replicate_rng(seed, 0);
    let x = sample_dirichlet_latents(&ModelConfig::new(n, d, 2, d + 1, seed)?, &mut rng);
    let mut graphs = sample_jrdpg(&x, 2, &mut rng)?;
    let split = SeedSplit::canonical(n, n.saturating_sub(u))?;
    let truth = random_shuffle(split.u(), &mut rng);
    graphs[1] = apply_shuffle(&graphs[1], &split, &truth)?;
    let a = omnimatch(&graphs, &split, DimSpec::Fixed(d), AlignMode::Pairwise)?;
    let found = &a.matching(0, 1).permutation;
    let points = |g: usize| -> Vec<[f64; 2]> {
        let p = a.out_of_sample[g].positions.values();
        (0..p.nrows()).map(|r| [p[(r, 0)], if d > 1 { p[(r, 1)] } else { 0.0 }]).collect()
    };
    Ok(MatchView {
        d,
        points_a: points(0),
        points_b: points(1),
        matching: found.image().to_vec(),
        truth: truth.image().to_vec(),
        accuracy: matching_accuracy(found, &truth)?,
    })
}

#[derive(Debug, Serialize)]
pub struct ScreeView {
    pub magnitudes: Vec<f64>,
    pub elbow: usize,
}

/// Omnibus scree of `m` graphs drawn from a `d`-dimensional model.
pub fn scree_view(n: usize, d: usize, m: usize, seed: u64) -> Result<ScreeView> {
    check_n(n)?;
    let mut rng = replicate_rng(seed, 1);
    let x = sample_dirichlet_latents(&ModelConfig::new(n, d, m, d + 1, seed)?, &mut rng);
    let graphs = sample_jrdpg(&x, m, &mut rng)?;
    let magnitudes = omnibus_scree(&graphs, 20.min(n * m))?;
    let elbow = select_dimension(&magnitudes, magnitudes.len())?.dimension;
    Ok(ScreeView { magnitudes, elbow })
}

#[derive(Debug, Serialize)]
pub struct AnomalyView {
    pub distances: Vec<Vec<f64>>,
    pub ranking: Vec<usize>,
    pub perturbed: usize,
}

/// `m` graphs with one perturbed (graph 0), all partly shuffled, aligned
/// and compared by Frobenius distance.
pub fn anomaly_view(n: usize, m: usize, u: usize, err: f64, anchor: bool, seed: u64) -> Result<AnomalyView> {
    check_n(n)?;
    let d = 2;
    let mut rng = replicate_rng(seed, 2);
    let x = sample_dirichlet_latents(&ModelConfig::new(n, d, m, d + 2, seed)?, &mut rng);
    let rows: Vec<usize> = (0..n / 5).collect();
    let y = NoiseKind::Shift.apply(&x, &rows, err, &mut rng)?;
    let split = SeedSplit::canonical(n, n.saturating_sub(u))?;
    let mut graphs = Vec::with_capacity(m);
    for i in 0..m {
        let g = sample_rdpg_with(if i == 0 { &y } else { &x }, &mut rng, InnerProductPolicy::Clamp)?;
        graphs.push(apply_shuffle(&g, &split, &random_shuffle(split.u(), &mut rng))?);
    }
    let mode = if anchor { AlignMode::Anchor(m - 1) } else { AlignMode::Pairwise };
    let a = align_embedded(embed_for_matching(&graphs, &split, DimSpec::Fixed(d))?, mode)?;
    let dist = pairwise_distances(&graphs, &split, |i, j| a.matching(i, j).permutation.clone(), false)?;
    let distances = (0..m).map(|i| (0..m).map(|j| dist.get(i, j)).collect()).collect();
    Ok(AnomalyView { distances, ranking: dist.anomaly_ranking(), perturbed: 0 })
}

fn to_json<T: Serialize>(r: Result<T>) -> std::result::Result<String, String> {
    let v = r.map_err(|e| e.to_string())?;
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn match_demo(n: usize, u: usize, d: usize, seed: u32) -> std::result::Result<String, String> {
    to_json(match_view(n, u, d, seed.into()))
}

#[wasm_bindgen]
pub fn scree_demo(n: usize, d: usize, m: usize, seed: u32) -> std::result::Result<String, String> {
    to_json(scree_view(n, d, m, seed.into()))
}

#[wasm_bindgen]
pub fn anomaly_demo(n: usize, m: usize, u: usize, err: f64, anchor: bool, seed: u32) -> std::result::Result<String, String> {
    to_json(anomaly_view(n, m, u, err, anchor, seed.into()))
}
