//! Two-sample test for a pair of graphs whose vertex labels are partly
//! shuffled: correct the labels with OmniMatch, compare embeddings with a
//! Procrustes statistic, and calibrate against a Monte-Carlo null.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assign::{omnimatch, soft_match, AlignMode, Alignment, DimSpec, MatchMethod};
use crate::error::{Error, Result};
use crate::graph::{apply_shuffle, Graph, SeedSplit};
use crate::models::{
    random_shuffle, sample_dirichlet_latents, sample_rdpg_with, InnerProductPolicy, ModelConfig, NoiseKind,
};
use crate::rng::{replicate_rng, stream_id};
use crate::spectral::{procrustes, EmbeddingMatrix};

/// `min_W ‖x − y W‖_F` over orthogonal `W`.
pub fn test_statistic(x: &EmbeddingMatrix, y: &EmbeddingMatrix) -> Result<f64> {
    Ok(procrustes(x, y)?.residual)
}

/// The `⌈(1 − alpha) n⌉`-th smallest value of the null sample.
pub fn critical_value(null_sample: &[f64], alpha: f64) -> Result<f64> {
    if null_sample.is_empty() {
        return Err(Error::invalid("critical value of an empty null sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("level {alpha} outside (0, 1)")));
    }
    let mut sorted = null_sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (((1.0 - alpha) * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Full-graph embeddings of both graphs with graph 1's unseeded rows
/// corrected towards graph 0's labels.
pub fn corrected_from_alignment(alignment: &Alignment, method: MatchMethod) -> Result<(EmbeddingMatrix, EmbeddingMatrix)> {
    if alignment.m() != 2 {
        return Err(Error::invalid(format!("the two-sample test uses two graphs, got {}", alignment.m())));
    }
    let (oos_a, oos_b) = (&alignment.out_of_sample[0].positions, &alignment.out_of_sample[1].positions);
    let u = oos_a.rows();
    let d = alignment.dimension;
    let corrected = match method {
        MatchMethod::Hard => {
            let p = &alignment.matching(0, 1).permutation;
            DMatrix::from_fn(u, d, |v, c| oos_b.values()[(p.get(v), c)])
        }
        MatchMethod::Soft(k) => {
            let mut out = DMatrix::zeros(u, d);
            if u > 0 {
                let soft = soft_match(&alignment.cost_matrix(0, 1)?, k)?;
                for v in 0..u {
                    let list = &soft.candidates[v];
                    for &(w, _) in list {
                        let row = oos_b.values().row(w);
                        out.row_mut(v).iter_mut().zip(row.iter()).for_each(|(o, x)| *o += x);
                    }
                    out.row_mut(v).scale_mut(1.0 / list.len() as f64);
                }
            }
            out
        }
    };
    let x = EmbeddingMatrix::stack(&[&alignment.seed_embeddings[0], oos_a])?;
    let b_rows = EmbeddingMatrix::with_provenance(corrected, vec![1; u], vec![false; u])?;
    let y = EmbeddingMatrix::stack(&[&alignment.seed_embeddings[1], &b_rows])?;
    Ok((x, y))
}

/// Runs the two-graph pipeline and returns label-corrected embeddings.
pub fn corrected_embeddings(
    a: &Graph,
    b: &Graph,
    split: &SeedSplit,
    d: usize,
    method: MatchMethod,
) -> Result<(EmbeddingMatrix, EmbeddingMatrix)> {
    let alignment = omnimatch(&[a.clone(), b.clone()], split, DimSpec::Fixed(d), AlignMode::Pairwise)?;
    corrected_from_alignment(&alignment, method)
}

/// Result of testing one observed pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub null_sample: Vec<f64>,
}

impl TestOutcome {
    pub fn new(statistic: f64, null_sample: Vec<f64>, alpha: f64) -> Result<Self> {
        let critical_value = critical_value(&null_sample, alpha)?;
        Ok(TestOutcome { statistic, critical_value, reject: statistic >= critical_value, null_sample })
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_n_mc() -> usize {
    200
}

fn default_methods() -> Vec<MatchMethod> {
    vec![MatchMethod::Hard, MatchMethod::Soft(5)]
}

/// Monte-Carlo power study over a grid of noise levels and shuffle counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub n: usize,
    pub d: usize,
    /// Shuffled vertices under the null.
    pub v0: usize,
    /// Shuffled vertices under the alternative, one curve point each.
    pub v1: Vec<usize>,
    /// Latent noise levels of the alternative.
    pub err: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<MatchMethod>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub seed: u64,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        for &v in std::iter::once(&self.v0).chain(&self.v1) {
            if v > self.n || self.n - v < self.d {
                return Err(Error::invalid(format!(
                    "shuffling {v} of {} vertices leaves fewer than d = {} seeds",
                    self.n, self.d
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if self.n_mc < 20 {
            return Err(Error::invalid(format!("n_mc = {} is below the minimum of 20", self.n_mc)));
        }
        if let Some(e) = self.err.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!("noise level {e} must be finite and nonnegative")));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no matching methods configured"));
        }
        if self.methods.contains(&MatchMethod::Soft(0)) {
            return Err(Error::invalid("soft matching needs k >= 1"));
        }
        Ok(())
    }
}

/// Null calibration for one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub method: MatchMethod,
    pub critical_value: f64,
    pub null_sample: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub err: f64,
    pub v1: usize,
    pub method: MatchMethod,
    pub rejections: usize,
    pub n_mc: usize,
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerStudy {
    pub null: Vec<NullCalibration>,
    pub cells: Vec<PowerCell>,
}

impl PowerStudy {
    pub fn cell(&self, err: f64, v1: usize, method: MatchMethod) -> Option<&PowerCell> {
        self.cells.iter().find(|c| c.err == err && c.v1 == v1 && c.method == method)
    }
}

const NULL_STREAM: u64 = 1;
const ALT_STREAM: u64 = 2;

/// One replicate: A from `x`, B from `x` plus noise, the last `v` vertices of B
/// shuffled and treated as unseeded. Returns the statistic per method.
fn replicate(cfg: &TestConfig, label: u64, rep: usize, err: f64, v: usize) -> Result<Vec<f64>> {
    let mut rng = replicate_rng(cfg.seed, stream_id(label, rep as u64));
    let model = ModelConfig::new(cfg.n, cfg.d, 2, cfg.d + 2, cfg.seed)?;
    let x = sample_dirichlet_latents(&model, &mut rng);
    let a = sample_rdpg_with(&x, &mut rng, InnerProductPolicy::Clamp)?;
    let all_rows: Vec<usize> = (0..cfg.n).collect();
    // noise is applied even at err = 0 so every cell consumes the same draws
    let y = cfg.noise.apply(&x, &all_rows, err, &mut rng)?;
    let b = sample_rdpg_with(&y, &mut rng, InnerProductPolicy::Clamp)?;
    let split = SeedSplit::canonical(cfg.n, cfg.n - v)?;
    let q = random_shuffle(v, &mut rng);
    let b = apply_shuffle(&b, &split, &q)?;
    let alignment = omnimatch(&[a, b], &split, DimSpec::Fixed(cfg.d), AlignMode::Pairwise)?;
    cfg.methods
        .iter()
        .map(|&m| {
            let (ex, ey) = corrected_from_alignment(&alignment, m)?;
            test_statistic(&ex, &ey)
        })
        .collect()
}

fn simulate(cfg: &TestConfig, label: u64, err: f64, v: usize) -> Result<Vec<Vec<f64>>> {
    let runs = crate::par_map(cfg.n_mc, |rep| replicate(cfg, label, rep, err, v));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    // transpose to one sample per method
    Ok((0..cfg.methods.len()).map(|k| runs.iter().map(|r| r[k]).collect()).collect())
}

/// Null calibration followed by one rejection rate per (err, v1, method).
/// Alternative cells reuse the same replicate streams, so cells differ only in
/// the configured noise and shuffle count.
pub fn run_power_study(cfg: &TestConfig) -> Result<PowerStudy> {
    cfg.validate()?;
    let null_samples = simulate(cfg, NULL_STREAM, 0.0, cfg.v0)?;
    let null = cfg
        .methods
        .iter()
        .zip(null_samples)
        .map(|(&method, sample)| {
            Ok(NullCalibration { method, critical_value: critical_value(&sample, cfg.alpha)?, null_sample: sample })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for &err in &cfg.err {
        for &v1 in &cfg.v1 {
            let samples = simulate(cfg, ALT_STREAM, err, v1)?;
            for (cal, sample) in null.iter().zip(samples) {
                let rejections = sample.iter().filter(|&&t| t >= cal.critical_value).count();
                cells.push(PowerCell {
                    err,
                    v1,
                    method: cal.method,
                    rejections,
                    n_mc: cfg.n_mc,
                    power: rejections as f64 / cfg.n_mc as f64,
                });
            }
        }
    }
    Ok(PowerStudy { null, cells })
}
