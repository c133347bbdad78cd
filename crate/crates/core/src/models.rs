//! Random dot product graph (RDPG) samplers and latent-position perturbations.
//!
//! Latent positions are drawn by projecting a flat Dirichlet vector onto its
//! first `d` coordinates, which keeps every pairwise inner product in `[0, 1]`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, PermutationMap};

/// `n x d` latent positions, one row per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentPositions {
    values: DMatrix<f64>,
}

/// Range of inner products over distinct row pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProductAudit {
    pub min: f64,
    pub max: f64,
}

impl InnerProductAudit {
    pub fn is_valid(&self) -> bool {
        self.min >= 0.0 && self.max <= 1.0
    }
}

/// What to do with inner products outside `[0, 1]` when sampling edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerProductPolicy {
    Reject,
    Clamp,
}

impl LatentPositions {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::invalid("latent dimension must be at least 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("latent positions must be finite"));
        }
        Ok(LatentPositions { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.values.row(i).iter().copied().collect()).collect()
    }

    /// Minimum and maximum of `x_iᵀx_j` over `i < j`.
    pub fn audit(&self) -> InnerProductAudit {
        let rows = self.rows();
        let mut audit = InnerProductAudit { min: f64::INFINITY, max: f64::NEG_INFINITY };
        for j in 0..rows.len() {
            for i in 0..j {
                let ip = dot(&rows[i], &rows[j]);
                audit.min = audit.min.min(ip);
                audit.max = audit.max.max(ip);
            }
        }
        audit
    }

    /// Edge-probability matrix `XXᵀ` with a zero diagonal.
    pub fn probability_matrix(&self, policy: InnerProductPolicy) -> Result<DMatrix<f64>> {
        let mut p = &self.values * self.values.transpose();
        for i in 0..p.nrows() {
            p[(i, i)] = 0.0;
        }
        for v in p.iter_mut() {
            *v = check_probability(*v, policy)?;
        }
        Ok(p)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const PROBABILITY_SLACK: f64 = 1e-12;

fn check_probability(p: f64, policy: InnerProductPolicy) -> Result<f64> {
    if (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Ok(p.clamp(0.0, 1.0));
    }
    match policy {
        InnerProductPolicy::Clamp => Ok(p.clamp(0.0, 1.0)),
        InnerProductPolicy::Reject => Err(Error::invalid(format!("inner product {p} is not a probability"))),
    }
}

/// Sizes and seed for a simulated model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    /// Length of the flat Dirichlet parameter vector; must exceed `d`.
    pub concentration_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(n: usize, d: usize, m: usize, concentration_len: usize, seed: u64) -> Result<Self> {
        let cfg = ModelConfig { n, d, m, concentration_len, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.m == 0 {
            return Err(Error::invalid("model dimension and graph count must be positive"));
        }
        if self.concentration_len <= self.d {
            return Err(Error::invalid(format!(
                "Dirichlet parameter length {} must exceed the dimension {}",
                self.concentration_len, self.d
            )));
        }
        Ok(())
    }
}

/// `n` i.i.d. rows, each the first `d` coordinates of a flat Dirichlet draw.
pub fn sample_dirichlet_latents(cfg: &ModelConfig, rng: &mut impl Rng) -> LatentPositions {
    let k = cfg.concentration_len;
    let mut values = DMatrix::zeros(cfg.n, cfg.d);
    let mut draw = vec![0.0f64; k];
    for i in 0..cfg.n {
        for g in draw.iter_mut() {
            *g = rng.sample(Exp1);
        }
        let total: f64 = draw.iter().sum();
        for j in 0..cfg.d {
            values[(i, j)] = draw[j] / total;
        }
    }
    LatentPositions { values }
}

/// One RDPG draw; rejects inner products outside `[0, 1]`.
pub fn sample_rdpg(x: &LatentPositions, rng: &mut impl Rng) -> Result<Graph> {
    sample_rdpg_with(x, rng, InnerProductPolicy::Reject)
}

/// Edges `{i, j}`, `i < j`, are independent Bernoulli(`x_iᵀx_j`), drawn
/// column by column.
pub fn sample_rdpg_with(x: &LatentPositions, rng: &mut impl Rng, policy: InnerProductPolicy) -> Result<Graph> {
    let n = x.n();
    let rows = x.rows();
    if policy == InnerProductPolicy::Reject {
        let audit = x.audit();
        if n > 1 && !(audit.min >= -PROBABILITY_SLACK && audit.max <= 1.0 + PROBABILITY_SLACK) {
            return Err(Error::invalid(format!(
                "inner products span [{}, {}], outside [0, 1]",
                audit.min, audit.max
            )));
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let p = check_probability(dot(&rows[i], &rows[j]), InnerProductPolicy::Clamp)?;
            if rng.random::<f64>() < p {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    Ok(Graph::from_symmetric(a))
}

/// `m` conditionally independent RDPG draws sharing `x`.
pub fn sample_jrdpg(x: &LatentPositions, m: usize, rng: &mut impl Rng) -> Result<Vec<Graph>> {
    if m == 0 {
        return Err(Error::invalid("need at least one graph"));
    }
    (0..m).map(|_| sample_rdpg(x, rng)).collect()
}

/// Adds `err` to every coordinate.
pub fn perturb_latents(x: &LatentPositions, err: f64) -> Result<LatentPositions> {
    let rows: Vec<usize> = (0..x.n()).collect();
    perturb_latent_rows(x, &rows, err)
}

/// Adds `err` to every coordinate of the listed rows.
pub fn perturb_latent_rows(x: &LatentPositions, rows: &[usize], err: f64) -> Result<LatentPositions> {
    check_err(err)?;
    let mut values = x.values.clone();
    for &i in rows {
        if i >= x.n() {
            return Err(Error::invalid(format!("row {i} out of range")));
        }
        values.row_mut(i).add_scalar_mut(err);
    }
    Ok(LatentPositions { values })
}

fn check_err(err: f64) -> Result<()> {
    if !(err >= 0.0 && err.is_finite()) {
        return Err(Error::invalid(format!("noise level must be a finite nonnegative number, got {err}")));
    }
    Ok(())
}

/// How latent noise of scale `err` is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Constant shift: every coordinate grows by exactly `err`.
    #[default]
    Shift,
    /// Independent Uniform(0, err) noise per coordinate.
    Uniform,
}

impl NoiseKind {
    pub fn apply(self, x: &LatentPositions, rows: &[usize], err: f64, rng: &mut impl Rng) -> Result<LatentPositions> {
        match self {
            NoiseKind::Shift => perturb_latent_rows(x, rows, err),
            NoiseKind::Uniform => {
                check_err(err)?;
                let mut values = x.values.clone();
                for &i in rows {
                    if i >= x.n() {
                        return Err(Error::invalid(format!("row {i} out of range")));
                    }
                    for v in values.row_mut(i).iter_mut() {
                        *v += err * rng.random::<f64>();
                    }
                }
                Ok(LatentPositions { values })
            }
        }
    }
}

/// Uniform random permutation of `u` elements (Fisher-Yates).
pub fn random_shuffle(u: usize, rng: &mut impl Rng) -> PermutationMap {
    let mut image: Vec<usize> = (0..u).collect();
    image.shuffle(rng);
    PermutationMap::new(image).expect("shuffled identity is a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;
    use std::collections::HashMap;

    fn cfg(n: usize, d: usize, len: usize) -> ModelConfig {
        ModelConfig::new(n, d, 1, len, 0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::new(10, 3, 1, 3, 0).is_err());
        assert!(ModelConfig::new(10, 0, 1, 3, 0).is_err());
        assert!(ModelConfig::new(10, 2, 1, 3, 0).is_ok());
    }

    #[test]
    fn one_dimensional_dirichlet_is_uniform() {
        let mut rng = replicate_rng(1, 0);
        let x = sample_dirichlet_latents(&cfg(100_000, 1, 2), &mut rng);
        let mean = x.values().mean();
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn dirichlet_rows_lie_in_simplex() {
        let mut rng = replicate_rng(2, 0);
        let x = sample_dirichlet_latents(&cfg(500, 10, 12), &mut rng);
        for i in 0..500 {
            let row = x.values().row(i);
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!(row.sum() < 1.0);
        }
        assert!(x.audit().is_valid());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = cfg(50, 2, 3);
        let a = sample_dirichlet_latents(&c, &mut replicate_rng(9, 1));
        let b = sample_dirichlet_latents(&c, &mut replicate_rng(9, 1));
        assert_eq!(a, b);
        let g1 = sample_rdpg(&a, &mut replicate_rng(3, 0)).unwrap();
        let g2 = sample_rdpg(&a, &mut replicate_rng(3, 0)).unwrap();
        let g3 = sample_rdpg(&a, &mut replicate_rng(4, 0)).unwrap();
        assert_eq!(g1, g2);
        assert_ne!(g1, g3);
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = replicate_rng(0, 0);
        let zero = LatentPositions::new(DMatrix::zeros(20, 2)).unwrap();
        assert_eq!(sample_rdpg(&zero, &mut rng).unwrap(), Graph::empty(20));
        let ones = LatentPositions::new(DMatrix::from_fn(20, 2, |_, j| if j == 0 { 1.0 } else { 0.0 })).unwrap();
        assert_eq!(sample_rdpg(&ones, &mut rng).unwrap(), Graph::complete(20));
    }

    #[test]
    fn rejects_invalid_inner_products() {
        let x = LatentPositions::new(DMatrix::from_element(3, 1, 1.5)).unwrap();
        assert!(matches!(sample_rdpg(&x, &mut replicate_rng(0, 0)), Err(Error::InvalidArgument(_))));
        let g = sample_rdpg_with(&x, &mut replicate_rng(0, 0), InnerProductPolicy::Clamp).unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn constant_latents_give_expected_density() {
        let x = LatentPositions::new(DMatrix::from_element(200, 1, 0.3f64.sqrt())).unwrap();
        let mut total = 0.0;
        for r in 0..20 {
            let g = sample_rdpg(&x, &mut replicate_rng(5, r)).unwrap();
            assert!(g.is_binary());
            assert_eq!(g.weights(), &g.weights().transpose());
            total += g.density();
        }
        let mean = total / 20.0;
        assert!((mean - 0.3).abs() < 0.02, "density {mean}");
    }

    #[test]
    fn jrdpg_draws_are_uncorrelated() {
        let mut rng = replicate_rng(6, 0);
        let x = sample_dirichlet_latents(&cfg(500, 2, 3), &mut rng);
        assert_eq!(sample_jrdpg(&x, 1, &mut rng).unwrap().len(), 1);
        let gs = sample_jrdpg(&x, 2, &mut rng).unwrap();
        let rho = crate::metrics::edge_correlation(&gs[0], &gs[1]).unwrap();
        // heterogeneity inflates the raw correlation; condition on P instead
        let p = x.probability_matrix(InnerProductPolicy::Reject).unwrap();
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for j in 0..500 {
            for i in 0..j {
                let ea = gs[0].weight(i, j) - p[(i, j)];
                let eb = gs[1].weight(i, j) - p[(i, j)];
                num += ea * eb;
                da += ea * ea;
                db += eb * eb;
            }
        }
        let residual_corr = num / (da * db).sqrt();
        let pairs = (500 * 499 / 2) as f64;
        assert!(residual_corr.abs() <= 3.0 / pairs.sqrt(), "{residual_corr}");
        // unconditionally the indicators share the heterogeneity correlation
        let rho_h = crate::metrics::heterogeneity_correlation(&p).unwrap();
        assert!((rho - rho_h).abs() < 0.03, "{rho} vs {rho_h}");
        assert!(sample_jrdpg(&x, 0, &mut rng).is_err());
    }

    #[test]
    fn perturbation_examples() {
        let x = LatentPositions::new(DMatrix::from_element(1, 1, 0.5)).unwrap();
        assert_eq!(perturb_latents(&x, 0.0).unwrap(), x);
        let y = perturb_latents(&x, 0.012).unwrap();
        assert!((y.values()[(0, 0)] - 0.512).abs() < 1e-15);
        assert!(perturb_latents(&x, -0.1).is_err());
    }

    #[test]
    fn small_shift_keeps_inner_products_valid() {
        let c = cfg(500, 10, 12);
        let mut ok = 0;
        for r in 0..100 {
            let x = sample_dirichlet_latents(&c, &mut replicate_rng(7, r));
            let y = perturb_latents(&x, 0.01).unwrap();
            // monotone: no entry decreases
            assert!(y.values().iter().zip(x.values().iter()).all(|(a, b)| a >= b));
            if y.audit().max <= 1.0 {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok} of 100");
    }

    #[test]
    fn uniform_noise_is_bounded() {
        let x = LatentPositions::new(DMatrix::from_element(10, 2, 0.1)).unwrap();
        let y = NoiseKind::Uniform.apply(&x, &[0, 3], 0.05, &mut replicate_rng(1, 1)).unwrap();
        for i in 0..10 {
            for j in 0..2 {
                let delta = y.values()[(i, j)] - 0.1;
                if i == 0 || i == 3 {
                    assert!((0.0..0.05).contains(&delta));
                } else {
                    assert_eq!(delta, 0.0);
                }
            }
        }
    }

    #[test]
    fn shuffle_examples() {
        let mut rng = replicate_rng(8, 0);
        assert!(random_shuffle(1, &mut rng).is_identity());
        assert_eq!(random_shuffle(30, &mut replicate_rng(8, 1)), random_shuffle(30, &mut replicate_rng(8, 1)));
    }

    #[test]
    fn shuffles_are_uniform() {
        let mut rng = replicate_rng(10, 0);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(random_shuffle(3, &mut rng).image().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for c in counts.values() {
            let f = *c as f64 / draws as f64;
            assert!((f - 1.0 / 6.0).abs() < 0.01, "{f}");
        }
    }
}
