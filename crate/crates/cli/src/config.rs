//! JSON config documents, one per subcommand. Every field has a default, so
//! `{}` is a valid config; unknown keys are rejected.

use std::path::{Path, PathBuf};

use omnimatch::assign::{DimSpec, MatchMethod};
use omnimatch::models::NoiseKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

macro_rules! defaults_from_empty_document {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                serde_json::from_str("{}").expect("every field has a default")
            }
        }
    )*};
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Optional preprocessing of edge weights read from files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTransform {
    #[default]
    Raw,
    Log1p,
}

/// Graphs read from disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub graphs: Vec<PathBuf>,
    /// Seed vertex list; the remaining vertices are unseeded.
    #[serde(default)]
    pub seeds: Option<PathBuf>,
    /// The graphs are already vertex-aligned: run a shuffle study on them.
    #[serde(default)]
    pub aligned: bool,
    #[serde(default)]
    pub transform: WeightTransform,
    /// Subject labels, one per graph (cluster only).
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Anchor,
    Pairwise,
}

impl std::fmt::Display for ModeName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeName::Anchor => "anchor",
            ModeName::Pairwise => "pairwise",
        })
    }
}

fn yes() -> bool {
    true
}

/// Latent positions: first `d` coordinates of Dirichlet(1 repeated `d + dirichlet_extra` times).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchModel {
    #[serde(default = "MatchModel::default_n")]
    pub n: usize,
    #[serde(default = "one")]
    pub dirichlet_extra: usize,
}

impl MatchModel {
    fn default_n() -> usize {
        500
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchSource {
    Model(MatchModel),
    Files(FileSource),
}

impl Default for MatchSource {
    fn default() -> Self {
        MatchSource::Model(MatchModel { n: 500, dirichlet_extra: 1 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    #[serde(default)]
    pub source: MatchSource,
    /// Embedding dimensions (and model dimensions for simulated graphs).
    #[serde(default = "MatchConfig::default_d")]
    pub d: Vec<usize>,
    /// Unseeded (shuffled) vertex counts.
    #[serde(default = "MatchConfig::default_u")]
    pub u: Vec<usize>,
    /// Neighbour counts for soft matching.
    #[serde(default = "MatchConfig::default_k")]
    pub k: Vec<usize>,
    /// Also report exact assignment accuracy.
    #[serde(default = "yes")]
    pub hard: bool,
    #[serde(default = "MatchConfig::default_n_mc")]
    pub n_mc: usize,
    /// Alignment mode when matching more than two real graphs.
    #[serde(default = "MatchConfig::default_mode")]
    pub mode: ModeName,
    #[serde(default)]
    pub anchor: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl MatchConfig {
    fn default_d() -> Vec<usize> {
        vec![2, 10, 15]
    }
    fn default_u() -> Vec<usize> {
        vec![50, 100, 150, 200]
    }
    fn default_k() -> Vec<usize> {
        vec![1, 3, 5, 10]
    }
    fn default_n_mc() -> usize {
        50
    }
    fn default_mode() -> ModeName {
        ModeName::Pairwise
    }
}

/// Ten-graph anomaly study: one graph gets latent noise on some vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiModel {
    #[serde(default = "MatchModel::default_n")]
    pub n: usize,
    #[serde(default = "MultiModel::default_m")]
    pub m: usize,
    #[serde(default = "MultiModel::default_extra")]
    pub dirichlet_extra: usize,
    /// Vertices of the anomalous graph whose latent positions are perturbed.
    #[serde(default = "MultiModel::default_rows")]
    pub perturb_rows: usize,
    #[serde(default = "MultiModel::default_err")]
    pub err: f64,
    #[serde(default)]
    pub noise: NoiseKind,
}

impl MultiModel {
    fn default_m() -> usize {
        10
    }
    fn default_extra() -> usize {
        2
    }
    fn default_rows() -> usize {
        80
    }
    fn default_err() -> f64 {
        0.05
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiSource {
    Model(MultiModel),
    Files(FileSource),
}

impl Default for MultiSource {
    fn default() -> Self {
        MultiSource::Model(serde_json::from_str("{}").expect("every field has a default"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimatchConfig {
    #[serde(default)]
    pub source: MultiSource,
    #[serde(default = "MultimatchConfig::default_d")]
    pub d: usize,
    #[serde(default = "MultimatchConfig::default_u")]
    pub u: Vec<usize>,
    #[serde(default = "MultimatchConfig::default_modes")]
    pub modes: Vec<ModeName>,
    /// Anchor graph; defaults to the last graph.
    #[serde(default)]
    pub anchor: Option<usize>,
    #[serde(default = "MultimatchConfig::default_replicates")]
    pub replicates: usize,
    /// Report squared Frobenius distances.
    #[serde(default)]
    pub squared: bool,
    #[serde(default)]
    pub seed: u64,
}

impl MultimatchConfig {
    fn default_d() -> usize {
        10
    }
    fn default_u() -> Vec<usize> {
        vec![120, 400]
    }
    fn default_modes() -> Vec<ModeName> {
        vec![ModeName::Anchor, ModeName::Pairwise]
    }
    fn default_replicates() -> usize {
        20
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    #[serde(default = "MatchModel::default_n")]
    pub n: usize,
    #[serde(default = "MultimatchConfig::default_d")]
    pub d: usize,
    #[serde(default = "PowerConfig::default_v0")]
    pub v0: usize,
    #[serde(default = "PowerConfig::default_v1")]
    pub v1: Vec<usize>,
    #[serde(default = "PowerConfig::default_err")]
    pub err: Vec<f64>,
    #[serde(default = "PowerConfig::default_alpha")]
    pub alpha: f64,
    #[serde(default = "MatchConfig::default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "PowerConfig::default_methods")]
    pub methods: Vec<MatchMethod>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub seed: u64,
}

impl PowerConfig {
    fn default_v0() -> usize {
        120
    }
    fn default_v1() -> Vec<usize> {
        (2..=12).map(|t| 10 * t).collect()
    }
    fn default_err() -> Vec<f64> {
        vec![0.01, 0.011, 0.012]
    }
    fn default_alpha() -> f64 {
        0.05
    }
    fn default_methods() -> Vec<MatchMethod> {
        vec![MatchMethod::Hard, MatchMethod::Soft(1), MatchMethod::Soft(5)]
    }
}

impl From<&PowerConfig> for omnimatch::testing::TestConfig {
    fn from(c: &PowerConfig) -> Self {
        omnimatch::testing::TestConfig {
            n: c.n,
            d: c.d,
            v0: c.v0,
            v1: c.v1.clone(),
            err: c.err.clone(),
            alpha: c.alpha,
            n_mc: c.n_mc,
            methods: c.methods.clone(),
            noise: c.noise,
            seed: c.seed,
        }
    }
}

/// Subjects share a base latent matrix; each subject moves a random subset
/// of vertices to fresh positions, and every scan is an RDPG draw from its
/// subject's positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surrogate {
    #[serde(default = "Surrogate::default_subjects")]
    pub subjects: usize,
    #[serde(default = "Surrogate::default_scans")]
    pub scans: usize,
    #[serde(default = "Surrogate::default_n")]
    pub n: usize,
    #[serde(default = "Surrogate::default_d")]
    pub d: usize,
    #[serde(default = "one")]
    pub dirichlet_extra: usize,
    /// Fraction of vertices redrawn per subject.
    #[serde(default = "Surrogate::default_moved")]
    pub moved_fraction: f64,
}

impl Surrogate {
    fn default_subjects() -> usize {
        10
    }
    fn default_scans() -> usize {
        10
    }
    fn default_n() -> usize {
        100
    }
    fn default_d() -> usize {
        2
    }
    fn default_moved() -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSource {
    Surrogate(Surrogate),
    Files(FileSource),
}

impl Default for ClusterSource {
    fn default() -> Self {
        ClusterSource::Surrogate(serde_json::from_str("{}").expect("every field has a default"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMethod {
    /// No label correction: shuffled graphs are compared as observed.
    Omni,
    Anchor,
    Pairwise,
}

impl std::fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClusterMethod::Omni => "omni",
            ClusterMethod::Anchor => "anchor",
            ClusterMethod::Pairwise => "pairwise",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default)]
    pub source: ClusterSource,
    #[serde(default = "ClusterConfig::default_d")]
    pub d: DimSpec,
    #[serde(default = "ClusterConfig::default_u")]
    pub u: Vec<usize>,
    /// Number of clusters; defaults to the number of distinct labels.
    #[serde(default)]
    pub clusters: Option<usize>,
    #[serde(default = "ClusterConfig::default_methods")]
    pub methods: Vec<ClusterMethod>,
    /// Anchor graph; defaults to the last graph.
    #[serde(default)]
    pub anchor: Option<usize>,
    #[serde(default = "MatchConfig::default_n_mc")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ClusterConfig {
    fn default_d() -> DimSpec {
        DimSpec::Fixed(2)
    }
    fn default_u() -> Vec<usize> {
        vec![20, 50]
    }
    fn default_methods() -> Vec<ClusterMethod> {
        vec![ClusterMethod::Omni, ClusterMethod::Anchor, ClusterMethod::Pairwise]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    #[serde(default)]
    pub embeddings: Vec<PathBuf>,
    /// Similarities below the threshold become zero; no default.
    #[serde(default)]
    pub threshold: Option<f64>,
}

defaults_from_empty_document!(MatchConfig, MultimatchConfig, PowerConfig, ClusterConfig, IngestConfig);
