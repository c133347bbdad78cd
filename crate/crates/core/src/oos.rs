//! Least-squares out-of-sample (OOS) embedding of unseeded vertices.
//!
//! An unseeded vertex with seed-adjacency vector `b` is placed at the
//! minimum-norm solution of `min_w Σ_j (b_j − x_jᵀ w)²`, where `x_j` are the
//! embedded seed rows of the same graph.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, SeedSplit};
use crate::spectral::EmbeddingMatrix;

/// Weights from one unseeded vertex to the `s` seeds of its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyVector(pub DVector<f64>);

impl AdjacencyVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

/// Precomputed least-squares solver `(XᵀX)⁻¹Xᵀ` for a seed embedding `X`.
#[derive(Clone, Debug)]
pub struct OosProjector {
    pinv: DMatrix<f64>,
}

const RANK_TOLERANCE: f64 = 1e-10;

impl OosProjector {
    /// Fails when the seed embedding is numerically rank deficient
    /// (`σ_d ≤ 1e-10 σ_1`).
    pub fn new(seed_emb: &EmbeddingMatrix) -> Result<Self> {
        let x = seed_emb.values();
        let d = x.ncols();
        if x.nrows() < d {
            return Err(Error::DegenerateInput(format!(
                "{} seed rows cannot determine a {d}-dimensional position",
                x.nrows()
            )));
        }
        let svd = x.clone().svd(false, false);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let top = svd.singular_values[order[0]];
        let last = svd.singular_values[order[d - 1]];
        if !(last > RANK_TOLERANCE * top) {
            return Err(Error::DegenerateInput(format!(
                "seed embedding is rank deficient: smallest singular value {last:e} against largest {top:e}"
            )));
        }
        // full column rank, so the least-squares solution is R⁻¹ Qᵀ b
        let qr = x.clone().qr();
        let r_inv = qr
            .r()
            .try_inverse()
            .ok_or_else(|| Error::NumericFailure("triangular factor of the seed embedding is singular".into()))?;
        let pinv = r_inv * qr.q().transpose();
        Ok(OosProjector { pinv })
    }

    pub fn seeds(&self) -> usize {
        self.pinv.ncols()
    }

    pub fn project(&self, b: &AdjacencyVector) -> Result<DVector<f64>> {
        if b.len() != self.seeds() {
            return Err(Error::invalid(format!(
                "adjacency vector has {} entries but there are {} seeds",
                b.len(),
                self.seeds()
            )));
        }
        Ok(&self.pinv * &b.0)
    }
}

/// Least-squares position of a single vertex.
pub fn oos_embed(seed_emb: &EmbeddingMatrix, b: &AdjacencyVector) -> Result<DVector<f64>> {
    OosProjector::new(seed_emb)?.project(b)
}

/// OOS positions of one graph's unseeded vertices.
#[derive(Clone, Debug)]
pub struct OutOfSample {
    /// `u x d`, row `k` for unseeded vertex `s + k` of the (observed) graph.
    pub positions: EmbeddingMatrix,
    /// Unseeded vertices with no weight to any seed; they sit at the origin
    /// and cannot be identified.
    pub unidentifiable: Vec<usize>,
}

/// Embeds every unseeded vertex of every graph against that graph's own
/// seed embedding. `seed_embs[i]` must be the omnibus block of graph `i`.
pub fn oos_embed_all(graphs: &[Graph], split: &SeedSplit, seed_embs: &[EmbeddingMatrix]) -> Result<Vec<OutOfSample>> {
    if graphs.len() != seed_embs.len() {
        return Err(Error::invalid(format!("{} graphs but {} seed embeddings", graphs.len(), seed_embs.len())));
    }
    let seeds = split.seed_ids();
    graphs
        .iter()
        .zip(seed_embs)
        .enumerate()
        .map(|(gi, (g, emb))| {
            split.check_graph(g)?;
            if emb.rows() != split.s() {
                return Err(Error::invalid(format!(
                    "seed embedding of graph {gi} has {} rows for {} seeds",
                    emb.rows(),
                    split.s()
                )));
            }
            let d = emb.dim();
            let u = split.u();
            let mut values = DMatrix::zeros(u, d);
            let mut unidentifiable = Vec::new();
            if u > 0 {
                let projector = OosProjector::new(emb)?;
                for (k, &v) in split.unseeded_ids().iter().enumerate() {
                    let b = AdjacencyVector(DVector::from_iterator(seeds.len(), seeds.iter().map(|&j| g.weight(v, j))));
                    if b.is_zero() {
                        unidentifiable.push(k);
                        continue;
                    }
                    values.set_row(k, &projector.project(&b)?.transpose());
                }
            }
            let positions = EmbeddingMatrix::with_provenance(values, vec![gi; u], vec![false; u])?;
            Ok(OutOfSample { positions, unidentifiable })
        })
        .collect()
}
