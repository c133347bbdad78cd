//! Cost matrices, exact and soft assignment, and multi-graph alignment.

mod lap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{compose, induced_seed_subgraph, Graph, PermutationMap, SeedSplit};
use crate::oos::{oos_embed_all, OutOfSample};
use crate::spectral::{select_elbow, EmbeddingMatrix};
use crate::{omni, par_map};

/// Euclidean distances between the unseeded rows of graph `i` and graph `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    values: DMatrix<f64>,
    source_pair: (usize, usize),
}

impl CostMatrix {
    /// Entries must be finite and nonnegative; the matrix must be square.
    pub fn new(values: DMatrix<f64>, source_pair: (usize, usize)) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::invalid(format!("cost matrix must be square, got {:?}", values.shape())));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("cost entries must be finite and nonnegative, found {bad}")));
        }
        Ok(CostMatrix { values, source_pair })
    }

    pub fn u(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn source_pair(&self) -> (usize, usize) {
        self.source_pair
    }

    pub fn get(&self, v: usize, w: usize) -> f64 {
        self.values[(v, w)]
    }

    /// `Σ_v c[v, p(v)]`.
    pub fn cost_of(&self, p: &PermutationMap) -> Result<f64> {
        if p.len() != self.u() {
            return Err(Error::invalid(format!("permutation of size {} for a {}x{} cost matrix", p.len(), self.u(), self.u())));
        }
        Ok(p.image().iter().enumerate().map(|(v, &w)| self.values[(v, w)]).sum())
    }

    pub fn transpose(&self) -> CostMatrix {
        CostMatrix { values: self.values.transpose(), source_pair: (self.source_pair.1, self.source_pair.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Hard,
    Soft(usize),
}

impl std::fmt::Display for MatchMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatchMethod::Hard => write!(f, "hard"),
            MatchMethod::Soft(k) => write!(f, "soft{k}"),
        }
    }
}

/// A bijection from graph-`i` unseeded vertices to graph-`j` unseeded vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub permutation: PermutationMap,
    pub total_cost: f64,
    pub method: MatchMethod,
}

/// Candidate targets for each source vertex, nearest first.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMatch {
    pub k: usize,
    pub candidates: Vec<Vec<(usize, f64)>>,
}

impl SoftMatch {
    pub fn u(&self) -> usize {
        self.candidates.len()
    }

    pub fn targets(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.candidates[v].iter().map(|&(w, _)| w)
    }

    pub fn contains(&self, v: usize, w: usize) -> bool {
        self.targets(v).any(|t| t == w)
    }
}

/// `C[v, w] = ‖x_i[v] − x_j[w]‖₂`.
pub fn cost_matrix(emb_i: &EmbeddingMatrix, emb_j: &EmbeddingMatrix) -> Result<CostMatrix> {
    if emb_i.rows() != emb_j.rows() || emb_i.dim() != emb_j.dim() {
        return Err(Error::invalid(format!(
            "cost matrix needs two u x d embeddings, got {}x{} and {}x{}",
            emb_i.rows(),
            emb_i.dim(),
            emb_j.rows(),
            emb_j.dim()
        )));
    }
    let pair = (emb_i.graph_index().first().copied().unwrap_or(0), emb_j.graph_index().first().copied().unwrap_or(0));
    let (x, y) = (emb_i.values(), emb_j.values());
    let values = DMatrix::from_fn(x.nrows(), y.nrows(), |v, w| {
        (0..x.ncols()).map(|c| (x[(v, c)] - y[(w, c)]).powi(2)).sum::<f64>().sqrt()
    });
    CostMatrix::new(values, pair)
}

/// Exact minimum-cost assignment. Ties resolve to the lexicographically
/// smallest optimal permutation.
pub fn solve_lap(c: &CostMatrix) -> Result<MatchResult> {
    solve_lap_matrix(c.values()).map(|(permutation, total_cost)| MatchResult { permutation, total_cost, method: MatchMethod::Hard })
}

/// [`solve_lap`] on a raw square matrix (entries may be negative).
pub fn solve_lap_matrix(c: &DMatrix<f64>) -> Result<(PermutationMap, f64)> {
    if c.nrows() != c.ncols() {
        return Err(Error::invalid(format!("assignment needs a square matrix, got {:?}", c.shape())));
    }
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("assignment cost {bad} is not finite")));
    }
    let image = lap::lexicographic_lap(c);
    let total = image.iter().enumerate().map(|(v, &w)| c[(v, w)]).sum();
    Ok((PermutationMap::new(image)?, total))
}

/// The `min(k, u)` cheapest targets per row, ties to the lower index.
pub fn soft_match(c: &CostMatrix, k: usize) -> Result<SoftMatch> {
    if k == 0 {
        return Err(Error::invalid("soft matching needs k >= 1"));
    }
    let u = c.u();
    let k = k.min(u);
    let candidates = (0..u)
        .map(|v| {
            let mut order: Vec<usize> = (0..u).collect();
            order.sort_by(|&a, &b| c.get(v, a).total_cmp(&c.get(v, b)).then(a.cmp(&b)));
            order.truncate(k);
            order.into_iter().map(|w| (w, c.get(v, w))).collect()
        })
        .collect();
    Ok(SoftMatch { k, candidates })
}

/// Embedding dimension for [`omnimatch`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimSpec {
    Fixed(usize),
    /// The `index`-th profile-likelihood elbow (1-based) of the omnibus scree,
    /// searched among the top `max_d` magnitudes.
    Elbow { index: usize, max_d: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    /// One assignment problem per unordered pair of graphs.
    Pairwise,
    /// Align every graph to graph `a`; other pairs compose through it.
    Anchor(usize),
}

/// Output of the full pipeline for `m` graphs.
#[derive(Clone, Debug)]
pub struct Alignment {
    pub dimension: usize,
    pub mode: AlignMode,
    /// Omnibus seed blocks, one per graph.
    pub seed_embeddings: Vec<EmbeddingMatrix>,
    pub out_of_sample: Vec<OutOfSample>,
    matchings: Vec<MatchResult>,
}

impl Alignment {
    pub fn m(&self) -> usize {
        self.seed_embeddings.len()
    }

    pub fn u(&self) -> usize {
        self.out_of_sample.first().map_or(0, |o| o.positions.rows())
    }

    /// Matching from graph `i`'s unseeded vertices to graph `j`'s.
    pub fn matching(&self, i: usize, j: usize) -> &MatchResult {
        &self.matchings[i * self.m() + j]
    }

    pub fn cost_matrix(&self, i: usize, j: usize) -> Result<CostMatrix> {
        cost_matrix(&self.out_of_sample[i].positions, &self.out_of_sample[j].positions)
    }

    pub fn soft_match(&self, i: usize, j: usize, k: usize) -> Result<SoftMatch> {
        soft_match(&self.cost_matrix(i, j)?, k)
    }

    /// Unseeded vertices (per graph) with no seed neighbours.
    pub fn unidentifiable(&self) -> Vec<Vec<usize>> {
        self.out_of_sample.iter().map(|o| o.unidentifiable.clone()).collect()
    }
}

/// Resolves a [`DimSpec`] against the omnibus matrix of the seed subgraphs.
pub fn resolve_dimension(seed_graphs: &[Graph], spec: DimSpec) -> Result<usize> {
    match spec {
        DimSpec::Fixed(d) => Ok(d),
        DimSpec::Elbow { index, max_d } => {
            let s = seed_graphs.first().map_or(0, Graph::n);
            let count = (max_d + 1).min(s * seed_graphs.len()).max(1);
            let scree = omni::omnibus_scree(seed_graphs, count)?;
            let elbow = select_elbow(&scree, index, max_d)?;
            if elbow.degenerate {
                log::warn!("flat omnibus scree; using dimension {}", elbow.dimension);
            }
            Ok(elbow.dimension)
        }
    }
}

/// Seed subgraphs, omnibus embedding, out-of-sample projection, cost matrices
/// and assignment.
pub fn omnimatch(graphs: &[Graph], split: &SeedSplit, d: DimSpec, mode: AlignMode) -> Result<Alignment> {
    let embedded = embed_for_matching(graphs, split, d)?;
    align_embedded(embedded, mode)
}

/// Joint seed embedding plus out-of-sample positions, before any assignment.
#[derive(Clone, Debug)]
pub struct MatchingEmbedding {
    pub dimension: usize,
    pub seed_embeddings: Vec<EmbeddingMatrix>,
    pub out_of_sample: Vec<OutOfSample>,
}

/// The embedding half of [`omnimatch`].
pub fn embed_for_matching(graphs: &[Graph], split: &SeedSplit, d: DimSpec) -> Result<MatchingEmbedding> {
    let m = graphs.len();
    if m < 2 {
        return Err(Error::invalid(format!("matching needs at least two graphs, got {m}")));
    }
    let seed_graphs = graphs.iter().map(|g| induced_seed_subgraph(g, split)).collect::<Result<Vec<_>>>()?;
    let d = resolve_dimension(&seed_graphs, d)?;
    if d == 0 || split.s() < d {
        return Err(Error::invalid(format!("dimension {d} needs 1 <= d <= s = {}", split.s())));
    }
    let seed_embeddings = omni::omni_embed(&seed_graphs, d)?;
    let out_of_sample = oos_embed_all(graphs, split, &seed_embeddings)?;
    let flagged: usize = out_of_sample.iter().map(|o| o.unidentifiable.len()).sum();
    if flagged > 0 {
        log::warn!("{flagged} unseeded vertices have no seed neighbours and sit at the origin");
    }
    Ok(MatchingEmbedding { dimension: d, seed_embeddings, out_of_sample })
}

/// The assignment half of [`omnimatch`].
pub fn align_embedded(embedded: MatchingEmbedding, mode: AlignMode) -> Result<Alignment> {
    let MatchingEmbedding { dimension: d, seed_embeddings, out_of_sample } = embedded;
    let m = seed_embeddings.len();
    if let AlignMode::Anchor(a) = mode {
        if a >= m {
            return Err(Error::invalid(format!("anchor {a} out of range for {m} graphs")));
        }
    }
    let u = out_of_sample.first().map_or(0, |o| o.positions.rows());

    let positions: Vec<&EmbeddingMatrix> = out_of_sample.iter().map(|o| &o.positions).collect();
    let solve = |i: usize, j: usize| -> Result<MatchResult> { solve_lap(&cost_matrix(positions[i], positions[j])?) };
    let identity = MatchResult { permutation: PermutationMap::identity(u), total_cost: 0.0, method: MatchMethod::Hard };
    let mut matchings = vec![identity; m * m];

    match mode {
        AlignMode::Pairwise => {
            let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
            let solved = par_map(pairs.len(), |p| solve(pairs[p].0, pairs[p].1));
            for (&(i, j), r) in pairs.iter().zip(solved) {
                let r = r?;
                matchings[j * m + i] =
                    MatchResult { permutation: r.permutation.inverse(), total_cost: r.total_cost, method: MatchMethod::Hard };
                matchings[i * m + j] = r;
            }
        }
        AlignMode::Anchor(a) => {
            let others: Vec<usize> = (0..m).filter(|&i| i != a).collect();
            let solved = par_map(others.len(), |p| solve(others[p], a));
            let mut to_anchor = vec![PermutationMap::identity(u); m];
            for (&i, r) in others.iter().zip(solved) {
                let r = r?;
                to_anchor[i] = r.permutation.clone();
                matchings[a * m + i] =
                    MatchResult { permutation: r.permutation.inverse(), total_cost: r.total_cost, method: MatchMethod::Hard };
                matchings[i * m + a] = r;
            }
            for &i in &others {
                for &j in &others {
                    if i == j {
                        continue;
                    }
                    let permutation = compose(&to_anchor[i], &to_anchor[j].inverse())?;
                    let total_cost = cost_matrix(positions[i], positions[j])?.cost_of(&permutation)?;
                    matchings[i * m + j] = MatchResult { permutation, total_cost, method: MatchMethod::Hard };
                }
            }
        }
    }
    Ok(Alignment { dimension: d, mode, seed_embeddings, out_of_sample, matchings })
}

/// Cost matrices `C^(i,j)` for every pair `i < j`.
#[derive(Clone, Debug)]
pub struct PairwiseCosts {
    m: usize,
    u: usize,
    upper: Vec<CostMatrix>,
}

impl PairwiseCosts {
    /// `matrices` lists `C^(i,j)` for `i < j` in row-major order
    /// (`(0,1), (0,2), …, (1,2), …`).
    pub fn new(m: usize, matrices: Vec<CostMatrix>) -> Result<Self> {
        if matrices.len() != m * m.saturating_sub(1) / 2 {
            return Err(Error::invalid(format!("{m} graphs need {} cost matrices, got {}", m * m.saturating_sub(1) / 2, matrices.len())));
        }
        let u = matrices.first().map_or(0, CostMatrix::u);
        if matrices.iter().any(|c| c.u() != u) {
            return Err(Error::invalid("cost matrices differ in size"));
        }
        Ok(PairwiseCosts { m, u, upper: matrices })
    }

    pub fn from_alignment(a: &Alignment) -> Result<Self> {
        let m = a.m();
        let mut matrices = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                matrices.push(a.cost_matrix(i, j)?);
            }
        }
        PairwiseCosts::new(m, matrices)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// `C^(i,j)` for `i < j`.
    pub fn get(&self, i: usize, j: usize) -> &CostMatrix {
        assert!(i < j && j < self.m, "pair ({i}, {j}) is not an upper pair");
        let before: usize = (0..i).map(|r| self.m - 1 - r).sum();
        &self.upper[before + (j - i - 1)]
    }
}

/// Multigraph assignment cost. `assignment[i]` sends a common index `t` to a
/// vertex of graph `i`; the cost is `Σ_t Σ_{i<j} C^(i,j)[σ_i(t), σ_j(t)]`.
pub fn mlap_cost(assignment: &[PermutationMap], costs: &PairwiseCosts) -> Result<f64> {
    if assignment.len() != costs.m() {
        return Err(Error::invalid(format!("{} permutations for {} graphs", assignment.len(), costs.m())));
    }
    if let Some(p) = assignment.iter().find(|p| p.len() != costs.u()) {
        return Err(Error::invalid(format!("permutation of size {} for {} unseeded vertices", p.len(), costs.u())));
    }
    let mut total = 0.0;
    for i in 0..costs.m() {
        for j in i + 1..costs.m() {
            let c = costs.get(i, j);
            total += (0..costs.u()).map(|t| c.get(assignment[i].get(t), assignment[j].get(t))).sum::<f64>();
        }
    }
    Ok(total)
}
