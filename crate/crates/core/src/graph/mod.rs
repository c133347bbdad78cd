//! Graph, permutation and seed-split primitives.
//!
//! Seeded pipelines use a canonical vertex layout: the `s` seeds occupy
//! indices `0..s` and the `u` unseeded vertices occupy `s..n`. Arbitrary seed
//! lists are brought into this layout with [`SeedSplit::canonicalize`].

pub mod io;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected, loop-free graph stored as a dense symmetric weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    binary: bool,
}

impl Graph {
    /// Validates symmetry (exact), a zero diagonal and finiteness.
    pub fn from_matrix(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::invalid(format!(
                "adjacency matrix must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        for j in 0..n {
            if weights[(j, j)] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal entry at vertex {j}")));
            }
            for i in 0..j {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::invalid(format!("non-finite weight at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::invalid(format!("asymmetric weights at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_symmetric(weights))
    }

    /// Caller guarantees symmetry and a zero diagonal.
    pub(crate) fn from_symmetric(weights: DMatrix<f64>) -> Self {
        let binary = weights.iter().all(|&w| w == 0.0 || w == 1.0);
        Graph { weights, binary }
    }

    pub fn empty(n: usize) -> Self {
        Graph { weights: DMatrix::zeros(n, n), binary: true }
    }

    pub fn complete(n: usize) -> Self {
        Graph {
            weights: DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }),
            binary: true,
        }
    }

    /// Builds a graph from undirected weighted edges. Repeated edges keep the
    /// last weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for {n} vertices")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("non-finite weight on edge ({i}, {j})")));
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Ok(Self::from_symmetric(weights))
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> DMatrix<f64> {
        self.weights
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Number of unordered vertex pairs with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .map(|j| (0..j).filter(|&i| self.weights[(i, j)] != 0.0).count())
            .sum()
    }

    /// Edge density `|E| / C(n, 2)`; zero for graphs with fewer than two vertices.
    pub fn density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / (n * (n - 1) / 2) as f64
    }

    /// Relabels vertices so that vertex `i` moves to position `p(i)`.
    pub fn relabel(&self, p: &PermutationMap) -> Result<Graph> {
        let n = self.n();
        if p.len() != n {
            return Err(Error::invalid(format!(
                "permutation of size {} cannot relabel a graph on {n} vertices",
                p.len()
            )));
        }
        let inv = p.inverse();
        let weights = DMatrix::from_fn(n, n, |a, b| self.weights[(inv.get(a), inv.get(b))]);
        Ok(Graph { weights, binary: self.binary })
    }

    /// Induced subgraph on `ids`, in the given order.
    pub fn subgraph(&self, ids: &[usize]) -> Graph {
        let k = ids.len();
        let weights = DMatrix::from_fn(k, k, |a, b| self.weights[(ids[a], ids[b])]);
        Graph { weights, binary: self.binary }
    }

    /// Complement of a binary graph.
    pub fn complement(&self) -> Result<Graph> {
        if !self.binary {
            return Err(Error::invalid("complement is only defined for binary graphs"));
        }
        let n = self.n();
        let weights = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 - self.weights[(i, j)] });
        Ok(Graph { weights, binary: true })
    }

    /// Applies `f` to every off-diagonal weight.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Result<Graph> {
        let n = self.n();
        let weights = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { f(self.weights[(i, j)]) });
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weight transform produced a non-finite value"));
        }
        Ok(Self::from_symmetric(weights))
    }
}

/// Bijection on `0..len`; `image[i]` is the target of source `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationMap {
    image: Vec<usize>,
}

impl PermutationMap {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &t in &image {
            if t >= image.len() || seen[t] {
                return Err(Error::invalid(format!("not a permutation: target {t} repeated or out of range")));
            }
            seen[t] = true;
        }
        Ok(PermutationMap { image })
    }

    pub fn identity(n: usize) -> Self {
        PermutationMap { image: (0..n).collect() }
    }

    /// Swaps `a` and `b`, fixing everything else.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::invalid(format!("transposition ({a} {b}) out of range for size {n}")));
        }
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(a, b);
        Ok(PermutationMap { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &t) in self.image.iter().enumerate() {
            inv[t] = i;
        }
        PermutationMap { image: inv }
    }

    /// `self` followed by `then`: `i -> then(self(i))`.
    pub fn then(&self, then: &PermutationMap) -> Result<Self> {
        compose(self, then)
    }

    /// Extends to `offset + len` elements, fixing the first `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        let image = (0..offset).chain(self.image.iter().map(|&t| t + offset)).collect();
        PermutationMap { image }
    }
}

impl TryFrom<Vec<usize>> for PermutationMap {
    type Error = Error;

    fn try_from(image: Vec<usize>) -> Result<Self> {
        PermutationMap::new(image)
    }
}

impl From<PermutationMap> for Vec<usize> {
    fn from(p: PermutationMap) -> Self {
        p.image
    }
}

/// `image[i] = q.image[p.image[i]]`.
pub fn compose(p: &PermutationMap, q: &PermutationMap) -> Result<PermutationMap> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!("cannot compose permutations of sizes {} and {}", p.len(), q.len())));
    }
    Ok(PermutationMap { image: p.image.iter().map(|&t| q.image[t]).collect() })
}

/// Partition of the vertex set into seeds (known correspondence) and
/// unseeded vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSplit {
    n: usize,
    seed_ids: Vec<usize>,
    unseeded_ids: Vec<usize>,
}

impl SeedSplit {
    /// Seeds `0..s`, unseeded `s..n`.
    pub fn canonical(n: usize, s: usize) -> Result<Self> {
        if s > n {
            return Err(Error::invalid(format!("seed count {s} exceeds vertex count {n}")));
        }
        Ok(SeedSplit { n, seed_ids: (0..s).collect(), unseeded_ids: (s..n).collect() })
    }

    /// Seeds in the given order; unseeded vertices in increasing order.
    pub fn from_seeds(n: usize, seed_ids: &[usize]) -> Result<Self> {
        let mut is_seed = vec![false; n];
        for &v in seed_ids {
            if v >= n {
                return Err(Error::invalid(format!("seed {v} out of range for {n} vertices")));
            }
            if is_seed[v] {
                return Err(Error::invalid(format!("seed {v} listed twice")));
            }
            is_seed[v] = true;
        }
        let unseeded_ids = (0..n).filter(|&v| !is_seed[v]).collect();
        Ok(SeedSplit { n, seed_ids: seed_ids.to_vec(), unseeded_ids })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.seed_ids.len()
    }

    pub fn u(&self) -> usize {
        self.unseeded_ids.len()
    }

    pub fn seed_ids(&self) -> &[usize] {
        &self.seed_ids
    }

    pub fn unseeded_ids(&self) -> &[usize] {
        &self.unseeded_ids
    }

    pub fn is_canonical(&self) -> bool {
        self.seed_ids.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// Relabelling that moves seed `k` to position `k` and the `k`-th unseeded
    /// vertex to position `s + k`.
    pub fn canonical_order(&self) -> PermutationMap {
        let mut image = vec![0; self.n];
        for (k, &v) in self.seed_ids.iter().enumerate() {
            image[v] = k;
        }
        let s = self.s();
        for (k, &v) in self.unseeded_ids.iter().enumerate() {
            image[v] = s + k;
        }
        PermutationMap { image }
    }

    /// Reorders `g` into canonical layout, returning the relabelled graph,
    /// the canonical split and the relabelling applied.
    pub fn canonicalize(&self, g: &Graph) -> Result<(Graph, SeedSplit, PermutationMap)> {
        self.check_graph(g)?;
        let order = self.canonical_order();
        let relabelled = g.relabel(&order)?;
        Ok((relabelled, SeedSplit::canonical(self.n, self.s())?, order))
    }

    pub(crate) fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::invalid(format!(
                "seed split covers {} vertices but the graph has {}",
                self.n,
                g.n()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_canonical(&self) -> Result<()> {
        if !self.is_canonical() {
            return Err(Error::invalid("seeds must occupy indices 0..s; canonicalize the split first"));
        }
        Ok(())
    }
}

/// Permutes the unseeded block of `g` by `q`: unseeded vertex `s + a` moves to
/// `s + q(a)`. Seed rows and columns keep their positions.
pub fn apply_shuffle(g: &Graph, split: &SeedSplit, q: &PermutationMap) -> Result<Graph> {
    split.check_graph(g)?;
    split.require_canonical()?;
    if q.len() != split.u() {
        return Err(Error::invalid(format!(
            "shuffle of size {} does not match {} unseeded vertices",
            q.len(),
            split.u()
        )));
    }
    g.relabel(&q.shifted(split.s()))
}

/// Subgraph induced on the seeds, in seed order.
pub fn induced_seed_subgraph(g: &Graph, split: &SeedSplit) -> Result<Graph> {
    split.check_graph(g)?;
    Ok(g.subgraph(split.seed_ids()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn rejects_asymmetric_and_loops() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 1.0;
        assert!(Graph::from_matrix(m.clone()).is_err());
        m[(1, 0)] = 1.0;
        assert!(Graph::from_matrix(m.clone()).unwrap().is_binary());
        m[(0, 0)] = 1.0;
        assert!(Graph::from_matrix(m).is_err());
        assert!(Graph::from_edges(2, &[(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn weighted_flag() {
        let g = Graph::from_edges(3, &[(0, 1, 0.5)]).unwrap();
        assert!(!g.is_binary());
        assert!(path3().is_binary());
    }

    #[test]
    fn shuffle_identity_is_noop() {
        let g = path3();
        let split = SeedSplit::canonical(3, 1).unwrap();
        assert_eq!(apply_shuffle(&g, &split, &PermutationMap::identity(2)).unwrap(), g);
    }

    #[test]
    fn shuffle_swaps_unseeded_pair_of_path() {
        let split = SeedSplit::canonical(3, 1).unwrap();
        let q = PermutationMap::transposition(2, 0, 1).unwrap();
        let h = apply_shuffle(&path3(), &split, &q).unwrap();
        let expected = Graph::from_edges(3, &[(0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn shuffle_size_mismatch() {
        let split = SeedSplit::canonical(3, 1).unwrap();
        let err = apply_shuffle(&path3(), &split, &PermutationMap::identity(3)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn shuffle_requires_canonical_split() {
        let split = SeedSplit::from_seeds(3, &[2]).unwrap();
        assert!(apply_shuffle(&path3(), &split, &PermutationMap::identity(2)).is_err());
    }

    #[test]
    fn seed_subgraph_examples() {
        let split = SeedSplit::canonical(4, 2).unwrap();
        assert_eq!(induced_seed_subgraph(&Graph::complete(4), &split).unwrap(), Graph::complete(2));
        assert_eq!(induced_seed_subgraph(&Graph::empty(4), &split).unwrap(), Graph::empty(2));

        let g = Graph::from_edges(3, &[(0, 1, 0.5), (1, 2, 0.25)]).unwrap();
        let sub = induced_seed_subgraph(&g, &SeedSplit::canonical(3, 2).unwrap()).unwrap();
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.weight(0, 1), 0.5);
        assert_eq!(sub.weight(1, 0), 0.5);
    }

    #[test]
    fn compose_examples() {
        let q = PermutationMap::new(vec![2, 0, 1]).unwrap();
        assert_eq!(compose(&PermutationMap::identity(3), &q).unwrap(), q);
        assert!(compose(&q, &q.inverse()).unwrap().is_identity());
        let p = PermutationMap::transposition(3, 0, 1).unwrap();
        let r = PermutationMap::transposition(3, 1, 2).unwrap();
        // image[i] = r[p[i]]: 0 -> r[1] = 2, 1 -> r[0] = 0, 2 -> r[2] = 1
        assert_eq!(compose(&p, &r).unwrap().image(), &[2, 0, 1]);
        assert!(compose(&p, &PermutationMap::identity(2)).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(PermutationMap::new(vec![0, 0]).is_err());
        assert!(PermutationMap::new(vec![0, 2]).is_err());
        let p = PermutationMap::try_from(vec![1, 0]).unwrap();
        assert_eq!(p.inverse(), p);
    }

    #[test]
    fn canonicalize_moves_seeds_first() {
        let g = Graph::from_edges(4, &[(3, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let split = SeedSplit::from_seeds(4, &[3, 1]).unwrap();
        let (h, canon, order) = split.canonicalize(&g).unwrap();
        assert!(canon.is_canonical());
        assert_eq!(order.image(), &[2, 1, 3, 0]);
        // seeds 3 and 1 become vertices 0 and 1
        assert_eq!(h.weight(0, 1), 1.0);
        assert_eq!(h.weight(2, 3), 1.0);
        assert_eq!(h.edge_count(), 2);
    }

    fn arb_graph(n: usize) -> impl Strategy<Value = Graph> {
        proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..3.0f64], n * (n - 1) / 2).prop_map(
            move |vals| {
                let mut m = DMatrix::zeros(n, n);
                let mut k = 0;
                for j in 0..n {
                    for i in 0..j {
                        m[(i, j)] = vals[k];
                        m[(j, i)] = vals[k];
                        k += 1;
                    }
                }
                Graph::from_matrix(m).unwrap()
            },
        )
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = PermutationMap> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| PermutationMap::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn shuffle_then_inverse_roundtrips((g, q) in arb_graph(9).prop_flat_map(|g| (Just(g), arb_perm(5)))) {
            let split = SeedSplit::canonical(9, 4).unwrap();
            let h = apply_shuffle(&g, &split, &q).unwrap();
            prop_assert_eq!(apply_shuffle(&h, &split, &q.inverse()).unwrap(), g.clone());
            prop_assert_eq!(induced_seed_subgraph(&h, &split).unwrap(), induced_seed_subgraph(&g, &split).unwrap());
        }

        #[test]
        fn compose_is_associative(p in arb_perm(7), q in arb_perm(7), r in arb_perm(7)) {
            let left = compose(&compose(&p, &q).unwrap(), &r).unwrap();
            let right = compose(&p, &compose(&q, &r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
