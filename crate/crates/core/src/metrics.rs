//! Matching accuracy, graph agreement scores, distances between aligned
//! graphs, complete-linkage clustering and the adjusted Rand index.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assign::SoftMatch;
use crate::error::{Error, Result};
use crate::graph::{Graph, PermutationMap, SeedSplit};

/// Fraction of positions where `found` and `truth` agree.
pub fn matching_accuracy(found: &PermutationMap, truth: &PermutationMap) -> Result<f64> {
    if found.len() != truth.len() {
        return Err(Error::invalid(format!("cannot compare permutations of sizes {} and {}", found.len(), truth.len())));
    }
    if found.is_empty() {
        return Ok(1.0);
    }
    let hits = found.image().iter().zip(truth.image()).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / found.len() as f64)
}

/// Fraction of source vertices whose true target is among their candidates.
pub fn soft_accuracy(found: &SoftMatch, truth: &PermutationMap) -> Result<f64> {
    if found.u() != truth.len() {
        return Err(Error::invalid(format!("soft match over {} vertices against a truth of size {}", found.u(), truth.len())));
    }
    if truth.is_empty() {
        return Ok(1.0);
    }
    let hits = (0..truth.len()).filter(|&v| found.contains(v, truth.get(v))).count();
    Ok(hits as f64 / truth.len() as f64)
}

fn check_sizes(a: &Graph, b: &Graph) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!("graphs have {} and {} vertices", a.n(), b.n())));
    }
    Ok(())
}

/// `½ Σ_{u,v} (A[u,v] − B[p(u),p(v)])²`, i.e. `½‖A − P B Pᵀ‖²_F` where `p`
/// sends a vertex of `a` to its partner in `b`.
pub fn delta(a: &Graph, b: &Graph, p: &PermutationMap) -> Result<f64> {
    check_sizes(a, b)?;
    if p.len() != a.n() {
        return Err(Error::invalid(format!("permutation of size {} for graphs on {} vertices", p.len(), a.n())));
    }
    let (wa, wb) = (a.weights(), b.weights());
    let n = a.n();
    let mut sum = 0.0;
    for v in 0..n {
        let pv = p.get(v);
        for u in 0..v {
            let diff = wa[(u, v)] - wb[(p.get(u), pv)];
            sum += diff * diff;
        }
    }
    Ok(sum)
}

/// Normalized disagreement `[Δ / C(n,2)] / [δ_A(1−δ_B) + δ_B(1−δ_A)]`, the
/// chance-level disagreement rate being the denominator.
pub fn alignment_ratio(a: &Graph, b: &Graph, p: &PermutationMap) -> Result<f64> {
    check_sizes(a, b)?;
    if !a.is_binary() || !b.is_binary() {
        return Err(Error::invalid("alignment strength is defined for unweighted graphs"));
    }
    let n = a.n();
    if n < 2 {
        return Err(Error::undefined("alignment strength needs at least two vertices"));
    }
    let (da, db) = (a.density(), b.density());
    let chance = da * (1.0 - db) + db * (1.0 - da);
    if chance == 0.0 {
        return Err(Error::undefined("both graphs are empty or both complete; chance disagreement is zero"));
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(delta(a, b, p)? / pairs / chance)
}

/// `1 − alignment_ratio`: 1 for a perfect alignment, near 0 at chance level.
pub fn alignment_strength(a: &Graph, b: &Graph, p: &PermutationMap) -> Result<f64> {
    Ok(1.0 - alignment_ratio(a, b, p)?)
}

fn upper_triangle(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 0..n {
        for i in 0..j {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Pearson correlation of the paired edge weights over all vertex pairs.
pub fn edge_correlation(a: &Graph, b: &Graph) -> Result<f64> {
    check_sizes(a, b)?;
    let (x, y) = (upper_triangle(a.weights()), upper_triangle(b.weights()));
    if x.is_empty() {
        return Err(Error::undefined("no vertex pairs to correlate"));
    }
    let len = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / len, y.iter().sum::<f64>() / len);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, q) in x.iter().zip(&y) {
        let (dx, dy) = (p - mx, q - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::undefined("edge correlation is undefined when a graph has constant edge weights"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// `σ² / (μ(1−μ))` over the above-diagonal entries of a probability matrix,
/// with the population variance.
pub fn heterogeneity_correlation(p: &DMatrix<f64>) -> Result<f64> {
    if p.nrows() != p.ncols() || p.nrows() < 2 {
        return Err(Error::invalid(format!("need a square matrix with at least two rows, got {:?}", p.shape())));
    }
    let vals = upper_triangle(p);
    if let Some(bad) = vals.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("edge probability {bad} outside [0, 1]")));
    }
    let len = vals.len() as f64;
    let mu = vals.iter().sum::<f64>() / len;
    if mu <= 0.0 || mu >= 1.0 {
        return Err(Error::undefined(format!("mean edge probability {mu} leaves the heterogeneity correlation undefined")));
    }
    if vals.iter().all(|&v| v == vals[0]) {
        return Ok(0.0);
    }
    let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / len;
    Ok(var / (mu * (1.0 - mu)))
}

/// `1 − (1 − ρ_e)(1 − ρ_h)`.
pub fn total_correlation(rho_e: f64, rho_h: f64) -> f64 {
    1.0 - (1.0 - rho_e) * (1.0 - rho_h)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rho_e: f64,
    pub rho_h: f64,
    pub rho_t: f64,
}

impl CorrelationReport {
    pub fn new(rho_e: f64, rho_h: f64) -> Self {
        CorrelationReport { rho_e, rho_h, rho_t: total_correlation(rho_e, rho_h) }
    }

    /// Edge correlation of an aligned pair against the heterogeneity of `p`.
    pub fn measure(a: &Graph, b: &Graph, p: &DMatrix<f64>) -> Result<Self> {
        Ok(CorrelationReport::new(edge_correlation(a, b)?, heterogeneity_correlation(p)?))
    }
}

/// Symmetric, nonnegative, zero-diagonal matrix of distances between graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    values: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(Error::invalid(format!("distance matrix must be square, got {:?}", values.shape())));
        }
        for i in 0..n {
            if values[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("distance matrix diagonal entry {i} is {}", values[(i, i)])));
            }
            for j in 0..i {
                let v = values[(i, j)];
                if v != values[(j, i)] || !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid(format!("distance entry ({i}, {j}) is not a symmetric finite nonnegative value")));
                }
            }
        }
        Ok(DistanceMatrix { values })
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Mean distance from each graph to all the others.
    pub fn row_means(&self) -> Vec<f64> {
        let n = self.size();
        if n < 2 {
            return vec![0.0; n];
        }
        (0..n).map(|i| self.values.row(i).sum() / (n - 1) as f64).collect()
    }

    /// Graph indices ordered by decreasing row mean; ties keep index order.
    pub fn anomaly_ranking(&self) -> Vec<usize> {
        let means = self.row_means();
        let mut order: Vec<usize> = (0..self.size()).collect();
        order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));
        order
    }

    /// Entrywise mean of several matrices of the same size.
    pub fn mean(items: &[DistanceMatrix]) -> Result<DistanceMatrix> {
        let first = items.first().ok_or_else(|| Error::invalid("no distance matrices to average"))?;
        if items.iter().any(|d| d.size() != first.size()) {
            return Err(Error::invalid("distance matrices differ in size"));
        }
        let mut sum = DMatrix::zeros(first.size(), first.size());
        for d in items {
            sum += &d.values;
        }
        Ok(DistanceMatrix { values: sum / items.len() as f64 })
    }
}

/// Full-vertex map from graph `i` to graph `j`: seeds fixed, unseeded vertex
/// `unseeded[v]` sent to `unseeded[q(v)]`.
pub fn full_alignment(split: &SeedSplit, q: &PermutationMap) -> Result<PermutationMap> {
    if q.len() != split.u() {
        return Err(Error::invalid(format!("matching of size {} for {} unseeded vertices", q.len(), split.u())));
    }
    let mut image: Vec<usize> = (0..split.n()).collect();
    let ids = split.unseeded_ids();
    for (v, &from) in ids.iter().enumerate() {
        image[from] = ids[q.get(v)];
    }
    PermutationMap::new(image)
}

/// Frobenius distance `‖A_i − P A_j Pᵀ‖_F` for every pair, where `matching(i, j)`
/// maps graph `i`'s unseeded vertices to graph `j`'s. Only pairs `i < j` are
/// evaluated; the matrix is mirrored. `squared` skips the square root.
pub fn pairwise_distances<F>(graphs: &[Graph], split: &SeedSplit, matching: F, squared: bool) -> Result<DistanceMatrix>
where
    F: Fn(usize, usize) -> PermutationMap + Sync,
{
    let m = graphs.len();
    for g in graphs {
        if g.n() != split.n() {
            return Err(Error::invalid(format!("graph on {} vertices for a split over {}", g.n(), split.n())));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let dists = crate::par_map(pairs.len(), |k| -> Result<f64> {
        let (i, j) = pairs[k];
        let p = full_alignment(split, &matching(i, j))?;
        let sq = 2.0 * delta(&graphs[i], &graphs[j], &p)?;
        Ok(if squared { sq } else { sq.sqrt() })
    });
    let mut values = DMatrix::zeros(m, m);
    for (&(i, j), d) in pairs.iter().zip(dists) {
        let d = d?;
        values[(i, j)] = d;
        values[(j, i)] = d;
    }
    DistanceMatrix::new(values)
}

/// Agglomerative clustering with complete linkage, cut at `k` clusters.
/// Among equally close cluster pairs the one with the smallest
/// (min member, min member) index pair merges first. Labels are numbered by
/// first appearance.
pub fn complete_linkage_clusters(d: &DistanceMatrix, k: usize) -> Result<Vec<usize>> {
    let n = d.size();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("cannot cut {n} items into {k} clusters")));
    }
    // clusters kept sorted by smallest member
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut link = d.values().clone();
    while clusters.len() > k {
        let c = clusters.len();
        let (mut best, mut pair) = (f64::INFINITY, (0, 1));
        for a in 0..c {
            for b in a + 1..c {
                if link[(a, b)] < best {
                    best = link[(a, b)];
                    pair = (a, b);
                }
            }
        }
        let (a, b) = pair;
        let merged_row: Vec<f64> = (0..c).map(|x| link[(a, x)].max(link[(b, x)])).collect();
        for x in 0..c {
            link[(a, x)] = merged_row[x];
            link[(x, a)] = merged_row[x];
        }
        link[(a, a)] = 0.0;
        link = link.remove_row(b).remove_column(b);
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
    }
    let mut labels = vec![0; n];
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by_key(|&c| clusters[c].iter().min().copied());
    for (label, &c) in order.iter().enumerate() {
        for &i in &clusters[c] {
            labels[i] = label;
        }
    }
    Ok(labels)
}

fn choose2(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index from the pair-counting contingency table. Returns 1
/// when both partitions are trivial in the same way.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("label vectors of lengths {} and {}", a.len(), b.len())));
    }
    use std::collections::HashMap;
    let mut table: HashMap<(usize, usize), usize> = HashMap::new();
    let mut rows: HashMap<usize, usize> = HashMap::new();
    let mut cols: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len());
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
