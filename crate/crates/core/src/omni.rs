//! Omnibus matrix and joint embedding of several vertex-aligned graphs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{self, EmbeddingMatrix, Spectrum};

/// `(m·s) x (m·s)` block matrix whose `(i, j)` block is `(A_i + A_j) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmnibusMatrix {
    m: usize,
    s: usize,
    values: DMatrix<f64>,
}

impl OmnibusMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.values.view((i * self.s, j * self.s), (self.s, self.s)).into_owned()
    }
}

fn check_graphs(graphs: &[Graph]) -> Result<(usize, usize)> {
    let s = graphs.first().map(Graph::n).ok_or_else(|| Error::invalid("omnibus needs at least one graph"))?;
    if let Some(g) = graphs.iter().find(|g| g.n() != s) {
        return Err(Error::invalid(format!("graphs must share a vertex count: {} vs {s}", g.n())));
    }
    Ok((graphs.len(), s))
}

pub fn build_omnibus(graphs: &[Graph]) -> Result<OmnibusMatrix> {
    let (m, s) = check_graphs(graphs)?;
    let mut values = DMatrix::zeros(m * s, m * s);
    for j in 0..m {
        let b = graphs[j].weights();
        for i in 0..m {
            let a = graphs[i].weights();
            let mut block = values.view_mut((i * s, j * s), (s, s));
            if i == j {
                block.copy_from(a);
            } else {
                block.zip_zip_apply(a, b, |out, x, y| *out = (x + y) / 2.0);
            }
        }
    }
    Ok(OmnibusMatrix { m, s, values })
}

/// Joint embedding output: one block per graph plus the retained eigenvalues.
#[derive(Clone, Debug)]
pub struct OmniEmbedding {
    pub blocks: Vec<EmbeddingMatrix>,
    pub eigenvalues: Vec<f64>,
}

/// `ASE(M, d)` split into per-graph blocks of `s` rows.
pub fn omni_embed(graphs: &[Graph], d: usize) -> Result<Vec<EmbeddingMatrix>> {
    omni_embed_detailed(graphs, d).map(|e| e.blocks)
}

pub fn omni_embed_detailed(graphs: &[Graph], d: usize) -> Result<OmniEmbedding> {
    let (m, s) = check_graphs(graphs)?;
    let n = m * s;
    if d == 0 || d > n {
        return Err(Error::invalid(format!("embedding dimension {d} must lie in 1..={n}")));
    }
    let spectrum = omnibus_spectrum(graphs, spectral::ase_probe(n, d))?;
    let out = spectral::embedding_from_spectrum(&spectrum, d)?;
    let blocks = (0..m).map(|i| out.embedding.slice_rows(i * s, (i + 1) * s, i)).collect();
    Ok(OmniEmbedding { blocks, eigenvalues: out.eigenvalues })
}

/// Above this many flops for the reduced factorization, the implicit
/// operator is cheaper.
const REDUCED_BUDGET: usize = 250_000_000;

/// Leading eigenpairs of the omnibus matrix, computed without forming it
/// unless it is small.
fn omnibus_spectrum(graphs: &[Graph], k: usize) -> Result<Spectrum> {
    let (m, s) = check_graphs(graphs)?;
    let n = m * s;
    if spectral::prefers_dense(n, k) {
        return spectral::top_eigenpairs(build_omnibus(graphs)?.values(), k);
    }
    if m > 2 && k <= 2 * s && m * s * s * s <= REDUCED_BUDGET {
        return reduced_spectrum(graphs, k);
    }
    implicit_spectrum(graphs, k)
}

/// With `G` the stacked graphs and `E` the stacked identities,
/// `M = (G Eᵀ + E Gᵀ) / 2`, so `M` lives in the span of the `2s` columns of
/// `[G E]`. A thin QR of that factor leaves a `2s x 2s` eigenproblem.
fn reduced_spectrum(graphs: &[Graph], k: usize) -> Result<Spectrum> {
    let (m, s) = check_graphs(graphs)?;
    let mut factor = DMatrix::zeros(m * s, 2 * s);
    for (i, g) in graphs.iter().enumerate() {
        factor.view_mut((i * s, 0), (s, s)).copy_from(g.weights());
        factor.view_mut((i * s, s), (s, s)).fill_with_identity();
    }
    let qr = factor.qr();
    let r = qr.r();
    let cross = r.columns(0, s) * r.columns(s, s).transpose();
    let small = spectral::top_eigenpairs(&((&cross + cross.transpose()) * 0.5), k)?;
    let mut eigenvectors = qr.q() * small.eigenvectors;
    spectral::fix_signs(&mut eigenvectors);
    Ok(Spectrum { eigenvalues: small.eigenvalues, eigenvectors })
}

/// Lanczos on the operator whose block row `i` of `M q` is
/// `(A_i Σ_j q_j + Σ_j A_j q_j) / 2`.
fn implicit_spectrum(graphs: &[Graph], k: usize) -> Result<Spectrum> {
    let (m, s) = check_graphs(graphs)?;
    let n = m * s;
    let mut total = DMatrix::zeros(s, s);
    let mut squares = 0.0;
    for g in graphs {
        total += g.weights();
        squares += g.weights().norm_squared();
    }
    let norm = (0.5 * (m as f64 * squares + total.norm_squared())).sqrt();
    let mut sum_q = DVector::zeros(s);
    let mut sum_aq = DVector::zeros(s);
    let mut scratch = DVector::zeros(s);
    spectral::top_eigenpairs_op(n, norm, k, |q, w| {
        sum_q.fill(0.0);
        sum_aq.fill(0.0);
        for (i, g) in graphs.iter().enumerate() {
            let qi = q.rows(i * s, s);
            sum_q += &qi;
            sum_aq.gemv(1.0, g.weights(), &qi, 1.0);
        }
        for (i, g) in graphs.iter().enumerate() {
            scratch.copy_from(&sum_aq);
            scratch.gemv(1.0, g.weights(), &sum_q, 1.0);
            w.rows_mut(i * s, s).copy_from(&(&scratch * 0.5));
        }
    })
}

/// Leading eigenvalue magnitudes of the omnibus matrix, for scree plots and
/// dimension selection.
pub fn omnibus_scree(graphs: &[Graph], count: usize) -> Result<Vec<f64>> {
    let (m, s) = check_graphs(graphs)?;
    Ok(omnibus_spectrum(graphs, count.min(m * s))?.magnitudes())
}
