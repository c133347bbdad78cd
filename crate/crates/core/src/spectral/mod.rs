//! Symmetric eigendecomposition, adjacency spectral embedding (ASE),
//! scree-elbow dimension selection and orthogonal Procrustes alignment.
//!
//! Eigenpairs are always ordered by decreasing |λ| (ties: larger λ first) and
//! every eigenvector is signed so that its largest-magnitude entry is
//! positive. Because `|A|` shares eigenvectors with a symmetric `A` and has
//! eigenvalues `|λ|`, ASE works from the spectrum of `A` directly.

mod elbow;
mod lanczos;

pub use elbow::{profile_likelihood_elbows, select_dimension, select_elbow, Elbow};

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};

/// Matrices up to this order are decomposed densely even when only a few
/// eigenpairs are requested.
const DENSE_LIMIT: usize = 200;
/// Relative residual required of every returned eigenpair.
pub const EIG_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Latent-position estimates, one row per vertex, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    values: DMatrix<f64>,
    graph_index: Vec<usize>,
    in_sample: Vec<bool>,
}

impl EmbeddingMatrix {
    /// In-sample rows from graph 0.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let rows = values.nrows();
        Self::with_provenance(values, vec![0; rows], vec![true; rows])
    }

    pub fn with_provenance(values: DMatrix<f64>, graph_index: Vec<usize>, in_sample: Vec<bool>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if graph_index.len() != values.nrows() || in_sample.len() != values.nrows() {
            return Err(Error::invalid("provenance length does not match the number of rows"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("embedding contains non-finite entries".into()));
        }
        Ok(EmbeddingMatrix { values, graph_index, in_sample })
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row(&self, i: usize) -> RowDVector<f64> {
        self.values.row(i).into_owned()
    }

    pub fn graph_index(&self) -> &[usize] {
        &self.graph_index
    }

    pub fn in_sample(&self) -> &[bool] {
        &self.in_sample
    }

    /// Rows `start..end` as a new embedding, tagged with `graph`.
    pub fn slice_rows(&self, start: usize, end: usize, graph: usize) -> EmbeddingMatrix {
        let values = self.values.rows(start, end - start).into_owned();
        EmbeddingMatrix {
            values,
            graph_index: vec![graph; end - start],
            in_sample: self.in_sample[start..end].to_vec(),
        }
    }

    pub fn with_graph_index(mut self, graph: usize) -> Self {
        self.graph_index = vec![graph; self.rows()];
        self
    }

    /// Concatenates embeddings of equal dimension row-wise.
    pub fn stack(parts: &[&EmbeddingMatrix]) -> Result<EmbeddingMatrix> {
        let d = parts.first().map(|p| p.dim()).ok_or_else(|| Error::invalid("nothing to stack"))?;
        if parts.iter().any(|p| p.dim() != d) {
            return Err(Error::invalid("cannot stack embeddings of different dimensions"));
        }
        let rows: usize = parts.iter().map(|p| p.rows()).sum();
        let mut values = DMatrix::zeros(rows, d);
        let mut graph_index = Vec::with_capacity(rows);
        let mut in_sample = Vec::with_capacity(rows);
        let mut at = 0;
        for p in parts {
            values.rows_mut(at, p.rows()).copy_from(&p.values);
            graph_index.extend_from_slice(&p.graph_index);
            in_sample.extend_from_slice(&p.in_sample);
            at += p.rows();
        }
        Ok(EmbeddingMatrix { values, graph_index, in_sample })
    }
}

/// Eigenpairs sorted by decreasing magnitude; eigenvectors are the columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|v| v.abs()).collect()
    }

    fn from_unsorted(values: &[f64], vectors: &DMatrix<f64>, keep: usize) -> Spectrum {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| magnitude_order(values[a], values[b]));
        order.truncate(keep);
        let eigenvalues = order.iter().map(|&i| values[i]).collect();
        let mut eigenvectors = DMatrix::zeros(vectors.nrows(), order.len());
        for (c, &i) in order.iter().enumerate() {
            eigenvectors.set_column(c, &vectors.column(i));
        }
        fix_signs(&mut eigenvectors);
        Spectrum { eigenvalues, eigenvectors }
    }
}

pub(crate) fn magnitude_order(a: f64, b: f64) -> std::cmp::Ordering {
    b.abs().total_cmp(&a.abs()).then(b.total_cmp(&a))
}

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
pub(crate) fn fix_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

fn check_symmetric(mat: &DMatrix<f64>) -> Result<()> {
    let n = mat.nrows();
    if mat.ncols() != n {
        return Err(Error::invalid(format!("matrix must be square, got {}x{}", n, mat.ncols())));
    }
    let tol = SYMMETRY_TOLERANCE * mat.amax().max(1.0);
    for j in 0..n {
        for i in 0..j {
            if (mat[(i, j)] - mat[(j, i)]).abs() > tol {
                return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    Ok(())
}

fn dense_eigen(mat: &DMatrix<f64>, keep: usize) -> Result<Spectrum> {
    let eig = mat
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericFailure("symmetric eigensolver did not converge".into()))?;
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    Ok(Spectrum::from_unsorted(&values, &eig.eigenvectors, keep))
}

/// Full spectrum of a symmetric matrix.
pub fn eig_symmetric(mat: &DMatrix<f64>) -> Result<Spectrum> {
    check_symmetric(mat)?;
    dense_eigen(mat, mat.nrows())
}

/// The `k` largest-magnitude eigenpairs. Small matrices are decomposed
/// densely; larger ones use Lanczos iteration with full reorthogonalization.
pub fn top_eigenpairs(mat: &DMatrix<f64>, k: usize) -> Result<Spectrum> {
    check_symmetric(mat)?;
    let n = mat.nrows();
    if k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    if n <= DENSE_LIMIT || 4 * k >= n {
        dense_eigen(mat, k)
    } else {
        lanczos::top_magnitude(mat, k, EIG_TOLERANCE)
    }
}

/// Whether [`top_eigenpairs`] would take the dense path for this size.
pub(crate) fn prefers_dense(n: usize, k: usize) -> bool {
    n <= DENSE_LIMIT || 4 * k >= n
}

/// The `k` largest-magnitude eigenpairs of a symmetric `n x n` operator given
/// by its action `apply(q, w)`: `w = M q`. `norm` is `‖M‖_F`.
pub(crate) fn top_eigenpairs_op<F>(n: usize, norm: f64, k: usize, apply: F) -> Result<Spectrum>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    if k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a {n}x{n} operator")));
    }
    lanczos::top_magnitude_op(n, norm, k, EIG_TOLERANCE, apply)
}

/// Conditions worth reporting that do not prevent an embedding.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralWarning {
    /// Every retained eigenvalue is zero; the embedding is all zeros.
    ZeroSpectrum,
    /// The d-th and (d+1)-th magnitudes coincide, so the retained subspace is
    /// an arbitrary choice.
    TiedCutoff { d: usize, magnitude: f64 },
}

#[derive(Clone, Debug)]
pub struct AseOutput {
    pub embedding: EmbeddingMatrix,
    /// Signed eigenvalues matching the embedding columns.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<SpectralWarning>,
}

/// `d`-dimensional adjacency spectral embedding `U |S|^{1/2}`.
pub fn ase(mat: &DMatrix<f64>, d: usize) -> Result<EmbeddingMatrix> {
    ase_detailed(mat, d).map(|out| out.embedding)
}

pub fn ase_detailed(mat: &DMatrix<f64>, d: usize) -> Result<AseOutput> {
    let n = mat.nrows();
    if d == 0 || d > n {
        return Err(Error::invalid(format!("embedding dimension {d} must lie in 1..={n}")));
    }
    let spectrum = top_eigenpairs(mat, ase_probe(n, d))?;
    embedding_from_spectrum(&spectrum, d)
}

/// Eigenpairs to request for a `d`-dimensional embedding: one extra to detect
/// a tie at the cutoff.
pub(crate) fn ase_probe(n: usize, d: usize) -> usize {
    if d < n {
        d + 1
    } else {
        d
    }
}

/// `U |S|^{1/2}` from the leading eigenpairs (at least `d`, sorted).
pub(crate) fn embedding_from_spectrum(spectrum: &Spectrum, d: usize) -> Result<AseOutput> {
    let probe = spectrum.eigenvalues.len();
    let mut warnings = Vec::new();
    let mags = spectrum.magnitudes();
    if mags[..d].iter().all(|&m| m == 0.0) {
        log::warn!("embedding a matrix with zero spectrum");
        warnings.push(SpectralWarning::ZeroSpectrum);
    } else if probe > d && (mags[d - 1] - mags[d]).abs() <= 1e-12 * mags[0] {
        log::warn!("eigenvalue magnitudes {} and {} tie at the cutoff", d, d + 1);
        warnings.push(SpectralWarning::TiedCutoff { d, magnitude: mags[d - 1] });
    }
    let mut values = spectrum.eigenvectors.columns(0, d).into_owned();
    for (c, m) in mags[..d].iter().enumerate() {
        values.column_mut(c).scale_mut(m.sqrt());
    }
    Ok(AseOutput {
        embedding: EmbeddingMatrix::new(values)?,
        eigenvalues: spectrum.eigenvalues[..d].to_vec(),
        warnings,
    })
}

/// Orthogonal `w` minimizing `‖x − y·w‖_F`.
#[derive(Clone, Debug)]
pub struct ProcrustesRotation {
    pub w: DMatrix<f64>,
    pub residual: f64,
}

/// Solves the orthogonal Procrustes problem through the polar factor of `yᵀx`.
pub fn procrustes(x: &EmbeddingMatrix, y: &EmbeddingMatrix) -> Result<ProcrustesRotation> {
    procrustes_matrices(x.values(), y.values())
}

pub(crate) fn procrustes_matrices(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<ProcrustesRotation> {
    if x.shape() != y.shape() {
        return Err(Error::invalid(format!(
            "procrustes needs equal shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let cross = y.transpose() * x;
    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NumericFailure("SVD failed in procrustes".into())),
    };
    let w = u * v_t;
    let residual = (x - y * &w).norm();
    Ok(ProcrustesRotation { w, residual })
}

pub(crate) fn unit_random_vector(n: usize, rng: &mut impl rand::Rng) -> DVector<f64> {
    let v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    let norm = v.norm();
    v / norm
}

#[cfg(test)]
mod tests;
