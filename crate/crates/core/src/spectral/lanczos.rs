//! Lanczos iteration with full reorthogonalization for the largest-magnitude
//! eigenpairs of a dense symmetric matrix.
//!
//! The start vector comes from a fixed-seed generator so results are
//! deterministic. On breakdown (an invariant Krylov subspace) the iteration
//! restarts from a fresh vector orthogonal to the basis, which leaves a zero
//! coupling in the tridiagonal matrix.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{magnitude_order, unit_random_vector, Spectrum};
use crate::error::{Error, Result};

const START_SEED: u64 = 0x05ee_d1a7;

pub(super) fn top_magnitude(mat: &DMatrix<f64>, k: usize, tol: f64) -> Result<Spectrum> {
    top_magnitude_op(mat.nrows(), mat.norm(), k, tol, |q, w| w.gemv(1.0, mat, q, 0.0))
}

/// Same iteration for an operator known only through `apply(q, w)`, which
/// must overwrite `w` with `M q`. `scale` is the Frobenius norm of `M`.
pub(super) fn top_magnitude_op<F>(n: usize, scale: f64, k: usize, tol: f64, mut apply: F) -> Result<Spectrum>
where
    F: FnMut(&DVector<f64>, &mut DVector<f64>),
{
    if scale == 0.0 {
        return Ok(Spectrum { eigenvalues: vec![0.0; k], eigenvectors: DMatrix::identity(n, k) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = unit_random_vector(n, &mut rng);
    let mut w = DVector::zeros(n);
    let mut next_check = (2 * k + 10).min(n);

    loop {
        apply(&q, &mut w);
        alpha.push(q.dot(&w));
        basis.push(q);
        orthogonalize(&mut w, &basis);
        let residual = w.norm();
        let steps = basis.len();

        if steps == n || (steps >= next_check && residual > 1e-12 * scale) {
            let ritz = ritz_pairs(&alpha, &beta)?;
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&a, &b| magnitude_order(ritz.0[a], ritz.0[b]));
            let top = ritz.0[order[0]].abs().max(f64::MIN_POSITIVE);
            let converged = order[..k]
                .iter()
                .all(|&i| (residual * ritz.1[(steps - 1, i)]).abs() <= tol * top);
            if converged || steps == n {
                let values: Vec<f64> = order[..k].iter().map(|&i| ritz.0[i]).collect();
                let mut vectors = DMatrix::zeros(n, k);
                for (c, &i) in order[..k].iter().enumerate() {
                    let mut v = vectors.column_mut(c);
                    for (j, b) in basis.iter().enumerate() {
                        v.axpy(ritz.1[(j, i)], b, 1.0);
                    }
                }
                for mut col in vectors.column_iter_mut() {
                    let norm = col.norm();
                    col /= norm;
                }
                return Ok(Spectrum::from_unsorted(&values, &vectors, k));
            }
            next_check = (steps + (steps / 4).max(10)).min(n);
        }

        if residual <= 1e-12 * scale {
            // Invariant subspace: continue from a vector orthogonal to it.
            let mut fresh = unit_random_vector(n, &mut rng);
            orthogonalize(&mut fresh, &basis);
            let norm = fresh.norm();
            if norm <= 1e-8 {
                return Err(Error::NumericFailure("Lanczos restart vector collapsed".into()));
            }
            beta.push(0.0);
            q = fresh / norm;
        } else {
            beta.push(residual);
            q = &w / residual;
        }
    }
}

/// Two passes of classical Gram-Schmidt against the whole basis.
fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(w);
            w.axpy(-c, b, 1.0);
        }
    }
}

fn ritz_pairs(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericFailure("tridiagonal eigensolver did not converge".into()))?;
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}
