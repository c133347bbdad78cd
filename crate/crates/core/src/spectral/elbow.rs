use crate::error::{Error, Result};

/// Chosen embedding dimension from a scree of eigenvalue magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Elbow {
    pub dimension: usize,
    /// No elbow exists (all magnitudes equal); the dimension fell back to 1.
    pub degenerate: bool,
}

/// Within-group sum of squares for splitting `x` after its first `q` values.
fn split_sum_of_squares(x: &[f64], q: usize) -> f64 {
    let ss = |g: &[f64]| {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    };
    ss(&x[..q]) + ss(&x[q..])
}

/// First profile-likelihood elbow: the split of the scree into two Gaussian
/// groups with a shared variance that maximizes the likelihood. For a fixed
/// scree length that is the split with the least within-group sum of squares.
fn first_elbow(x: &[f64]) -> usize {
    let mut best = (1, f64::INFINITY);
    for q in 1..x.len() {
        let ss = split_sum_of_squares(x, q);
        if ss < best.1 {
            best = (q, ss);
        }
    }
    best.0
}

fn sorted_magnitudes(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("cannot select a dimension from an empty scree"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("scree contains non-finite values"));
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// Cumulative positions of the first `count` elbows. Each further elbow is
/// found on the part of the scree after the previous one.
pub fn profile_likelihood_elbows(values: &[f64], count: usize) -> Result<Vec<usize>> {
    let mags = sorted_magnitudes(values)?;
    let mut elbows = Vec::with_capacity(count);
    let mut offset = 0;
    while elbows.len() < count && mags.len() - offset >= 2 {
        offset += first_elbow(&mags[offset..]);
        elbows.push(offset);
    }
    Ok(elbows)
}

/// Dimension at the first profile-likelihood elbow of the magnitude scree,
/// capped at `max_d` and never below 1.
pub fn select_dimension(values: &[f64], max_d: usize) -> Result<Elbow> {
    select_elbow(values, 1, max_d)
}

/// Like [`select_dimension`] but at the `index`-th elbow (1-based), falling
/// back to the last elbow found.
pub fn select_elbow(values: &[f64], index: usize, max_d: usize) -> Result<Elbow> {
    if index == 0 {
        return Err(Error::invalid("elbow index is 1-based"));
    }
    let mags = sorted_magnitudes(values)?;
    let cap = max_d.max(1);
    let top = mags[0];
    let bottom = mags[mags.len() - 1];
    if top == 0.0 || top - bottom <= 1e-12 * top {
        log::warn!("scree is flat; no elbow exists, using dimension 1");
        return Ok(Elbow { dimension: 1, degenerate: true });
    }
    let elbows = profile_likelihood_elbows(&mags, index)?;
    let dimension = elbows.last().copied().unwrap_or(1).clamp(1, cap);
    Ok(Elbow { dimension, degenerate: false })
}
