use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cycle3() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0., 1., 1., 1., 0., 1., 1., 1., 0.])
}

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v: f64 = rng.random::<f64>() - 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn max_pair_residual(mat: &DMatrix<f64>, s: &Spectrum) -> f64 {
    (0..s.eigenvalues.len())
        .map(|i| {
            let v = s.eigenvectors.column(i);
            (mat * v - v * s.eigenvalues[i]).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn identity_spectrum() {
    let s = eig_symmetric(&DMatrix::identity(3, 3)).unwrap();
    assert_eq!(s.eigenvalues.len(), 3);
    for v in s.eigenvalues {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn three_cycle_spectrum_matches_characteristic_polynomial() {
    let a = cycle3();
    let s = eig_symmetric(&a).unwrap();
    let expected = [2.0, -1.0, -1.0];
    for (got, want) in s.eigenvalues.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        // independent check: det(A - λI) vanishes at each root
        let det = (&a - DMatrix::identity(3, 3) * want).determinant();
        assert!(det.abs() < 1e-12);
    }
}

#[test]
fn diagonal_sorted_by_magnitude() {
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -3.0, 5.0]));
    let s = eig_symmetric(&d).unwrap();
    assert_eq!(s.eigenvalues, vec![5.0, -3.0, 1.0]);
    // sign convention: largest entry of each vector is +1
    assert_eq!(s.eigenvectors, DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 1., 0., 1., 0., 0.]));
}

#[test]
fn rejects_asymmetric_input() {
    let mut m = cycle3();
    m[(0, 1)] = 0.5;
    assert!(matches!(eig_symmetric(&m), Err(Error::InvalidArgument(_))));
    assert!(matches!(eig_symmetric(&DMatrix::zeros(2, 3)), Err(Error::InvalidArgument(_))));
}

#[test]
fn dense_pairs_are_accurate_and_orthonormal() {
    let m = random_symmetric(60, 3);
    let s = eig_symmetric(&m).unwrap();
    assert!(max_pair_residual(&m, &s) <= 1e-8 * m.norm());
    let gram = s.eigenvectors.transpose() * &s.eigenvectors;
    assert!((gram - DMatrix::identity(60, 60)).amax() < 1e-8);
    let recon = &s.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(s.eigenvalues.clone())) * s.eigenvectors.transpose();
    assert!((recon - &m).norm() <= 1e-7 * m.norm());
    for w in s.eigenvalues.windows(2) {
        assert!(w[0].abs() >= w[1].abs());
    }
}

#[test]
fn lanczos_agrees_with_dense() {
    for (n, k, seed) in [(300, 5, 1), (260, 12, 2), (500, 3, 9)] {
        let m = random_symmetric(n, seed);
        let dense = dense_eigen(&m, k).unwrap();
        let lan = lanczos::top_magnitude(&m, k, EIG_TOLERANCE).unwrap();
        for i in 0..k {
            assert!((dense.eigenvalues[i] - lan.eigenvalues[i]).abs() < 1e-9, "n={n} i={i}");
            let overlap = dense.eigenvectors.column(i).dot(&lan.eigenvectors.column(i));
            assert!((overlap - 1.0).abs() < 1e-6, "n={n} i={i} overlap={overlap}");
        }
        assert!(max_pair_residual(&m, &lan) <= 1e-8 * m.norm());
    }
}

#[test]
fn lanczos_handles_low_rank_breakdown() {
    // rank-2 matrix: the Krylov space is exhausted after two steps
    let n = 250;
    let x = DMatrix::from_fn(n, 2, |i, j| ((i * (j + 3)) % 7) as f64 / 7.0 + 0.1);
    let p = &x * x.transpose();
    let lan = lanczos::top_magnitude(&p, 4, EIG_TOLERANCE).unwrap();
    let dense = dense_eigen(&p, 4).unwrap();
    for i in 0..2 {
        assert!((lan.eigenvalues[i] - dense.eigenvalues[i]).abs() < 1e-8 * dense.eigenvalues[0]);
    }
    assert!(lan.eigenvalues[2].abs() < 1e-8 * dense.eigenvalues[0]);
    assert!(max_pair_residual(&p, &lan) <= 1e-8 * p.norm());
}

#[test]
fn ase_of_three_cycle() {
    let x = ase(&cycle3(), 1).unwrap();
    let target = (2.0f64 / 3.0).sqrt();
    for i in 0..3 {
        assert!((x.values()[(i, 0)] - target).abs() < 1e-12);
    }
}

#[test]
fn ase_of_zero_matrix_warns() {
    let out = ase_detailed(&DMatrix::zeros(4, 4), 1).unwrap();
    assert!(out.embedding.values().iter().all(|&v| v == 0.0));
    assert_eq!(out.warnings, vec![SpectralWarning::ZeroSpectrum]);
}

#[test]
fn ase_recovers_rank_one_factor() {
    let x = DVector::from_vec(vec![0.6, 0.8]);
    let p = &x * x.transpose();
    let e = ase(&p, 1).unwrap();
    assert!((e.values()[(0, 0)] - 0.6).abs() < 1e-12);
    assert!((e.values()[(1, 0)] - 0.8).abs() < 1e-12);
}

#[test]
fn ase_rejects_oversized_dimension() {
    assert!(matches!(ase(&cycle3(), 4), Err(Error::InvalidArgument(_))));
    assert!(matches!(ase(&cycle3(), 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn ase_flags_tied_cutoff() {
    // 3-cycle: magnitudes 2, 1, 1; cutting after the second splits a tie
    let out = ase_detailed(&cycle3(), 2).unwrap();
    assert!(matches!(out.warnings[..], [SpectralWarning::TiedCutoff { d: 2, .. }]));
}

#[test]
fn ase_of_gram_matrix_matches_latents_up_to_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [50, 400] {
        let x = DMatrix::from_fn(n, 3, |_, _| rng.random::<f64>() * 0.5);
        let p = &x * x.transpose();
        let e = ase(&p, 3).unwrap();
        let r = procrustes(&e, &EmbeddingMatrix::new(x.clone()).unwrap()).unwrap();
        assert!(r.residual <= 1e-6, "n={n} residual={}", r.residual);
    }
}

#[test]
fn procrustes_identity_and_rotation() {
    let x = EmbeddingMatrix::new(DMatrix::from_row_slice(3, 2, &[1., 2., -1., 0.5, 0.3, 0.3])).unwrap();
    let r = procrustes(&x, &x).unwrap();
    assert!((r.w.clone() - DMatrix::identity(2, 2)).amax() < 1e-12);
    assert!(r.residual < 1e-12);

    let theta = 0.7f64;
    let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let y = EmbeddingMatrix::new(x.values() * &rot).unwrap();
    let r = procrustes(&x, &y).unwrap();
    assert!(r.residual < 1e-10);
    assert!((y.values() * &r.w - x.values()).amax() < 1e-8);
    assert!((r.w.transpose() * &r.w - DMatrix::identity(2, 2)).amax() < 1e-8);
}

#[test]
fn procrustes_quarter_turn() {
    let x = EmbeddingMatrix::new(DMatrix::identity(2, 2)).unwrap();
    let y = EmbeddingMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.])).unwrap();
    let r = procrustes(&x, &y).unwrap();
    // polar factor of yᵀx = yᵀ, itself orthogonal
    let expected = DMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
    assert!((r.w - expected).amax() < 1e-12);
    assert!(r.residual < 1e-12);
}

#[test]
fn procrustes_shape_mismatch() {
    let x = EmbeddingMatrix::new(DMatrix::zeros(3, 2)).unwrap();
    let y = EmbeddingMatrix::new(DMatrix::zeros(2, 2)).unwrap();
    assert!(matches!(procrustes(&x, &y), Err(Error::InvalidArgument(_))));
}

/// Gaussian profile log-likelihood of splitting after `q`, evaluated
/// directly with the pooled variance.
fn profile_loglik(x: &[f64], q: usize) -> f64 {
    let p = x.len();
    let (a, b) = x.split_at(q);
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let (m1, m2) = (mean(a), mean(b));
    let ss: f64 = a.iter().map(|v| (v - m1).powi(2)).sum::<f64>() + b.iter().map(|v| (v - m2).powi(2)).sum::<f64>();
    let var = ss / p as f64;
    if var == 0.0 {
        return f64::INFINITY;
    }
    let lp = |v: f64, m: f64| -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v - m).powi(2) / (2.0 * var);
    a.iter().map(|&v| lp(v, m1)).sum::<f64>() + b.iter().map(|&v| lp(v, m2)).sum::<f64>()
}

fn oracle_elbow(x: &[f64]) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for q in 1..x.len() {
        let l = profile_loglik(x, q);
        if l > best.1 {
            best = (q, l);
        }
    }
    best.0
}

#[test]
fn elbow_examples() {
    let scree = [100.0, 99.0, 1.0, 0.9, 0.8];
    assert_eq!(oracle_elbow(&scree), 2);
    assert_eq!(select_dimension(&scree, 10).unwrap(), Elbow { dimension: 2, degenerate: false });
    assert_eq!(oracle_elbow(&[10.0, 1.0]), 1);
    assert_eq!(select_dimension(&[10.0, 1.0], 10).unwrap().dimension, 1);
    assert_eq!(select_dimension(&[5.0; 4], 10).unwrap(), Elbow { dimension: 1, degenerate: true });
    assert_eq!(select_dimension(&scree, 1).unwrap().dimension, 1);
    assert!(matches!(select_dimension(&[], 3), Err(Error::InvalidArgument(_))));
}

#[test]
fn later_elbows() {
    let scree = [50.0, 49.0, 10.0, 9.5, 9.0, 0.2, 0.1, 0.1];
    assert_eq!(profile_likelihood_elbows(&scree, 2).unwrap(), vec![2, 5]);
    assert_eq!(select_elbow(&scree, 2, 10).unwrap().dimension, 5);
}

proptest! {
    #[test]
    fn elbow_matches_likelihood_oracle(mut v in proptest::collection::vec(0.01..100.0f64, 2..12)) {
        v.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(v[0] - v[v.len() - 1] > 1e-6);
        prop_assert_eq!(select_dimension(&v, usize::MAX).unwrap().dimension, oracle_elbow(&v));
    }

    #[test]
    fn elbow_is_scale_invariant(mut v in proptest::collection::vec(0.01..100.0f64, 2..12), c in 0.001..1000.0f64) {
        v.sort_by(|a, b| b.total_cmp(a));
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        prop_assert_eq!(select_dimension(&v, 20).unwrap(), select_dimension(&scaled, 20).unwrap());
    }
}
