//! Seeded matching of multiple unaligned graphs without edge correlation.
//!
//! The pipeline jointly embeds the seed vertices of every graph with the
//! omnibus embedding, projects each unseeded vertex into that frame with a
//! least-squares out-of-sample fit, and aligns the unseeded vertices across
//! graphs by solving linear assignment problems on Euclidean distances.
//!
//! Around that pipeline sit the random dot product graph samplers used for
//! simulation, graph similarity metrics (alignment strength, correlations,
//! Frobenius distances, complete-linkage clustering, ARI) and a shuffled
//! two-sample hypothesis test calibrated by Monte Carlo.
//!
//! ```
//! use omnimatch::{assign, graph::{Graph, SeedSplit}, models, rng};
//!
//! let mut rng = rng::replicate_rng(7, 0);
//! let cfg = models::ModelConfig::new(300, 2, 2, 3, 7).unwrap();
//! let x = models::sample_dirichlet_latents(&cfg, &mut rng);
//! let graphs = models::sample_jrdpg(&x, 2, &mut rng).unwrap();
//! let split = SeedSplit::canonical(300, 290).unwrap();
//! let aligned = assign::omnimatch(&graphs, &split, assign::DimSpec::Fixed(2), assign::AlignMode::Pairwise).unwrap();
//! assert_eq!(aligned.matching(0, 1).permutation.len(), 10);
//! ```

pub mod assign;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod models;
pub mod omni;
pub mod oos;
pub mod rng;
pub mod spectral;
pub mod testing;

pub use error::{Error, Result};
pub use graph::{Graph, PermutationMap, SeedSplit};
pub use spectral::EmbeddingMatrix;

/// Map over replicate indices, in parallel when the `parallel` feature is on.
/// Output order always follows the input order.
pub fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}
