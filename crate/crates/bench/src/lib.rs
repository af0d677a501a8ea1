//! Shared inputs for the benchmarks.

use idscope_core::synthetic::embedded_hypercube;
use idscope_core::EmbeddingMatrix;

/// A 10-dimensional hypercube embedded in `dim` ambient dimensions.
pub fn workload(n: usize, dim: usize) -> EmbeddingMatrix {
    embedded_hypercube(n, 10, dim, 7).expect("valid workload")
}
