//! Intrinsic dimension estimation for embedding matrices.
//!
//! The pipeline is: load an [`EmbeddingMatrix`], find exact Euclidean
//! k-nearest neighbours ([`knn::exact_knn`]), turn each neighbour list into a
//! maximum-likelihood local intrinsic dimension ([`estimator::lid_all`]),
//! aggregate them with a harmonic mean ([`estimator::global_id`]) and compare
//! against the extrinsic dimension ([`estimator::redundancy`]).

pub mod error;
pub mod estimator;
pub mod ingest;
pub mod knn;
pub mod matrix;
pub mod report;
mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use estimator::{estimate, EstimatorOptions, IdReport, LidNormalization, LidStats, LidVector};
pub use ingest::Format;
pub use knn::NeighborTable;
pub use matrix::EmbeddingMatrix;
pub use report::{DensityCurve, DensityMethod, RankSuggestion, SeriesPoint};
pub use synthetic::{SyntheticKind, SyntheticSpec};
