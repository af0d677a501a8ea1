//! Point clouds with known intrinsic dimension.
//!
//! Randomness is pinned for reproducibility across platforms: every stream is
//! a `ChaCha20Rng` created with `seed_from_u64(seed)` and then moved to a
//! fixed stream number, normals come from the `rand_distr` ziggurat sampler
//! (`StandardNormal`) and uniforms from the 53-bit `Standard` `f64` sampler.
//! Points and the embedding map use separate streams, so hypercube points do
//! not depend on the ambient dimension they are embedded in.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

const POINT_STREAM: u64 = 0;
const MAP_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Gaussian,
    Hypercube,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SyntheticKind::Gaussian),
            "hypercube" => Ok(SyntheticKind::Hypercube),
            other => Err(Error::parse(format!("unknown synthetic kind '{other}'"))),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::Gaussian => "gaussian",
            SyntheticKind::Hypercube => "hypercube",
        })
    }
}

/// Everything needed to regenerate a synthetic matrix bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub n: usize,
    /// Ambient dimension.
    pub dim: usize,
    /// Intrinsic dimension; equals `dim` for the Gaussian cloud.
    pub intrinsic: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn gaussian(n: usize, dim: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Gaussian,
            n,
            dim,
            intrinsic: dim,
            seed,
        }
    }

    pub fn hypercube(n: usize, intrinsic: usize, dim: usize, seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Hypercube,
            n,
            dim,
            intrinsic,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim == 0 || self.intrinsic == 0 {
            return Err(Error::precondition(format!(
                "synthetic counts must be at least 1 (n={}, dim={}, intrinsic={})",
                self.n, self.dim, self.intrinsic
            )));
        }
        if self.intrinsic > self.dim {
            return Err(Error::precondition(format!(
                "intrinsic dimension {} exceeds ambient dimension {}",
                self.intrinsic, self.dim
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<EmbeddingMatrix> {
        self.validate()?;
        match self.kind {
            SyntheticKind::Gaussian => gaussian_cloud(self.n, self.dim, self.seed),
            SyntheticKind::Hypercube => embedded_hypercube(self.n, self.intrinsic, self.dim, self.seed),
        }
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SyntheticKind::Gaussian => write!(f, "gaussian n={} d={} seed={}", self.n, self.dim, self.seed),
            SyntheticKind::Hypercube => write!(
                f,
                "hypercube n={} m={} D={} seed={}",
                self.n, self.intrinsic, self.dim, self.seed
            ),
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. standard-normal vectors in `d` dimensions.
pub fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let mut rng = rng(seed, POINT_STREAM);
    let data = Array2::from_shape_simple_fn((n, d), || rng.sample::<f64, _>(StandardNormal));
    EmbeddingMatrix::new(data, None, format!("synthetic gaussian n={n} d={d} seed={seed}"))
}

/// A `dim x m` matrix with orthonormal columns.
///
/// Gram-Schmidt (two passes) on a Gaussian matrix: this is the Q factor of
/// its QR decomposition with a positive R diagonal, hence Haar distributed.
pub fn random_orthonormal(dim: usize, m: usize, seed: u64) -> Result<Array2<f64>> {
    if m > dim {
        return Err(Error::precondition(format!(
            "cannot fit {m} orthonormal columns in {dim} dimensions"
        )));
    }
    let mut rng = rng(seed, MAP_STREAM);
    let mut q = Array2::from_shape_simple_fn((dim, m), || rng.sample::<f64, _>(StandardNormal));
    for j in 0..m {
        for _pass in 0..2 {
            for p in 0..j {
                let (prev, mut cur) = q.multi_slice_mut((ndarray::s![.., p], ndarray::s![.., j]));
                let proj = prev.dot(&cur);
                cur.scaled_add(-proj, &prev);
            }
        }
        let mut col = q.column_mut(j);
        let norm = col.dot(&col).sqrt();
        if norm < 1e-300 {
            return Err(Error::Invariant("rank-deficient Gaussian draw".into()));
        }
        col /= norm;
    }
    Ok(q)
}

/// `n` uniform points of `[0, 1]^m` mapped isometrically into `dim`
/// dimensions.
pub fn embedded_hypercube(n: usize, m: usize, dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let map = random_orthonormal(dim, m, seed)?;
    let cube = unit_cube(n, m, seed);
    EmbeddingMatrix::new(
        cube.dot(&map.t()),
        None,
        format!("synthetic hypercube n={n} m={m} D={dim} seed={seed}"),
    )
}

fn unit_cube(n: usize, m: usize, seed: u64) -> Array2<f64> {
    let mut rng = rng(seed, POINT_STREAM);
    Array2::from_shape_simple_fn((n, m), || rng.gen::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::pairwise_block_distances;
    use ndarray::Axis;

    fn max_gram_error(q: &Array2<f64>) -> f64 {
        let gram = q.t().dot(q);
        let mut worst = 0.0f64;
        for ((i, j), v) in gram.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
        worst
    }

    #[test]
    fn square_map_is_orthogonal() {
        let q = random_orthonormal(3, 3, 1).unwrap();
        assert!(max_gram_error(&q) <= 1e-10);
    }

    #[test]
    fn tall_map_is_orthonormal() {
        let q = random_orthonormal(300, 10, 4).unwrap();
        assert!(max_gram_error(&q) <= 1e-10);
        let q = random_orthonormal(300, 300, 4).unwrap();
        assert!(max_gram_error(&q) <= 1e-10);
    }

    #[test]
    fn too_many_columns() {
        assert!(random_orthonormal(3, 4, 0).is_err());
        assert!(embedded_hypercube(10, 4, 3, 0).is_err());
    }

    #[test]
    fn map_preserves_distances() {
        let cube = unit_cube(60, 7, 3);
        let map = random_orthonormal(40, 7, 3).unwrap();
        let raw = pairwise_block_distances(cube.view(), cube.view()).unwrap();
        let moved = cube.dot(&map.t());
        let mapped = pairwise_block_distances(moved.view(), moved.view()).unwrap();
        for (a, b) in raw.iter().zip(mapped.iter()) {
            assert!((a - b).abs() <= 1e-9 * a.max(1e-12) || (a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn full_dimensional_embedding_is_isometric() {
        let m = embedded_hypercube(50, 5, 5, 9).unwrap();
        let cube = unit_cube(50, 5, 9);
        let a = pairwise_block_distances(cube.view(), cube.view()).unwrap();
        let b = pairwise_block_distances(m.view(), m.view()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.sqrt() - y.sqrt()).abs() <= 1e-9 * x.sqrt().max(1e-12) || (x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn hypercube_points_do_not_depend_on_ambient_dim() {
        let a = embedded_hypercube(40, 3, 3, 5).unwrap();
        let b = embedded_hypercube(40, 3, 50, 5).unwrap();
        let da = pairwise_block_distances(a.view(), a.view()).unwrap();
        let db = pairwise_block_distances(b.view(), b.view()).unwrap();
        for (x, y) in da.iter().zip(db.iter()) {
            assert!((x - y).abs() <= 1e-9 * x.max(1e-9));
        }
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec::hypercube(20, 3, 10, 77);
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        let g = SyntheticSpec::gaussian(20, 4, 77);
        assert_eq!(g.generate().unwrap(), g.generate().unwrap());
        assert_ne!(g.generate().unwrap(), SyntheticSpec::gaussian(20, 4, 78).generate().unwrap());
    }

    #[test]
    fn shapes_and_ranges() {
        let g = gaussian_cloud(100, 8, 1).unwrap();
        assert_eq!((g.rows(), g.dim()), (100, 8));
        let cube = unit_cube(100, 4, 1);
        assert!(cube.iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn gaussian_moments() {
        let g = gaussian_cloud(100_000, 4, 42).unwrap();
        let mean = g.view().mean_axis(Axis(0)).unwrap();
        assert!(mean.iter().all(|m| m.abs() <= 0.02), "{mean}");
        let var = g.view().var_axis(Axis(0), 1.0);
        assert!(var.iter().all(|v| (v - 1.0).abs() <= 0.02), "{var}");
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticSpec::hypercube(0, 1, 1, 0).validate().is_err());
        assert!(SyntheticSpec::hypercube(5, 3, 2, 0).validate().is_err());
        assert!(SyntheticSpec::gaussian(5, 2, 0).validate().is_ok());
        assert_eq!("hypercube".parse::<SyntheticKind>().unwrap(), SyntheticKind::Hypercube);
        assert!("torus".parse::<SyntheticKind>().is_err());
    }
}
