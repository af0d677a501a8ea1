use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Uniformly samples `count` rows without replacement.
///
/// The selection is a pure function of `(n, count, seed)`; selected rows
/// keep their original relative order and their labels.
pub fn sample_rows(m: &EmbeddingMatrix, count: usize, seed: u64) -> Result<EmbeddingMatrix> {
    let indices = sample_indices(m.rows(), count, seed)?;
    Ok(m.select_rows(&indices))
}

pub(crate) fn sample_indices(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::precondition("sample count must be at least 1"));
    }
    if count > n {
        return Err(Error::precondition(format!(
            "sample count {count} exceeds row count {n}"
        )));
    }
    if count == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, count).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n: usize) -> EmbeddingMatrix {
        let data = ndarray::Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let labels = (0..n).map(|i| format!("t{i}")).collect();
        EmbeddingMatrix::new(data, Some(labels), "t").unwrap()
    }

    #[test]
    fn full_count_is_identity() {
        let m = labeled(10);
        assert_eq!(sample_rows(&m, 10, 1).unwrap(), m);
    }

    #[test]
    fn full_vocabulary_passthrough() {
        let m = labeled(10_000);
        assert_eq!(sample_rows(&m, 10_000, 42).unwrap(), m);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = labeled(10);
        assert_eq!(sample_rows(&m, 3, 7).unwrap(), sample_rows(&m, 3, 7).unwrap());
    }

    #[test]
    fn preserves_order_and_labels() {
        let m = labeled(50);
        let s = sample_rows(&m, 20, 3).unwrap();
        let rows: Vec<usize> = (0..20).map(|i| s.row(i)[0] as usize / 2).collect();
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        for (i, &r) in rows.iter().enumerate() {
            assert_eq!(s.labels().unwrap()[i], format!("t{r}"));
        }
    }

    #[test]
    fn seeds_differ() {
        let mut differing = 0;
        for s in 0..10u64 {
            let a = sample_indices(1000, 100, 2 * s).unwrap();
            let b = sample_indices(1000, 100, 2 * s + 1).unwrap();
            differing += usize::from(a != b);
        }
        assert_eq!(differing, 10);
    }

    #[test]
    fn bad_counts() {
        let m = labeled(5);
        assert!(sample_rows(&m, 0, 1).is_err());
        assert!(sample_rows(&m, 6, 1).is_err());
    }
}
