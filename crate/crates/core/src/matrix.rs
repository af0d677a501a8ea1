use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// A dense `n x d` matrix of embedding row vectors.
///
/// Values are always stored as `f64` regardless of the precision of the
/// source file. Every value is finite; the constructor rejects anything else.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Array2<f64>,
    labels: Option<Vec<String>>,
    source: String,
}

impl EmbeddingMatrix {
    pub fn new(
        data: Array2<f64>,
        labels: Option<Vec<String>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let (n, d) = data.dim();
        if n == 0 {
            return Err(Error::precondition("embedding matrix has no rows"));
        }
        if d == 0 {
            return Err(Error::precondition("embedding matrix has zero columns"));
        }
        if let Some((idx, _)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::parse(format!(
                "non-finite value at row {}, column {}",
                idx / d + 1,
                idx % d + 1
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::precondition(format!(
                    "label count {} does not match row count {n}",
                    labels.len()
                )));
            }
        }
        Ok(Self {
            data,
            labels,
            source: source.into(),
        })
    }

    /// Builds a matrix from row-major values.
    pub fn from_rows(
        rows: usize,
        dim: usize,
        values: Vec<f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != rows * dim {
            return Err(Error::precondition(format!(
                "expected {} values for a {rows}x{dim} matrix, got {}",
                rows * dim,
                values.len()
            )));
        }
        let data = Array2::from_shape_vec((rows, dim), values)
            .map_err(|e| Error::precondition(e.to_string()))?;
        Self::new(data, None, source)
    }

    /// Number of rows `n`.
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    /// Extrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    /// Keeps only the given rows, in the order given.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let data = self.data.select(Axis(0), indices);
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        Self {
            data,
            labels,
            source: self.source.clone(),
        }
    }

    /// Returns a copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.data * factor, self.labels.clone(), self.source.clone())
    }

    /// Applies `x -> x M` to every row, where `map` is `d x d'`.
    pub fn transformed(&self, map: ArrayView2<'_, f64>) -> Result<Self> {
        if map.nrows() != self.dim() {
            return Err(Error::precondition(format!(
                "map has {} rows, matrix has dimension {}",
                map.nrows(),
                self.dim()
            )));
        }
        Self::new(self.data.dot(&map), self.labels.clone(), self.source.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_non_finite() {
        let err = EmbeddingMatrix::new(array![[1.0, f64::NAN]], None, "t").unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn rejects_label_mismatch() {
        let labels = Some(vec!["a".to_string()]);
        assert!(EmbeddingMatrix::new(array![[1.0], [2.0]], labels, "t").is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(EmbeddingMatrix::from_rows(0, 3, vec![], "t").is_err());
        assert!(EmbeddingMatrix::from_rows(3, 0, vec![], "t").is_err());
    }

    #[test]
    fn select_keeps_label_pairing() {
        let m = EmbeddingMatrix::new(
            array![[0.0], [1.0], [2.0]],
            Some(vec!["a".into(), "b".into(), "c".into()]),
            "t",
        )
        .unwrap();
        let s = m.select_rows(&[2, 0]);
        assert_eq!(s.labels().unwrap(), ["c", "a"]);
        assert_eq!(s.row(0)[0], 2.0);
    }
}
