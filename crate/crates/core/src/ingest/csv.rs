use std::path::Path;

use ndarray::Array2;

use super::{parse_value, read_text};
use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Loads comma-separated rows. A non-numeric first field on the first line
/// marks the first column as labels for the whole file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let (_, first) = lines
        .peek()
        .copied()
        .ok_or_else(|| Error::parse(format!("{}: no rows", path.display())))?;
    let first_fields: Vec<&str> = first.split(',').collect();
    let labeled = first_fields[0].trim().parse::<f64>().is_err();
    let width = first_fields.len();
    let d = if labeled { width - 1 } else { width };
    if d == 0 {
        return Err(Error::parse(format!(
            "{}: first row has no numeric columns",
            path.display()
        )));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (line_idx, line) in lines {
        n += 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::parse(format!(
                "{}: ragged row {n} (line {}): {} fields, expected {width}",
                path.display(),
                line_idx + 1,
                fields.len()
            )));
        }
        let numeric = if labeled {
            labels.push(fields[0].trim().to_string());
            &fields[1..]
        } else {
            &fields[..]
        };
        for field in numeric {
            values.push(parse_value(field, n, path)?);
        }
    }
    let data = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::Invariant(format!("row buffer shape: {e}")))?;
    EmbeddingMatrix::new(
        data,
        labeled.then_some(labels),
        format!("{} (csv)", path.display()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn labeled() {
        let m = load_csv(file_with("a,1,2\nb,3,4").path()).unwrap();
        assert_eq!((m.rows(), m.dim()), (2, 2));
        assert_eq!(m.labels().unwrap(), ["a", "b"]);
    }

    #[test]
    fn unlabeled() {
        let m = load_csv(file_with("1,2\n3,4\n").path()).unwrap();
        assert_eq!((m.rows(), m.dim()), (2, 2));
        assert!(m.labels().is_none());
        assert_eq!(m.row(1).to_vec(), vec![3.0, 4.0]);
    }

    #[test]
    fn ragged() {
        let err = load_csv(file_with("a,1\nb,1,2").path()).unwrap_err().to_string();
        assert!(err.contains("ragged row 2"), "{err}");
    }

    #[test]
    fn non_finite() {
        assert!(load_csv(file_with("1,2\n3,inf").path()).is_err());
        assert!(load_csv(file_with("nan,2\n3,4").path()).is_err());
    }

    #[test]
    fn empty() {
        assert!(load_csv(file_with("\n\n").path()).is_err());
        assert!(load_csv(file_with("a\nb\n").path()).is_err());
    }
}
