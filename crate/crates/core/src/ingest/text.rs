use std::path::Path;

use ndarray::Array2;

use super::{parse_value, read_text};
use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

/// Loads a word2vec text file: an `n d` header, then `token v1 .. vd` rows.
pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(format!("{}: empty file", path.display())))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_count = |s: &str| s.parse::<usize>().ok();
    let (n, d) = match fields.as_slice() {
        [n, d] => match (parse_count(n), parse_count(d)) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(malformed_header(path, header)),
        },
        _ => return Err(malformed_header(path, header)),
    };
    if n == 0 || d == 0 {
        return Err(Error::parse(format!(
            "{}: header declares n={n}, d={d}; both must be at least 1",
            path.display()
        )));
    }

    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        let row = labels.len() + 1;
        if row > n {
            return Err(Error::parse(format!(
                "{}: more rows than the declared n={n} (line {line_no})",
                path.display()
            )));
        }
        let (token, rest) = split_row(line, d, line_no, path)?;
        for field in rest {
            values.push(parse_value(field, row, path)?);
        }
        labels.push(token.to_string());
    }
    if labels.len() != n {
        return Err(Error::parse(format!(
            "{}: header declares {n} rows, found {}",
            path.display(),
            labels.len()
        )));
    }
    build(path, "word2vec", n, d, values, labels)
}

/// Loads a GloVe text file: `token v1 .. vd` per line, no header.
pub fn load_glove_text(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut dim = None;
    for (line_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = line_idx + 1;
        let d = match dim {
            Some(d) => d,
            None => {
                let fields = line.split_whitespace().count();
                if fields < 2 {
                    return Err(Error::parse(format!(
                        "{}: line {line_no} has no vector values",
                        path.display()
                    )));
                }
                *dim.insert(fields - 1)
            }
        };
        let (token, rest) = split_row(line, d, line_no, path)?;
        let row = labels.len() + 1;
        for field in rest {
            values.push(parse_value(field, row, path)?);
        }
        labels.push(token.to_string());
    }
    let d = dim.ok_or_else(|| Error::parse(format!("{}: no rows", path.display())))?;
    let n = labels.len();
    build(path, "glove", n, d, values, labels)
}

fn split_row<'a>(
    line: &'a str,
    d: usize,
    line_no: usize,
    path: &Path,
) -> Result<(&'a str, impl Iterator<Item = &'a str>)> {
    let count = line.split_whitespace().count();
    if count != d + 1 {
        return Err(Error::parse(format!(
            "{}: line {line_no} has {} values, expected d={d}",
            path.display(),
            count.saturating_sub(1)
        )));
    }
    let mut fields = line.split_whitespace();
    let token = fields.next().unwrap_or_default();
    Ok((token, fields))
}

fn malformed_header(path: &Path, header: &str) -> Error {
    Error::parse(format!(
        "{}: malformed word2vec header '{header}', expected 'n d'",
        path.display()
    ))
}

fn build(
    path: &Path,
    kind: &str,
    n: usize,
    d: usize,
    values: Vec<f64>,
    labels: Vec<String>,
) -> Result<EmbeddingMatrix> {
    let data = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::Invariant(format!("row buffer shape: {e}")))?;
    EmbeddingMatrix::new(data, Some(labels), format!("{} ({kind})", path.display()))
}
