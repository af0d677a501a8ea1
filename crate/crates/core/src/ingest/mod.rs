//! Loading embedding matrices from disk.
//!
//! Supported inputs are word2vec text (with an `n d` header line), GloVe text
//! (no header), CSV with an optional label column, and npy v1.0 files holding
//! a 2-D little-endian `f4`/`f8` array in C order.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

mod csv;
mod npy;
mod sample;
mod text;

pub use self::csv::load_csv;
pub use self::npy::{load_npy, read_npy, write_npy, NpyDtype};
pub use self::sample::sample_rows;
pub use self::text::{load_glove_text, load_word2vec_text};

/// On-disk embedding formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Word2vec,
    Glove,
    Npy,
    Csv,
    Auto,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "word2vec" | "w2v" => Ok(Format::Word2vec),
            "glove" => Ok(Format::Glove),
            "npy" => Ok(Format::Npy),
            "csv" => Ok(Format::Csv),
            "auto" => Ok(Format::Auto),
            other => Err(Error::parse(format!("unknown format '{other}'"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Format::Word2vec => "word2vec",
            Format::Glove => "glove",
            Format::Npy => "npy",
            Format::Csv => "csv",
            Format::Auto => "auto",
        };
        f.write_str(s)
    }
}

/// Loads `path` in the given format, resolving [`Format::Auto`] first.
pub fn load(path: impl AsRef<Path>, format: Format) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let format = match format {
        Format::Auto => detect_format(path)?,
        f => f,
    };
    match format {
        Format::Word2vec => load_word2vec_text(path),
        Format::Glove => load_glove_text(path),
        Format::Npy => load_npy(path),
        Format::Csv => load_csv(path),
        Format::Auto => unreachable!("auto resolved above"),
    }
}

/// Guesses the format of `path`.
///
/// Order: npy magic bytes, then a word2vec header (two integers on line 1
/// whose `d` agrees with line 2), then CSV vs GloVe by delimiter. Inputs that
/// fit more than one reading are rejected.
pub fn detect_format(path: impl AsRef<Path>) -> Result<Format> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&npy::MAGIC) {
        return Ok(Format::Npy);
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(1 << 20)]);
    let mut lines = head.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| Error::parse(format!("{}: empty file", path.display())))?;
    let second = lines.next();
    let ambiguous = |why: &str| {
        Err(Error::parse(format!(
            "{}: cannot auto-detect format ({why}); pass --format explicitly",
            path.display()
        )))
    };

    let header: Vec<&str> = first.split_whitespace().collect();
    if header.len() == 2 && header.iter().all(|f| f.parse::<u64>().is_ok()) {
        let d: usize = header[1].parse().unwrap_or(0);
        let next_fields = second.map(|l| l.split_whitespace().count());
        return match next_fields {
            // "3 4" followed by 2-field lines also reads as 1-D GloVe
            Some(2) if d == 1 => ambiguous("header could also be a 1-D GloVe row"),
            Some(f) if f == d + 1 => Ok(Format::Word2vec),
            Some(2) => Ok(Format::Glove),
            _ => ambiguous("first line looks like a word2vec header but the next line disagrees"),
        };
    }

    let has_comma = first.contains(',');
    let ws_fields = first.split_whitespace().count();
    match (has_comma, ws_fields) {
        (true, 1) => Ok(Format::Csv),
        (true, _) => {
            // "1, 2, 3" is still CSV; "a 1,2" is not
            let all_comma_sep = first.split(',').all(|f| !f.trim().contains(char::is_whitespace));
            if all_comma_sep {
                Ok(Format::Csv)
            } else {
                ambiguous("line mixes commas and whitespace separators")
            }
        }
        (false, n) if n >= 2 => Ok(Format::Glove),
        _ => ambiguous("no delimiter found on the first line"),
    }
}

/// Parses a float field, rejecting non-finite values.
pub(crate) fn parse_value(field: &str, row: usize, source: &Path) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| {
        Error::parse(format!(
            "{}: invalid number '{field}' at row {row}",
            source.display()
        ))
    })?;
    if !v.is_finite() {
        return Err(Error::parse(format!(
            "{}: non-finite value at row {row}",
            source.display()
        )));
    }
    Ok(v)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}
