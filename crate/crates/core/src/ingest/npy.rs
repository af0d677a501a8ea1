//! npy v1.0 reader/writer for 2-D float arrays.
//!
//! Layout: the magic `\x93NUMPY`, version bytes `1 0`, a little-endian `u16`
//! header length, an ASCII python-dict header, then the raw payload in C
//! order. The writer reproduces numpy's own header padding so files written
//! by numpy survive a read/write cycle byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::matrix::EmbeddingMatrix;

pub(crate) const MAGIC: [u8; 6] = *b"\x93NUMPY";
const PREFIX_LEN: usize = MAGIC.len() + 2 + 2;
const ALIGN: usize = 64;
// numpy reserves room for the leading axis to grow in place
const GROWTH_AXIS_MAX_DIGITS: usize = 21;

/// Element types accepted in the `descr` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpyDtype {
    F4,
    F8,
}

impl NpyDtype {
    fn descr(self) -> &'static str {
        match self {
            NpyDtype::F4 => "<f4",
            NpyDtype::F8 => "<f8",
        }
    }

    fn size(self) -> usize {
        match self {
            NpyDtype::F4 => 4,
            NpyDtype::F8 => 8,
        }
    }
}

#[derive(Debug)]
struct Header {
    dtype: NpyDtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

pub fn load_npy(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let data = read_npy(&bytes)
        .map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
    EmbeddingMatrix::new(data, None, format!("{} (npy)", path.display())).map_err(|e| match e {
        Error::Parse(msg) => Error::parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Decodes an in-memory npy v1.0 buffer into an `n x d` array.
pub fn read_npy(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < PREFIX_LEN || bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::parse("bad magic: not an npy file"));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(Error::parse(format!(
            "unsupported npy version {major}.{minor}, expected 1.0"
        )));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let payload_start = PREFIX_LEN + header_len;
    if bytes.len() < payload_start {
        return Err(Error::parse("truncated npy header"));
    }
    let header_text = std::str::from_utf8(&bytes[PREFIX_LEN..payload_start])
        .map_err(|_| Error::parse("npy header is not ASCII"))?;
    let header = parse_header(header_text)?;

    if header.fortran_order {
        return Err(Error::parse(
            "unsupported layout: fortran_order is True, only C order is supported",
        ));
    }
    let (n, d) = match header.shape.as_slice() {
        &[n, d] => (n, d),
        s => {
            return Err(Error::parse(format!(
                "expected 2-D array, found shape with {} dimension(s)",
                s.len()
            )))
        }
    };

    let payload = &bytes[payload_start..];
    let expected = n * d * header.dtype.size();
    if payload.len() < expected {
        return Err(Error::parse(format!(
            "truncated payload: expected {expected} bytes, found {}",
            payload.len()
        )));
    }
    let payload = &payload[..expected];
    let values: Vec<f64> = match header.dtype {
        NpyDtype::F8 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        NpyDtype::F4 => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
    };
    Array2::from_shape_vec((n, d), values).map_err(|e| Error::Invariant(e.to_string()))
}

/// Writes `matrix` as an npy v1.0 file with the given element type.
pub fn write_npy(path: impl AsRef<Path>, matrix: &EmbeddingMatrix, dtype: NpyDtype) -> Result<()> {
    let path = path.as_ref();
    let mut out = io::BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?);
    encode(&mut out, matrix, dtype)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn encode<W: Write>(w: &mut W, matrix: &EmbeddingMatrix, dtype: NpyDtype) -> io::Result<()> {
    let (n, d) = (matrix.rows(), matrix.dim());
    let mut header = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': ({n}, {d}), }}",
        dtype.descr()
    );
    header.push_str(&" ".repeat(GROWTH_AXIS_MAX_DIGITS.saturating_sub(n.to_string().len())));
    let hlen = header.len() + 1;
    let pad = ALIGN - (PREFIX_LEN + hlen) % ALIGN;
    let total = u16::try_from(hlen + pad)
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "npy header too long"))?;

    w.write_all(&MAGIC)?;
    w.write_all(&[1, 0])?;
    w.write_all(&total.to_le_bytes())?;
    w.write_all(header.as_bytes())?;
    w.write_all(&b" ".repeat(pad))?;
    w.write_all(b"\n")?;
    for &v in matrix.view().iter() {
        match dtype {
            NpyDtype::F8 => w.write_all(&v.to_le_bytes())?,
            NpyDtype::F4 => w.write_all(&(v as f32).to_le_bytes())?,
        }
    }
    Ok(())
}

fn parse_header(text: &str) -> Result<Header> {
    let body = text.trim();
    let body = body
        .strip_prefix('{')
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| Error::parse("npy header is not a dict literal"))?;

    let descr = dict_value(body, "descr")?;
    let dtype = match descr.trim().trim_matches(|c| c == '\'' || c == '"') {
        "<f8" => NpyDtype::F8,
        "<f4" => NpyDtype::F4,
        other => {
            return Err(Error::parse(format!(
                "unsupported dtype '{other}', expected '<f4' or '<f8'"
            )))
        }
    };
    let fortran_order = match dict_value(body, "fortran_order")?.trim() {
        "False" => false,
        "True" => true,
        other => return Err(Error::parse(format!("invalid fortran_order '{other}'"))),
    };
    let shape_text = dict_value(body, "shape")?.trim();
    let inner = shape_text
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::parse(format!("invalid shape '{shape_text}'")))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(format!("invalid shape '{shape_text}'")))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Header {
        dtype,
        fortran_order,
        shape,
    })
}

/// Extracts the raw text of `key`'s value from a flat python dict body.
fn dict_value<'a>(body: &'a str, key: &str) -> Result<&'a str> {
    let missing = || Error::parse(format!("npy header is missing '{key}'"));
    let start = ["'", "\""]
        .iter()
        .find_map(|q| body.find(&format!("{q}{key}{q}")))
        .ok_or_else(missing)?;
    let after_key = &body[start + key.len() + 2..];
    let colon = after_key.find(':').ok_or_else(missing)?;
    let value = after_key[colon + 1..].trim_start();
    // the value ends at the first comma outside parentheses
    let mut depth = 0usize;
    for (i, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => return Ok(&value[..i]),
            _ => {}
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
    }

    #[test]
    fn reads_numpy_float64() {
        let m = load_npy(fixture("f8_2x2.npy")).unwrap();
        assert_eq!(m.view(), ndarray::array![[1.0, 2.0], [3.0, 4.0]]);
        assert!(m.labels().is_none());
    }

    #[test]
    fn reads_numpy_float32() {
        let m = load_npy(fixture("f4_2x3.npy")).unwrap();
        assert_eq!(m.view(), ndarray::array![[1.5, 2.0, 3.0], [4.0, 5.0, -6.25]]);
    }

    #[test]
    fn rejects_fortran_order() {
        let err = load_npy(fixture("fortran.npy")).unwrap_err().to_string();
        assert!(err.contains("unsupported layout"), "{err}");
    }

    #[test]
    fn rejects_one_dimensional() {
        let err = load_npy(fixture("shape1d.npy")).unwrap_err().to_string();
        assert!(err.contains("expected 2-D"), "{err}");
    }

    #[test]
    fn rejects_integer_dtype() {
        let err = load_npy(fixture("i8.npy")).unwrap_err().to_string();
        assert!(err.contains("unsupported dtype '<i8'"), "{err}");
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        assert!(read_npy(b"NOTNUMPY\x00\x00").unwrap_err().to_string().contains("bad magic"));
        let mut bytes = fs::read(fixture("f8_2x2.npy")).unwrap();
        bytes[6] = 2;
        assert!(read_npy(&bytes).unwrap_err().to_string().contains("version 2.0"));
    }

    #[test]
    fn reports_truncation() {
        let bytes = fs::read(fixture("f8_2x2.npy")).unwrap();
        let err = read_npy(&bytes[..bytes.len() - 3]).unwrap_err().to_string();
        assert!(err.contains("expected 32 bytes, found 29"), "{err}");
    }

    #[test]
    fn three_dimensional_shape() {
        let header = parse_header("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2, 2), }").unwrap();
        assert_eq!(header.shape, vec![2, 2, 2]);
    }

    #[test]
    fn rewrite_is_byte_identical_to_numpy() {
        for name in ["f8_2x2.npy", "f8_3x5.npy"] {
            let original = fs::read(fixture(name)).unwrap();
            let m = load_npy(fixture(name)).unwrap();
            let mut out = Vec::new();
            encode(&mut out, &m, NpyDtype::F8).unwrap();
            assert_eq!(out, original, "{name}");
        }
        let original = fs::read(fixture("f4_2x3.npy")).unwrap();
        let m = load_npy(fixture("f4_2x3.npy")).unwrap();
        let mut out = Vec::new();
        encode(&mut out, &m, NpyDtype::F4).unwrap();
        assert_eq!(out, original);
    }

    #[test]
    fn header_is_aligned() {
        let m = EmbeddingMatrix::from_rows(123_456, 1, vec![0.0; 123_456], "t").unwrap();
        let mut out = Vec::new();
        encode(&mut out, &m, NpyDtype::F8).unwrap();
        assert_eq!((out.len() - 123_456 * 8) % ALIGN, 0);
        assert_eq!(out[out.len() - 123_456 * 8 - 1], b'\n');
    }
}
