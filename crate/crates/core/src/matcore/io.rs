//! `LRMM` binary container and plain CSV import/export.
//!
//! Layout (all little endian):
//!
//! ```text
//! offset 0   magic  "LRMM"
//! offset 4   version u32 = 1
//! offset 8   dtype   u32  (1 = f64, 2 = i32)
//! offset 12  rows    u64
//! offset 20  cols    u64
//! offset 28  row-major payload
//! ```
//!
//! `i32` payloads (quantized matrices) are followed by a trailer holding the
//! bit budget (u32) and the scale (f64).

use std::fs;
use std::io::Write;
use std::path::Path;

use super::DenseMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LRMM";
pub const VERSION: u32 = 1;
pub const DTYPE_F64: u32 = 1;
pub const DTYPE_I32: u32 = 2;
pub const HEADER_LEN: usize = 28;

pub(crate) fn write_header(out: &mut Vec<u8>, dtype: u32, rows: usize, cols: usize) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dtype.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
}

/// Validates the header and returns `(rows, cols)`.
pub(crate) fn read_header(bytes: &[u8], expected_dtype: u32) -> Result<(usize, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            bytes.len() as u64,
            format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len()),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::format(
            0,
            format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let dtype = u32_at(bytes, 8);
    if dtype != expected_dtype {
        return Err(Error::format(
            8,
            format!("dtype {dtype}, expected {expected_dtype}"),
        ));
    }
    let rows = u64_at(bytes, 12);
    let cols = u64_at(bytes, 20);
    if rows == 0 || cols == 0 {
        return Err(Error::format(
            12,
            format!("invalid dimensions {rows}x{cols}"),
        ));
    }
    let rows = usize::try_from(rows).map_err(|_| Error::format(12, "rows overflow"))?;
    let cols = usize::try_from(cols).map_err(|_| Error::format(20, "cols overflow"))?;
    rows.checked_mul(cols)
        .ok_or_else(|| Error::format(12, "element count overflow"))?;
    Ok((rows, cols))
}

pub(crate) fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().expect("4 bytes"))
}

pub(crate) fn u64_at(b: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

/// Returns an error unless `bytes` holds at least `needed` bytes.
pub(crate) fn require_len(bytes: &[u8], needed: usize, what: &str) -> Result<()> {
    if bytes.len() < needed {
        return Err(Error::format(
            bytes.len() as u64,
            format!(
                "truncated {what}: need {needed} bytes, have {}",
                bytes.len()
            ),
        ));
    }
    Ok(())
}

pub fn encode_matrix(a: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * a.data().len());
    write_header(&mut out, DTYPE_F64, a.rows(), a.cols());
    for v in a.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DenseMatrix> {
    let (rows, cols) = read_header(bytes, DTYPE_F64)?;
    let count = rows * cols;
    require_len(bytes, HEADER_LEN + 8 * count, "payload")?;
    let mut data = Vec::with_capacity(count);
    for i in 0..count {
        let off = HEADER_LEN + 8 * i;
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(Error::format(off as u64, format!("non-finite value {v}")));
        }
        data.push(v);
    }
    let end = HEADER_LEN + 8 * count;
    if bytes.len() != end {
        return Err(Error::format(end as u64, "trailing bytes after payload"));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn save_matrix(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_matrix(a))?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    decode_matrix(&fs::read(path)?)
}

/// Comma-separated rows, no header, shortest round-trip float formatting.
pub fn write_csv(a: &DenseMatrix, mut out: impl Write) -> Result<()> {
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_csv(text: &str) -> Result<DenseMatrix> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                let v = f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("'{f}': {e}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("non-finite value '{f}'"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}
