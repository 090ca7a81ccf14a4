//! Matrix files: headerless CSV and the HSVD1 binary layout.
//!
//! HSVD1 (little-endian):
//!
//! | bytes   | content                         |
//! |---------|---------------------------------|
//! | 0..6    | magic `b"HSVD1\0"`              |
//! | 6..14   | rows, `u64`                     |
//! | 14..22  | cols, `u64`                     |
//! | 22..    | `rows·cols` `f64` values, row-major |

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::error::{HsvdError, Result};

pub const HSVD_MAGIC: &[u8; 6] = b"HSVD1\0";
pub const HSVD_HEADER_LEN: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    Csv,
    HsvdBinary,
}

impl MatrixFormat {
    /// `.csv` is CSV, anything else HSVD1.
    pub fn infer(path: &Path) -> MatrixFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::HsvdBinary,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = HsvdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "hsvd" | "hsvd1" | "hsvd-binary" | "binary" => Ok(MatrixFormat::HsvdBinary),
            other => Err(HsvdError::Format(format!("unknown matrix format '{other}'"))),
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| HsvdError::io(path, e))?;
    match format {
        MatrixFormat::Csv => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|e| HsvdError::Format(format!("{}: not UTF-8 ({e})", path.display())))?;
            parse_csv(text)
        }
        MatrixFormat::HsvdBinary => decode_hsvd(&bytes),
    }
}

pub fn save_matrix(x: &DenseMatrix, path: impl AsRef<Path>, format: MatrixFormat) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| HsvdError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let written = match format {
        MatrixFormat::Csv => out.write_all(to_csv(x).as_bytes()),
        MatrixFormat::HsvdBinary => out.write_all(&encode_hsvd(x)),
    };
    written
        .and_then(|_| out.flush())
        .map_err(|e| HsvdError::io(path, e))
}

pub fn encode_hsvd(x: &DenseMatrix) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HSVD_HEADER_LEN + 8 * x.data().len());
    buf.extend_from_slice(HSVD_MAGIC);
    buf.extend_from_slice(&(x.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(x.cols() as u64).to_le_bytes());
    for v in x.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_hsvd(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < HSVD_HEADER_LEN {
        return Err(HsvdError::Format(format!(
            "HSVD1 file truncated: {} bytes, header needs {HSVD_HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[..6] != HSVD_MAGIC {
        return Err(HsvdError::Format("bad HSVD1 magic".into()));
    }
    let rows = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[14..22].try_into().expect("8 bytes"));
    if rows == 0 || cols == 0 {
        return Err(HsvdError::Format(format!("HSVD1 header declares a {rows}x{cols} matrix")));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| HsvdError::Format(format!("HSVD1 dimensions {rows}x{cols} too large")))?;
    let payload = &bytes[HSVD_HEADER_LEN..];
    if payload.len() != expected {
        return Err(HsvdError::Format(format!(
            "HSVD1 payload is {} bytes, {rows}x{cols} needs {expected}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let x = DenseMatrix::new(rows as usize, cols as usize, data)?;
    x.validate_finite()?;
    Ok(x)
}

/// Headerless, comma-separated, one row per line. Blank trailing lines are ignored.
pub fn parse_csv(text: &str) -> Result<DenseMatrix> {
    let mut lines: Vec<(usize, &str)> = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(HsvdError::Parse {
            line: 1,
            msg: "empty input".into(),
        });
    }
    let mut cols = 0;
    let mut data = Vec::new();
    for (line_no, line) in &lines {
        let start = data.len();
        for field in line.split(',') {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| HsvdError::Parse {
                line: *line_no,
                msg: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(HsvdError::Validation(format!(
                    "non-finite value '{field}' on line {line_no}"
                )));
            }
            data.push(value);
        }
        let width = data.len() - start;
        if *line_no == 1 {
            cols = width;
        } else if width != cols {
            return Err(HsvdError::Parse {
                line: *line_no,
                msg: format!("expected {cols} values, found {width}"),
            });
        }
    }
    DenseMatrix::new(lines.len(), cols, data)
}

/// Shortest round-trip decimal for every value.
pub fn to_csv(x: &DenseMatrix) -> String {
    let mut out = String::with_capacity(x.data().len() * 12);
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}
