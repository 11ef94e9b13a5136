//! Matrix Market array format (complex, general) plus a JSON sidecar that
//! names the J realization and, for generated matrices, the seed and the
//! planted spectrum.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const BANNER: &str = "%%MatrixMarket matrix array complex general";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    /// "canonical-block" or "spin-tensor".
    pub j_realization: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// `matrix.mtx` -> `matrix.json`.
pub fn sidecar_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("json")
}

/// Writes entries column by column, one `re im` pair per line, using the
/// shortest representation that parses back to the same bits.
pub fn write_matrix_market<W: Write>(mut w: W, a: &DenseMatrix) -> Result<()> {
    writeln!(w, "{BANNER}")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for c in 0..a.cols() {
        for r in 0..a.rows() {
            let z = a[(r, c)];
            writeln!(w, "{:e} {:e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = r.lines();
    let banner = lines.next().ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse(format!("not a Matrix Market header: {banner:?}")));
    }
    if fields[2] != "array" || fields[3] != "complex" || fields[4] != "general" {
        return Err(Error::Parse(format!("only 'array complex general' is supported, got {banner:?}")));
    }
    let mut data = lines.filter(|l| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('%')
        }
        Err(_) => true,
    });
    let size = data.next().ok_or_else(|| Error::Parse("missing size line".into()))??;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size line {size:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("size line must hold two integers, got {size:?}")));
    };
    let mut a = DenseMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            let line = data.next().ok_or_else(|| Error::Parse(format!("expected {} entries", rows * cols)))??;
            let mut it = line.split_whitespace();
            let mut num = || -> Result<f64> {
                let t = it.next().ok_or_else(|| Error::Parse(format!("entry line {line:?} needs two values")))?;
                t.parse().map_err(|_| Error::Parse(format!("bad number {t:?}")))
            };
            let z = Complex64::new(num()?, num()?);
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite("matrix entry"));
            }
            a[(r, c)] = z;
        }
    }
    if data.next().is_some() {
        return Err(Error::Parse("trailing data after the last entry".into()));
    }
    Ok(a)
}

/// Writes `path` and its sidecar.
pub fn save(path: &Path, a: &DenseMatrix, sidecar: &Sidecar) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_matrix_market(&mut f, a)?;
    f.flush()?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok(())
}

/// Reads `path` and its sidecar when one exists.
pub fn load(path: &Path) -> Result<(DenseMatrix, Option<Sidecar>)> {
    let a = read_matrix_market(BufReader::new(fs::File::open(path)?))?;
    let side = sidecar_path(path);
    let sidecar = if side.exists() { Some(serde_json::from_str(&fs::read_to_string(side)?)?) } else { None };
    Ok((a, sidecar))
}
