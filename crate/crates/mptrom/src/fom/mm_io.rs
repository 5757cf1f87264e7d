//! Matrix Market readers and writers.
//!
//! Sparse matrices use the coordinate format (`real` or `complex` field,
//! `general` or `symmetric` symmetry, 1-based indices); vectors use the array
//! format. Values are written with Rust's shortest round-trip formatting so
//! an export/ingest cycle is bit-identical.

use super::FomError;
use crate::linalg::SparseComplexMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmField {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FomError {
    FomError::ParseError {
        file: path.display().to_string(),
        line,
        message: msg.into(),
    }
}

/// Reads a coordinate-format sparse matrix. Symmetric files are expanded to
/// full storage (mirror entries added for off-diagonal terms).
pub fn read_sparse_matrix(path: &Path) -> Result<SparseComplexMatrix, FomError> {
    let text = fs::read_to_string(path).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "%%MatrixMarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix ...' header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(path, 1, "expected coordinate format for sparse matrices"));
    }
    let field = match tokens[3] {
        "real" => MmField::Real,
        "complex" => MmField::Complex,
        other => return Err(parse_err(path, 1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4] {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx, trimmed.to_string()));
        break;
    }
    let (size_idx, size_line) =
        size_line.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(path, size_idx + 1, format!("bad size line: {e}")))?;
    if dims.len() != 3 {
        return Err(parse_err(path, size_idx + 1, "size line needs rows cols nnz"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);

    let mut triplets = Vec::with_capacity(nnz * 2);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let want = match field {
            MmField::Real => 3,
            MmField::Complex => 4,
        };
        if toks.len() != want {
            return Err(parse_err(
                path,
                idx + 1,
                format!("expected {want} tokens, found {}", toks.len()),
            ));
        }
        let r: usize = toks[0]
            .parse()
            .map_err(|e| parse_err(path, idx + 1, format!("bad row index: {e}")))?;
        let c: usize = toks[1]
            .parse()
            .map_err(|e| parse_err(path, idx + 1, format!("bad col index: {e}")))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(path, idx + 1, "index out of declared bounds"));
        }
        let re: f64 = toks[2]
            .parse()
            .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?;
        let im: f64 = if field == MmField::Complex {
            toks[3]
                .parse()
                .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?
        } else {
            0.0
        };
        let v = Complex64::new(re, im);
        triplets.push((r - 1, c - 1, v));
        if symmetry == MmSymmetry::Symmetric && r != c {
            triplets.push((c - 1, r - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(
            path,
            0,
            format!("declared {nnz} entries, found {seen}"),
        ));
    }
    SparseComplexMatrix::from_triplets(rows, cols, &triplets)
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

/// Writes a sparse matrix in coordinate format. With `MmSymmetry::Symmetric`
/// only the lower triangle is stored; the caller is responsible for the
/// matrix actually being symmetric.
pub fn write_sparse_matrix(
    path: &Path,
    m: &SparseComplexMatrix,
    symmetry: MmSymmetry,
) -> Result<(), FomError> {
    let field = if m.is_real() {
        MmField::Real
    } else {
        MmField::Complex
    };
    let entries: Vec<(usize, usize, Complex64)> = m
        .iter()
        .filter(|(r, c, _)| symmetry == MmSymmetry::General || c <= r)
        .collect();

    let mut out = String::new();
    let field_name = match field {
        MmField::Real => "real",
        MmField::Complex => "complex",
    };
    let sym_name = match symmetry {
        MmSymmetry::General => "general",
        MmSymmetry::Symmetric => "symmetric",
    };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field_name} {sym_name}");
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), entries.len());
    for (r, c, v) in entries {
        match field {
            MmField::Real => {
                let _ = writeln!(out, "{} {} {:e}", r + 1, c + 1, v.re);
            }
            MmField::Complex => {
                let _ = writeln!(out, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im);
            }
        }
    }
    fs::write(path, out).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Reads an array-format dense vector (n x 1), real or complex.
pub fn read_vector(path: &Path) -> Result<Vec<Complex64>, FomError> {
    let text = fs::read_to_string(path).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5
        || tokens[0] != "%%MatrixMarket"
        || tokens[1] != "matrix"
        || tokens[2] != "array"
    {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix array ...'"));
    }
    let field = match tokens[3] {
        "real" => MmField::Real,
        "complex" => MmField::Complex,
        other => return Err(parse_err(path, 1, format!("unsupported field '{other}'"))),
    };

    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx, trimmed.to_string()));
        break;
    }
    let (size_idx, size_line) =
        size_line.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(path, size_idx + 1, format!("bad size line: {e}")))?;
    if dims.len() != 2 || dims[1] != 1 {
        return Err(parse_err(path, size_idx + 1, "expected an n x 1 array"));
    }
    let n = dims[0];

    let mut values = Vec::with_capacity(n);
    for (idx, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let v = match field {
            MmField::Real => {
                if toks.len() != 1 {
                    return Err(parse_err(path, idx + 1, "expected one value per line"));
                }
                Complex64::new(
                    toks[0]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                    0.0,
                )
            }
            MmField::Complex => {
                if toks.len() != 2 {
                    return Err(parse_err(path, idx + 1, "expected two values per line"));
                }
                Complex64::new(
                    toks[0]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                    toks[1]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                )
            }
        };
        values.push(v);
    }
    if values.len() != n {
        return Err(parse_err(
            path,
            0,
            format!("declared {n} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// Writes a real vector in array format.
pub fn write_real_vector(path: &Path, v: &[f64]) -> Result<(), FomError> {
    let mut out = String::new();
    let _ = writeln!(out, "%%MatrixMarket matrix array real general");
    let _ = writeln!(out, "{} 1", v.len());
    for x in v {
        let _ = writeln!(out, "{x:e}");
    }
    fs::write(path, out).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Writes a dense complex matrix in array format (column-major).
pub fn write_dense_complex(
    path: &Path,
    m: &crate::linalg::DenseComplexMatrix,
) -> Result<(), FomError> {
    let mut out = String::new();
    let _ = writeln!(out, "%%MatrixMarket matrix array complex general");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            let _ = writeln!(out, "{:e} {:e}", v.re, v.im);
        }
    }
    fs::write(path, out).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Reads a dense (array format) matrix, real or complex, any shape.
pub fn read_dense_complex(path: &Path) -> Result<crate::linalg::DenseComplexMatrix, FomError> {
    let text = fs::read_to_string(path).map_err(|e| FomError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5
        || tokens[0] != "%%MatrixMarket"
        || tokens[1] != "matrix"
        || tokens[2] != "array"
    {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix array ...'"));
    }
    let field = match tokens[3] {
        "real" => MmField::Real,
        "complex" => MmField::Complex,
        other => return Err(parse_err(path, 1, format!("unsupported field '{other}'"))),
    };
    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx, trimmed.to_string()));
        break;
    }
    let (size_idx, size_line) =
        size_line.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(path, size_idx + 1, format!("bad size line: {e}")))?;
    if dims.len() != 2 {
        return Err(parse_err(path, size_idx + 1, "size line needs rows cols"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut values = Vec::with_capacity(rows * cols);
    for (idx, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let v = match field {
            MmField::Real => {
                if toks.len() != 1 {
                    return Err(parse_err(path, idx + 1, "expected one value per line"));
                }
                Complex64::new(
                    toks[0]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                    0.0,
                )
            }
            MmField::Complex => {
                if toks.len() != 2 {
                    return Err(parse_err(path, idx + 1, "expected two values per line"));
                }
                Complex64::new(
                    toks[0]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                    toks[1]
                        .parse()
                        .map_err(|e| parse_err(path, idx + 1, format!("bad value: {e}")))?,
                )
            }
        };
        values.push(v);
    }
    if values.len() != rows * cols {
        return Err(parse_err(
            path,
            0,
            format!("declared {} values, found {}", rows * cols, values.len()),
        ));
    }
    Ok(crate::linalg::DenseComplexMatrix::from_vec(rows, cols, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sparse_roundtrip_general_complex() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        let m = SparseComplexMatrix::from_triplets(
            3,
            2,
            &[
                (0, 0, c(1.5, -2.25)),
                (2, 1, c(std::f64::consts::PI, 1e-17)),
                (1, 0, c(-0.0625, 0.0)),
            ],
        )
        .unwrap();
        write_sparse_matrix(&path, &m, MmSymmetry::General).unwrap();
        let back = read_sparse_matrix(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn sparse_roundtrip_symmetric_real() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.mtx");
        let m = SparseComplexMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, c(2.0, 0.0)),
                (0, 1, c(0.5, 0.0)),
                (1, 0, c(0.5, 0.0)),
                (2, 2, c(-1.0, 0.0)),
            ],
        )
        .unwrap();
        write_sparse_matrix(&path, &m, MmSymmetry::Symmetric).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        let back = read_sparse_matrix(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn vector_roundtrip_real() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v.mtx");
        let v = vec![1.0, -2.5e-17, 3.25e8];
        write_real_vector(&path, &v).unwrap();
        let back = read_vector(&path).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert_eq!(*a, b.re);
            assert_eq!(0.0, b.im);
        }
    }

    #[test]
    fn corrupt_entries_report_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 oops 3.0\n",
        )
        .unwrap();
        match read_sparse_matrix(&path) {
            Err(FomError::ParseError { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn nnz_mismatch_detected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("short.mtx");
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3.0\n",
        )
        .unwrap();
        assert!(read_sparse_matrix(&path).is_err());
    }
}
