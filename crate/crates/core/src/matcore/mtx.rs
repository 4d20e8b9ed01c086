//! Matrix Market I/O: `coordinate` and `array` formats, `real` field,
//! `general` or `symmetric` symmetry. Vectors are one-column array files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::{DenseMatrix, SparseMatrix};

fn mm_err(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

struct Header {
    format: Format,
    symmetric: bool,
}

fn parse_header(line: &str) -> Result<Header> {
    let toks: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(mm_err(format!("bad banner: {line:?}")));
    }
    let format = match toks[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        f => return Err(mm_err(format!("unsupported format {f}"))),
    };
    if toks[3] != "real" && toks[3] != "integer" {
        return Err(mm_err(format!("unsupported field {}", toks[3])));
    }
    let symmetric = match toks[4].as_str() {
        "general" => false,
        "symmetric" => true,
        s => return Err(mm_err(format!("unsupported symmetry {s}"))),
    };
    Ok(Header { format, symmetric })
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| mm_err(format!("missing {what}")))?
        .parse()
        .map_err(|_| mm_err(format!("cannot parse {what}")))
}

/// Parses Matrix Market text into triplets.
fn parse(text: &str) -> Result<(usize, usize, Vec<(usize, usize, f64)>)> {
    let mut lines = text.lines();
    let header = parse_header(lines.next().ok_or_else(|| mm_err("empty input"))?)?;
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size = body.next().ok_or_else(|| mm_err("missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = parse_num(it.next(), "rows")?;
    let cols: usize = parse_num(it.next(), "cols")?;
    let mut trips = Vec::new();
    match header.format {
        Format::Coordinate => {
            let nnz: usize = parse_num(it.next(), "nnz")?;
            for _ in 0..nnz {
                let line = body.next().ok_or_else(|| mm_err("truncated entry list"))?;
                let mut t = line.split_whitespace();
                let i: usize = parse_num(t.next(), "row index")?;
                let j: usize = parse_num(t.next(), "column index")?;
                let v: f64 = parse_num(t.next(), "value")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(mm_err(format!("entry ({i}, {j}) out of range")));
                }
                trips.push((i - 1, j - 1, v));
                if header.symmetric && i != j {
                    trips.push((j - 1, i - 1, v));
                }
            }
        }
        Format::Array => {
            // Column-major; symmetric files store the lower triangle only.
            for j in 0..cols {
                let start = if header.symmetric { j } else { 0 };
                for i in start..rows {
                    let v: f64 = parse_num(body.next(), "array value")?;
                    trips.push((i, j, v));
                    if header.symmetric && i != j {
                        trips.push((j, i, v));
                    }
                }
            }
        }
    }
    Ok((rows, cols, trips))
}

pub fn read_sparse(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let (rows, cols, trips) = parse(&fs::read_to_string(path)?)?;
    SparseMatrix::from_triplets(rows, cols, &trips)
}

pub fn read_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let (rows, cols, trips) = parse(&fs::read_to_string(path)?)?;
    let mut d = DenseMatrix::zeros(rows, cols);
    for (i, j, v) in trips {
        if !v.is_finite() {
            return Err(mm_err("non-finite value"));
        }
        d.set(i, j, v);
    }
    Ok(d)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let d = read_dense(path)?;
    if d.cols() != 1 {
        return Err(mm_err(format!("expected one column, found {}", d.cols())));
    }
    Ok(d.column(0))
}

/// `{:e}` with shortest round-trip digits, so reading back is lossless.
fn fmt_val(v: f64) -> String {
    format!("{v:e}")
}

pub fn sparse_to_string(a: &SparseMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for (i, j, v) in a.iter() {
        let _ = writeln!(s, "{} {} {}", i + 1, j + 1, fmt_val(v));
    }
    s
}

pub fn dense_to_string(a: &DenseMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", a.rows(), a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let _ = writeln!(s, "{}", fmt_val(a.get(i, j)));
        }
    }
    s
}

pub fn write_sparse(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    fs::write(path, sparse_to_string(a))?;
    Ok(())
}

pub fn write_dense(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    fs::write(path, dense_to_string(a))?;
    Ok(())
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let d = DenseMatrix::from_fn(v.len(), 1, |i, _| v[i]);
    write_dense(path, &d)
}

pub fn sparse_from_str(text: &str) -> Result<SparseMatrix> {
    let (rows, cols, trips) = parse(text)?;
    SparseMatrix::from_triplets(rows, cols, &trips)
}
