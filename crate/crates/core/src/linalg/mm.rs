//! Matrix Market coordinate format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::sparse::{CsrMatrix, SparseSymMatrix};
use crate::error::{Error, Result};

/// Writes the lower triangle with the `symmetric` qualifier.
pub fn write_symmetric(path: &Path, m: &SparseSymMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let entries: Vec<(usize, usize, f64)> = m.upper_triplets().collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", m.dim(), m.dim(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", j + 1, i + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_general(path: &Path, m: &CsrMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a real coordinate matrix; symmetric files are expanded.
pub fn read(path: &Path) -> Result<CsrMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidSpec("empty Matrix Market file".into()))??;
    let lower = header.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(Error::InvalidSpec(format!("unsupported header: {header}")));
    }
    let symmetric = lower.contains("symmetric");
    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let bad = || Error::InvalidSpec(format!("malformed Matrix Market line: {t}"));
        if size.is_none() {
            if fields.len() != 3 {
                return Err(bad());
            }
            let r = fields[0].parse().map_err(|_| bad())?;
            let c = fields[1].parse().map_err(|_| bad())?;
            size = Some((r, c));
            continue;
        }
        if fields.len() != 3 {
            return Err(bad());
        }
        let i: usize = fields[0].parse().map_err(|_| bad())?;
        let j: usize = fields[1].parse().map_err(|_| bad())?;
        let v: f64 = fields[2].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 {
            return Err(bad());
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    let (r, c) = size.ok_or_else(|| Error::InvalidSpec("missing size line".into()))?;
    Ok(CsrMatrix::from_triplets(r, c, &triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::DenseMatrix;

    #[test]
    fn symmetric_round_trip() {
        let dense = DenseMatrix::from_row_major(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, 0.5, 0.0, 0.5, 3.0]);
        let m = SparseSymMatrix::from_dense(&dense);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_symmetric(&path, &m).unwrap();
        let back = read(&path).unwrap().to_dense();
        assert_eq!(back.as_slice(), dense.as_slice());
    }
}
