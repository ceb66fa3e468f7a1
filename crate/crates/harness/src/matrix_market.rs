//! Matrix Market coordinate and array files with complex values.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hfp_core::discretize::CsrMatrix;
use num_complex::Complex64;

use crate::report::{fmt_float, write};

pub fn matrix_string(a: &CsrMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate complex general\n");
    s.push_str(&format!("{} {} {}\n", a.nrows, a.ncols, a.nnz()));
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            s.push_str(&format!("{} {} {} {}\n", i + 1, j + 1, fmt_float(v.re), fmt_float(v.im)));
        }
    }
    s
}

pub fn vector_string(b: &[Complex64]) -> String {
    let mut s = String::from("%%MatrixMarket matrix array complex general\n");
    s.push_str(&format!("{} 1\n", b.len()));
    for v in b {
        s.push_str(&format!("{} {}\n", fmt_float(v.re), fmt_float(v.im)));
    }
    s
}

/// Writes `A` to `path` and `b` next to it with a `_rhs` suffix; returns the
/// right-hand side path.
pub fn export(a: &CsrMatrix, b: &[Complex64], path: &Path) -> Result<std::path::PathBuf> {
    write(path, &matrix_string(a))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("matrix");
    let rhs = path.with_file_name(format!("{stem}_rhs.mtx"));
    write(&rhs, &vector_string(b))?;
    Ok(rhs)
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'))
}

fn header(text: &str) -> Result<Vec<String>> {
    let first = text.lines().next().unwrap_or_default();
    let words: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        bail!("not a Matrix Market file: {first:?}");
    }
    if words[3] != "complex" || words[4] != "general" {
        bail!("only complex general files are supported, got {first:?}");
    }
    Ok(words)
}

fn numbers<T: std::str::FromStr>(line: &str, count: usize) -> Result<Vec<T>> {
    let v: Vec<T> = line.split_whitespace().map(|w| w.parse::<T>().ok()).collect::<Option<_>>().with_context(|| format!("bad line {line:?}"))?;
    if v.len() != count {
        bail!("expected {count} fields in {line:?}");
    }
    Ok(v)
}

pub fn parse_matrix(text: &str) -> Result<CsrMatrix> {
    if header(text)?[2] != "coordinate" {
        bail!("expected a coordinate file");
    }
    let mut lines = data_lines(text);
    let size: Vec<usize> = numbers(lines.next().context("missing size line")?, 3)?;
    let (m, n, nnz) = (size[0], size[1], size[2]);
    let mut t = Vec::with_capacity(nnz);
    for line in lines {
        let w: Vec<&str> = line.split_whitespace().collect();
        if w.len() != 4 {
            bail!("expected 4 fields in {line:?}");
        }
        let (i, j): (usize, usize) = (w[0].parse()?, w[1].parse()?);
        if i == 0 || j == 0 || i > m || j > n {
            bail!("index ({i}, {j}) outside {m}x{n}");
        }
        t.push((i - 1, j - 1, Complex64::new(w[2].parse()?, w[3].parse()?)));
    }
    if t.len() != nnz {
        bail!("expected {nnz} entries, found {}", t.len());
    }
    Ok(CsrMatrix::from_triplets(m, n, t))
}

pub fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    if header(text)?[2] != "array" {
        bail!("expected an array file");
    }
    let mut lines = data_lines(text);
    let size: Vec<usize> = numbers(lines.next().context("missing size line")?, 2)?;
    if size[1] != 1 {
        bail!("expected a single column");
    }
    let v: Vec<Complex64> = lines
        .map(|l| numbers::<f64>(l, 2).map(|x| Complex64::new(x[0], x[1])))
        .collect::<Result<_>>()?;
    if v.len() != size[0] {
        bail!("expected {} values, found {}", size[0], v.len());
    }
    Ok(v)
}
