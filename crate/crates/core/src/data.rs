//! LibSVM datasets held as sparse rows.
//!
//! Text format, one sample per line:
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ...
//! ```
//!
//! Indices are 1-based in the file and 0-based in memory. Blank lines and
//! lines starting with `#` are skipped; `\r\n` endings are accepted.

pub mod synthetic;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::objectives::LossKind;

/// Feature vector of one sample, stored as parallel index/value arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    /// Builds a row, checking that indices are strictly increasing and values finite.
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Dimension {
                expected: indices.len(),
                got: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("row indices must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("row values must be finite"));
        }
        Ok(Self { indices, values })
    }

    /// Dense input, zeros dropped.
    pub fn from_dense(x: &[f64]) -> Result<Self> {
        let (indices, values) = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .unzip();
        Self::new(indices, values)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// `<x, w>` against a dense vector.
    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.iter().map(|(j, v)| v * w[j]).sum()
    }

    /// `out += alpha * x`.
    #[inline]
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        for (j, v) in self.iter() {
            out[j] += alpha * v;
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// One past the largest index, or 0 for an empty row.
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |&j| j + 1)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.axpy(1.0, &mut out);
        out
    }
}

/// Immutable labelled sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<SparseRow>,
    labels: Vec<f64>,
    dim: usize,
}

impl Dataset {
    pub fn new(rows: Vec<SparseRow>, labels: Vec<f64>, dim: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        if dim == 0 {
            return Err(Error::config("dataset needs at least one feature"));
        }
        if let Some(r) = rows.iter().find(|r| r.min_dim() > dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: r.min_dim(),
            });
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::config("labels must be finite"));
        }
        Ok(Self { rows, labels, dim })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseRow::nnz).sum()
    }

    /// Widens the feature space, e.g. when a test split has more columns than
    /// the file at hand. Never shrinks.
    pub fn with_min_dim(mut self, dim: usize) -> Self {
        self.dim = self.dim.max(dim);
        self
    }

    /// Serializes back to LibSVM text. Values use the shortest representation
    /// that parses back to the same `f64`.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for (row, y) in self.rows.iter().zip(&self.labels) {
            write!(out, "{y}").unwrap();
            for (j, v) in row.iter() {
                write!(out, " {}:{v}", j + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Parses LibSVM text; `d` is the largest index seen.
pub fn parse_libsvm<R: Read>(reader: R) -> Result<Dataset> {
    parse_libsvm_with_dim(reader, None)
}

/// Like [`parse_libsvm`] with a lower bound on the feature count.
pub fn parse_libsvm_with_dim<R: Read>(reader: R, min_dim: Option<usize>) -> Result<Dataset> {
    let mut reader = BufReader::new(reader);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    let mut buf = Vec::new();
    let mut line_no = 0usize;

    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| Error::Parse {
            line: line_no,
            msg: "invalid UTF-8".into(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (label, row) = parse_line(line).map_err(|msg| Error::Parse { line: line_no, msg })?;
        dim = dim.max(row.min_dim());
        labels.push(label);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: line_no,
            msg: "no samples".into(),
        });
    }
    let dim = dim.max(min_dim.unwrap_or(0)).max(1);
    Dataset::new(rows, labels, dim)
}

pub fn load_libsvm<P: AsRef<Path>>(path: P, min_dim: Option<usize>) -> Result<Dataset> {
    parse_libsvm_with_dim(File::open(path)?, min_dim)
}

fn parse_line(line: &str) -> std::result::Result<(f64, SparseRow), String> {
    let mut tokens = line.split_whitespace();
    let label_tok = tokens.next().ok_or("missing label")?;
    let label = parse_finite(label_tok).ok_or_else(|| format!("invalid label `{label_tok}`"))?;

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for tok in tokens {
        // trailing comments are allowed by some writers
        if tok.starts_with('#') {
            break;
        }
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| format!("malformed feature `{tok}`"))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| format!("invalid feature index `{idx}`"))?;
        if idx == 0 {
            return Err("feature indices are 1-based".into());
        }
        let val = parse_finite(val).ok_or_else(|| format!("invalid feature value `{val}`"))?;
        let idx = idx - 1;
        if let Some(&prev) = indices.last() {
            if idx == prev {
                return Err(format!("duplicate feature index {}", idx + 1));
            }
            if idx < prev {
                return Err(format!("feature index {} out of order", idx + 1));
            }
        }
        indices.push(idx);
        values.push(val);
    }
    Ok((label, SparseRow { indices, values }))
}

fn parse_finite(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Maps the two raw label values onto the targets of `kind`: `{-1, +1}` for
/// logistic, `{0, 1}` for NLLS. The smaller raw value maps to the smaller target.
pub fn normalize_labels(ds: Dataset, kind: LossKind) -> Result<Dataset> {
    let distinct: BTreeSet<u64> = ds.labels.iter().map(|y| ordered_bits(*y)).collect();
    if distinct.len() != 2 {
        return Err(Error::LabelCount(distinct.len()));
    }
    let low = ds.labels.iter().copied().fold(f64::INFINITY, f64::min);
    let (neg, pos) = kind.label_targets();
    let labels = ds
        .labels
        .iter()
        .map(|&y| if y == low { neg } else { pos })
        .collect();
    Ok(Dataset { labels, ..ds })
}

// -0.0 and 0.0 are the same label
fn ordered_bits(y: f64) -> u64 {
    if y == 0.0 {
        0
    } else {
        y.to_bits()
    }
}
