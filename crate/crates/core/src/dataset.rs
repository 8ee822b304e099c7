//! Feature matrices, partitions and symmetric pair matrices.
//!
//! Class and cluster ids are 1-based in files and 0-based in memory; the
//! conversion happens only in the CSV readers and writers below.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real-valued feature matrix with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    name: String,
}

impl Dataset {
    /// Builds a dataset, checking finiteness and (when present) that labels
    /// cover `0..K` with every class occupied.
    pub fn new(features: DMatrix<f64>, labels: Option<Vec<usize>>, name: impl Into<String>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset must be non-empty, got {}x{}",
                features.nrows(),
                features.ncols()
            )));
        }
        for (idx, v) in features.iter().enumerate() {
            if !v.is_finite() {
                // column-major storage
                return Err(Error::NonFinite { row: idx % features.nrows() + 1, col: idx / features.nrows() + 1 });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != features.nrows() {
                return Err(Error::SizeMismatch { expected: features.nrows(), got: labels.len() });
            }
            check_labels(labels)?;
        }
        Ok(Self { features, labels, name: name.into() })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// 0-based class ids.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().max().map_or(0, |m| m + 1))
    }

    /// Copy of the dataset without labels.
    pub fn unlabeled(&self) -> Self {
        Self { features: self.features.clone(), labels: None, name: self.name.clone() }
    }

    /// Applies a row permutation: row `r` of the result is row `order[r]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let features = DMatrix::from_fn(self.n(), self.d(), |r, c| self.features[(order[r], c)]);
        let labels = self.labels.as_ref().map(|l| order.iter().map(|&o| l[o]).collect());
        Self { features, labels, name: self.name.clone() }
    }

    /// Reads a comma-separated file. When `has_labels` is set the last
    /// column holds 1-based integer class ids.
    pub fn load_csv(path: impl AsRef<Path>, has_labels: bool, has_header: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, has_labels, has_header).map_err(|e| match e {
            Error::Parse { row, msg, .. } => Error::Parse { path: path.to_path_buf(), row, msg },
            other => other,
        })
    }

    pub fn parse_csv(text: &str, has_labels: bool, has_header: bool) -> Result<Self> {
        let parse_err = |row: usize, msg: String| Error::Parse { path: "<input>".into(), row, msg };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels = Vec::new();
        let mut width = None;
        let mut row_no = 0;
        for line in text.lines().skip(usize::from(has_header)) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            row_no += 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            match width {
                None => width = Some(fields.len()),
                Some(w) if w != fields.len() => {
                    return Err(parse_err(row_no, format!("expected {w} columns, found {}", fields.len())));
                }
                _ => {}
            }
            let n_feat = fields.len() - usize::from(has_labels);
            if n_feat == 0 {
                return Err(parse_err(row_no, "no feature columns".into()));
            }
            let mut row = Vec::with_capacity(n_feat);
            for (col, f) in fields[..n_feat].iter().enumerate() {
                let v: f64 =
                    f.parse().map_err(|_| parse_err(row_no, format!("column {}: cannot parse {f:?}", col + 1)))?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: row_no, col: col + 1 });
                }
                row.push(v);
            }
            if has_labels {
                let f = fields[n_feat];
                let y: usize =
                    f.parse().map_err(|_| parse_err(row_no, format!("label {f:?} is not a positive integer")))?;
                if y == 0 {
                    return Err(parse_err(row_no, "labels are 1-based".into()));
                }
                labels.push(y - 1);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(parse_err(0, "no data rows".into()));
        }
        let d = rows[0].len();
        let features = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]);
        Self::new(features, has_labels.then_some(labels), "")
    }

    /// Serializes to CSV; `f64` display is the shortest representation that
    /// round-trips exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n() {
            for c in 0..self.d() {
                if c > 0 {
                    out.push(',');
                }
                write!(out, "{}", self.features[(r, c)]).unwrap();
            }
            if let Some(labels) = &self.labels {
                write!(out, ",{}", labels[r] + 1).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn check_labels(labels: &[usize]) -> Result<()> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; k];
    for &y in labels {
        seen[y] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidLabels(format!("class {} of {k} has no members", missing + 1)));
    }
    Ok(())
}

/// Assignment of N objects to K nonempty clusters (0-based ids).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assign: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assign: Vec<usize>, k: usize) -> Result<Self> {
        if assign.is_empty() {
            return Err(Error::InvalidArgument("empty partition".into()));
        }
        let mut sizes = vec![0usize; k];
        for &a in &assign {
            if a >= k {
                return Err(Error::InvalidLabels(format!("cluster id {a} out of range for k = {k}")));
            }
            sizes[a] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidLabels(format!("cluster {empty} of {k} is empty")));
        }
        Ok(Self { assign, k })
    }

    /// Relabels arbitrary ids to `0..K` in order of first occurrence.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assign = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self { assign, k: map.len() }
    }

    pub(crate) fn from_raw(assign: Vec<usize>, k: usize) -> Self {
        debug_assert!(Self::new(assign.clone(), k).is_ok());
        Self { assign, k }
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assign {
            sizes[a] += 1;
        }
        sizes
    }

    /// Canonical form: clusters renumbered by first occurrence. Two
    /// partitions are equal as set partitions iff their canonical forms are.
    pub fn canonical(&self) -> Self {
        Self::from_labels(&self.assign)
    }

    pub fn same_as(&self, other: &Partition) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn coincidence(&self) -> PairMatrix {
        coincidence_from_labels(&self.assign)
    }

    /// One 1-based cluster id per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 3);
        for &a in &self.assign {
            writeln!(out, "{}", a + 1).unwrap();
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// What a [`PairMatrix`] holds; determines which invariants apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Coassoc,
    SilhouettePair,
    Coincidence,
    Prediction,
}

/// Dense symmetric N x N matrix over object pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    values: DMatrix<f64>,
    kind: PairKind,
}

impl PairMatrix {
    pub fn new(values: DMatrix<f64>, kind: PairKind) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(Error::SizeMismatch { expected: n, got: values.ncols() });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if v != values[(j, i)] {
                    return Err(Error::InvalidArgument(format!("pair matrix not symmetric at ({i}, {j})")));
                }
                match kind {
                    PairKind::SilhouettePair => {}
                    PairKind::Coassoc => {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::InvalidArgument(format!("co-association entry {v} outside [0, 1]")));
                        }
                    }
                    PairKind::Coincidence | PairKind::Prediction => {
                        if v != 0.0 && v != 1.0 {
                            return Err(Error::InvalidArgument(format!("boolean pair matrix has entry {v}")));
                        }
                    }
                }
            }
            if kind != PairKind::SilhouettePair && values[(i, i)] != 1.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not 1")));
            }
        }
        Ok(Self { values, kind })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// `Z(i, j) = 1` iff objects `i` and `j` carry the same label.
pub fn coincidence_from_labels(labels: &[usize]) -> PairMatrix {
    let n = labels.len();
    let values = DMatrix::from_fn(n, n, |i, j| if labels[i] == labels[j] { 1.0 } else { 0.0 });
    PairMatrix { values, kind: PairKind::Coincidence }
}
