//! Confusion counts to perceptual similarities and distances.
//!
//! Similarity is the symmetrized confusion proportion
//! `S_ij = (p_ij + p_ji) / (p_ii + p_jj)` and distance follows the
//! exponential law `D_ij = -ln S_ij`. Matrices store only the strict upper
//! triangle, so symmetry is structural.

use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packed::{pair_count, pairs, strict_index};
use crate::scalar::Scalar;

pub const HEBREW_CONFUSION_CSV: &str = include_str!("../data/hebrew_confusion.csv");

/// Fallback smoothing suggested when raw counts produce zero similarities.
pub const FALLBACK_SMOOTHING: f64 = 0.5;

/// Counts `C(i, j)`: stimulus `i` reported as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<u64>,
    row_totals: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::NonSquare { rows: rows.len(), columns: n });
        }
        let mut counts = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::NonSquare { rows: rows.len(), columns: row.len() });
            }
            counts.extend_from_slice(row);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel { line: 1, label: l.clone() });
            }
            if counts[i * n + i] == 0 {
                return Err(Error::ZeroDiagonal(l.clone()));
            }
        }
        let row_totals = rows.iter().map(|r| r.iter().sum()).collect();
        Ok(Self { labels, counts, row_totals })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.len() + j]
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.row_totals[i]
    }

    pub fn row_totals(&self) -> &[u64] {
        &self.row_totals
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// The bundled Hebrew confusion counts (19 phonemes, AXB paradigm).
pub fn hebrew_confusion() -> ConfusionMatrix {
    parse_confusion_csv(HEBREW_CONFUSION_CSV).expect("bundled confusion matrix is valid")
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

/// A labeled square table: header `<corner>,l1,...,ln`, then `li,v_i1,...,v_in`.
struct LabeledTable {
    labels: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn read_labeled_table(text: &str) -> Result<LabeledTable> {
    let mut reader = csv_reader(text);
    let mut records = reader.records();
    let header = records.next().ok_or(Error::EmptyTable)??;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut rows = Vec::with_capacity(n);
    for record in records {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != n + 1 {
            return Err(Error::NonSquare { rows: rows.len() + 1, columns: record.len().saturating_sub(1) });
        }
        let position = rows.len();
        if position >= n {
            return Err(Error::NonSquare { rows: position + 1, columns: n });
        }
        if record[0] != labels[position] {
            return Err(Error::LabelMismatch {
                position,
                row: record[0].to_string(),
                header: labels[position].clone(),
            });
        }
        rows.push((line, record.iter().skip(1).map(str::to_string).collect()));
    }
    if rows.len() != n {
        return Err(Error::NonSquare { rows: rows.len(), columns: n });
    }
    Ok(LabeledTable { labels, rows })
}

/// Parses a square confusion CSV whose row labels repeat the header labels.
pub fn parse_confusion_csv(text: &str) -> Result<ConfusionMatrix> {
    let table = read_labeled_table(text)?;
    let mut rows = Vec::with_capacity(table.labels.len());
    for (line, cells) in &table.rows {
        let row = cells
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.parse::<u64>().map_err(|_| Error::InvalidCount {
                    line: *line,
                    column: table.labels[j].clone(),
                    value: c.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    ConfusionMatrix::new(table.labels, rows)
}

/// Symmetric similarities with an implicit unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    labels: Vec<String>,
    upper: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::one(),
            std::cmp::Ordering::Less => self.upper[strict_index(i, j, self.len())],
            std::cmp::Ordering::Greater => self.upper[strict_index(j, i, self.len())],
        }
    }

    pub fn to_array(&self) -> Array2<T> {
        let n = self.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.get(i, j))
    }

    pub fn to_csv(&self) -> String {
        square_csv(&self.labels, |i, j| self.get(i, j))
    }
}

/// `S_ij = (p_ij + p_ji) / (p_ii + p_jj)` with proportions taken from
/// `C + smoothing` over `row_total + smoothing·n`.
pub fn shepard_similarity<T: Scalar>(cm: &ConfusionMatrix, smoothing: T) -> Result<SimilarityMatrix<T>> {
    if !smoothing.is_finite() || smoothing < T::zero() {
        return Err(Error::InvalidSmoothing(smoothing.as_f64()));
    }
    let n = cm.len();
    let extra = smoothing * T::of_usize(n);
    let p = |i: usize, j: usize| -> T {
        (T::from_u64(cm.count(i, j)).unwrap() + smoothing) / (T::from_u64(cm.row_total(i)).unwrap() + extra)
    };
    let mut upper = Vec::with_capacity(pair_count(n));
    let mut zeros = Vec::new();
    for (i, j) in pairs(n) {
        let s = (p(i, j) + p(j, i)) / (p(i, i) + p(j, j));
        if s <= T::zero() {
            zeros.push((cm.labels[i].clone(), cm.labels[j].clone()));
        }
        upper.push(s);
    }
    if !zeros.is_empty() {
        return Err(Error::ZeroSimilarity(zeros));
    }
    Ok(SimilarityMatrix { labels: cm.labels.clone(), upper })
}

/// `D_ij = -ln S_ij`, zero on the diagonal.
pub fn shepard_distance<T: Scalar>(sm: &SimilarityMatrix<T>) -> Result<DistanceMatrix<T>> {
    let n = sm.len();
    let mut upper = Vec::with_capacity(sm.upper.len());
    for ((i, j), &s) in pairs(n).zip(&sm.upper) {
        if !(s > T::zero()) {
            return Err(Error::NonPositiveSimilarity {
                a: sm.labels[i].clone(),
                b: sm.labels[j].clone(),
                value: s.as_f64(),
            });
        }
        upper.push(-s.ln());
    }
    Ok(DistanceMatrix { labels: sm.labels.clone(), upper })
}

/// Symmetric, zero-diagonal matrix of pairwise values (perceived or model distances).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    labels: Vec<String>,
    upper: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds from a function evaluated once per unordered pair `i < j`.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let n = labels.len();
        let upper = pairs(n).map(|(i, j)| f(i, j)).collect();
        Self { labels, upper }
    }

    /// Builds from a full square array, checking symmetry, zero diagonal and finiteness.
    pub fn from_square(labels: Vec<String>, values: &Array2<T>) -> Result<Self> {
        let n = labels.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::NonSquare { rows: values.nrows(), columns: values.ncols() });
        }
        for i in 0..n {
            if values[[i, i]] != T::zero() {
                return Err(Error::NonZeroDiagonal(labels[i].clone()));
            }
        }
        let mut upper = Vec::with_capacity(pair_count(n));
        for (i, j) in pairs(n) {
            let (a, b) = (values[[i, j]], values[[j, i]]);
            let tol = T::tolerance(1e-9, a.abs().max(b.abs()));
            if !a.is_finite() || !b.is_finite() || (a - b).abs() > tol {
                return Err(Error::AsymmetricDistances(labels[i].clone(), labels[j].clone()));
            }
            upper.push((a + b) / T::of(2.0));
        }
        Ok(Self { labels, upper })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.upper[strict_index(i, j, self.len())],
            std::cmp::Ordering::Greater => self.upper[strict_index(j, i, self.len())],
        }
    }

    /// Values for pairs `i < j`, lexicographic.
    pub fn pair_values(&self) -> &[T] {
        &self.upper
    }

    /// Principal submatrix in the given label order.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()).ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string())))
            .collect::<Result<Vec<_>>>()?;
        let names = idx.iter().map(|&i| self.labels[i].clone()).collect();
        Ok(Self::from_fn(names, |a, b| self.get(idx[a], idx[b])))
    }

    /// Same matrix without one phoneme.
    pub fn without(&self, index: usize) -> Self {
        let keep: Vec<&str> =
            self.labels.iter().enumerate().filter(|&(i, _)| i != index).map(|(_, l)| l.as_str()).collect();
        self.restrict(&keep).expect("labels come from self")
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { labels: self.labels.clone(), upper: self.upper.iter().map(|&v| f(v)).collect() }
    }

    pub fn to_array(&self) -> Array2<T> {
        let n = self.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.get(i, j))
    }

    pub fn cast<U: Scalar>(&self) -> DistanceMatrix<U> {
        DistanceMatrix { labels: self.labels.clone(), upper: self.upper.iter().map(|v| U::of(v.as_f64())).collect() }
    }

    /// Full square CSV with a `phoneme` corner cell.
    pub fn to_csv(&self) -> String {
        square_csv(&self.labels, |i, j| self.get(i, j))
    }

    /// Long form `i,j,distance` over unordered pairs, labels in the `i`/`j` columns.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("i,j,distance\n");
        for ((i, j), v) in pairs(self.len()).zip(&self.upper) {
            writeln!(out, "{},{},{}", self.labels[i], self.labels[j], v).unwrap();
        }
        out
    }
}

/// Reads the square format written by [`DistanceMatrix::to_csv`].
pub fn parse_distance_csv<T: Scalar>(text: &str) -> Result<DistanceMatrix<T>> {
    let table = read_labeled_table(text)?;
    let n = table.labels.len();
    let mut values = Array2::zeros((n, n));
    for (i, (line, cells)) in table.rows.iter().enumerate() {
        for (j, c) in cells.iter().enumerate() {
            let v: f64 = c.parse().map_err(|_| Error::InvalidNumber { line: *line, value: c.clone() })?;
            values[[i, j]] = T::of(v);
        }
    }
    DistanceMatrix::from_square(table.labels, &values)
}

fn square_csv<T: Scalar>(labels: &[String], get: impl Fn(usize, usize) -> T) -> String {
    let mut out = String::from("phoneme");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..labels.len() {
            write!(out, ",{}", get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}
