use ndarray::{Array1, Array2};

use super::MetricKind;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::{FeatureTheory, Inventory};
use crate::packed::{pair_count, pairs};
use crate::scalar::Scalar;

/// Least-squares reduction of the quadratic metric: one row per phoneme pair.
///
/// Full rows hold `(p_k^i − p_k^j)(p_l^i − p_l^j)` for all `(k, l)` row-major;
/// diagonal rows hold `(p_k^i − p_k^j)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<T> {
    pub kind: MetricKind,
    pub rows: Array2<T>,
    pub pair_index: Vec<(usize, usize)>,
    pub targets: Array1<T>,
    pub labels: Vec<String>,
    pub theory: FeatureTheory,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.rows.ncols()
    }

    pub fn n_features(&self) -> usize {
        self.theory.arity()
    }
}

/// Rows follow inventory order, pairs `(i, j)` with `i < j` lexicographic;
/// targets are looked up in `dm` by label.
pub fn build_design_matrix<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, kind: MetricKind) -> Result<DesignMatrix<T>> {
    if inv.len() != dm.len() {
        return Err(Error::LabelSetMismatch(format!(
            "inventory has {} phonemes, distances have {}",
            inv.len(),
            dm.len()
        )));
    }
    let idx = inv
        .phonemes()
        .iter()
        .map(|p| dm.index_of(p).ok_or_else(|| Error::LabelSetMismatch(format!("'{p}' missing from distances"))))
        .collect::<Result<Vec<_>>>()?;

    let nf = inv.n_features();
    let n_pairs = pair_count(inv.len());
    let cols = match kind {
        MetricKind::Full => nf * nf,
        MetricKind::Diagonal => nf,
    };
    let mut rows = Array2::zeros((n_pairs, cols));
    let mut targets = Array1::zeros(n_pairs);
    let mut pair_index = Vec::with_capacity(n_pairs);
    for (r, (i, j)) in pairs(inv.len()).enumerate() {
        let diff: Vec<i8> = inv
            .feature(i)
            .values()
            .iter()
            .zip(inv.feature(j).values())
            .map(|(&a, &b)| a as i8 - b as i8)
            .collect();
        match kind {
            MetricKind::Diagonal => {
                for k in 0..nf {
                    rows[[r, k]] = T::of((diff[k] * diff[k]) as f64);
                }
            }
            MetricKind::Full => {
                for k in 0..nf {
                    for l in 0..nf {
                        rows[[r, k * nf + l]] = T::of((diff[k] * diff[l]) as f64);
                    }
                }
            }
        }
        targets[r] = dm.get(idx[i], idx[j]);
        pair_index.push((i, j));
    }
    Ok(DesignMatrix { kind, rows, pair_index, targets, labels: inv.phonemes().to_vec(), theory: inv.theory().clone() })
}
