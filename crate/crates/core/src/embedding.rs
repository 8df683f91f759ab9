use std::fmt::Write as _;

use ndarray::Array2;

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::metric::symmetric_eigendecompose;
use crate::scalar::Scalar;

/// Classical MDS coordinates of a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    pub labels: Vec<String>,
    /// `n_p × dims`, column means zero.
    pub coords: Array2<T>,
    /// `√(Σ(‖xᵢ−xⱼ‖ − D_ij)² / Σ D_ij²)` over pairs `i < j`.
    pub stress: T,
    /// Share of the positive eigenvalue mass kept by the retained axes.
    pub eigenvalue_share: T,
}

pub type Embedding2D<T> = Embedding<T>;

impl<T: Scalar> Embedding<T> {
    pub fn dims(&self) -> usize {
        self.coords.ncols()
    }

    pub fn point(&self, i: usize) -> Vec<T> {
        self.coords.row(i).to_vec()
    }

    pub fn embedded_distance(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.coords.row(i), self.coords.row(j));
        a.iter().zip(b.iter()).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y)).sqrt()
    }

    /// `label,x,y` for two axes, `label,x1,...,xk` otherwise.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        if self.dims() == 2 {
            out.push_str(",x,y");
        } else {
            for k in 1..=self.dims() {
                write!(out, ",x{k}").unwrap();
            }
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for &v in self.coords.row(i) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Torgerson scaling: double-centred squared distances, top `dims` eigenpairs.
pub fn classical_mds<T: Scalar>(dm: &DistanceMatrix<T>, dims: usize) -> Result<Embedding<T>> {
    let n = dm.len();
    if dims == 0 || dims + 1 > n {
        return Err(Error::InvalidDimensions { dims, phonemes: n });
    }
    let d2 = dm.to_array().mapv(|d| d * d);
    let nf = T::of_usize(n);
    let row_means: Vec<T> = (0..n).map(|i| d2.row(i).sum() / nf).collect();
    let grand = row_means.iter().fold(T::zero(), |s, &m| s + m) / nf;
    let half = T::of(0.5);
    let b = Array2::from_shape_fn((n, n), |(i, j)| -half * (d2[[i, j]] - row_means[i] - row_means[j] + grand));
    let spectrum = symmetric_eigendecompose(&b)?;

    let mut coords = Array2::zeros((n, dims));
    for k in 0..dims {
        let scale = spectrum.eigenvalues[k].max(T::zero()).sqrt();
        let v = spectrum.eigenvectors.column(k);
        let pivot = (0..n).fold(0, |p, i| if v[i].abs() > v[p].abs() { i } else { p });
        let sign = if v[pivot] < T::zero() { -T::one() } else { T::one() };
        for i in 0..n {
            coords[[i, k]] = sign * scale * v[i];
        }
    }
    for k in 0..dims {
        let mean = coords.column(k).sum() / nf;
        coords.column_mut(k).mapv_inplace(|x| x - mean);
    }

    let positive = spectrum.eigenvalues.iter().fold(T::zero(), |s, &l| s + l.max(T::zero()));
    let kept = (0..dims).fold(T::zero(), |s, k| s + spectrum.eigenvalues[k].max(T::zero()));
    let eigenvalue_share = if positive > T::zero() { (kept / positive).min(T::one()) } else { T::zero() };

    let mut embedding = Embedding { labels: dm.labels().to_vec(), coords, stress: T::zero(), eigenvalue_share };
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            let r = embedding.embedded_distance(i, j) - d;
            num += r * r;
            den += d * d;
        }
    }
    embedding.stress = if den > T::zero() { (num / den).sqrt() } else { T::zero() };
    Ok(embedding)
}
