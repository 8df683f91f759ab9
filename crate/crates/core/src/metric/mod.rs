//! Quadratic metrics `d(a, b) = (a − b)ᵀ W (a − b)` over feature vectors.

mod design;
mod eigen;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::{FeatureTheory, FeatureVector, Inventory};
use crate::method::Method;
use crate::packed::upper_index;
use crate::scalar::Scalar;

pub use design::{build_design_matrix, DesignMatrix};
pub use eigen::{is_psd, project_psd, symmetric_eigendecompose, symmetrize, Spectrum, PSD_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Full,
    Diagonal,
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricKind::Full => "full",
            MetricKind::Diagonal => "diagonal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(method: Method) -> Self {
        Self { method, lambda: None, seed: None }
    }
}

/// A learned or fixed weight matrix.
///
/// Full models store the upper triangle (diagonal included), diagonal models
/// store `n_f` values; either way `W` is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel<T> {
    theory: FeatureTheory,
    kind: MetricKind,
    weights: Vec<T>,
    psd_certified: bool,
    provenance: Provenance,
}

impl<T: Scalar> MetricModel<T> {
    /// Diagonal model; certified PSD when every weight is nonnegative.
    pub fn diagonal(theory: FeatureTheory, weights: Vec<T>, provenance: Provenance) -> Result<Self> {
        if weights.len() != theory.arity() {
            return Err(Error::DimensionMismatch { expected: theory.arity(), found: weights.len() });
        }
        let psd_certified = weights.iter().all(|&w| w >= -T::of(PSD_TOLERANCE));
        Ok(Self { theory, kind: MetricKind::Diagonal, weights, psd_certified, provenance })
    }

    /// Full model from a symmetric matrix, not certified.
    pub fn full(theory: FeatureTheory, w: &Array2<T>, provenance: Provenance) -> Result<Self> {
        let n = theory.arity();
        if w.dim() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: w.nrows() });
        }
        eigen::check_symmetric(w)?;
        let mut weights = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                weights.push(w[[i, j]]);
            }
        }
        Ok(Self { theory, kind: MetricKind::Full, weights, psd_certified: false, provenance })
    }

    /// Symmetrizes, projects onto the PSD cone and certifies the result.
    pub fn full_projected(theory: FeatureTheory, w: &Array2<T>, provenance: Provenance) -> Result<Self> {
        let projected = project_psd(&symmetrize(w))?;
        let mut model = Self::full(theory, &projected, provenance)?;
        model.psd_certified = true;
        Ok(model)
    }

    /// Identity weights: Hamming distance on binary vectors.
    pub fn uniform(theory: FeatureTheory) -> Self {
        let n = theory.arity();
        Self {
            theory,
            kind: MetricKind::Diagonal,
            weights: vec![T::one(); n],
            psd_certified: true,
            provenance: Provenance::new(Method::Uniform),
        }
    }

    pub fn theory(&self) -> &FeatureTheory {
        &self.theory
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn psd_certified(&self) -> bool {
        self.psd_certified
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn n_features(&self) -> usize {
        self.theory.arity()
    }

    pub fn weight(&self, k: usize, l: usize) -> T {
        match self.kind {
            MetricKind::Diagonal => {
                if k == l {
                    self.weights[k]
                } else {
                    T::zero()
                }
            }
            MetricKind::Full => {
                let (a, b) = if k <= l { (k, l) } else { (l, k) };
                self.weights[upper_index(a, b, self.n_features())]
            }
        }
    }

    /// Stored weights: the diagonal, or the row-major upper triangle.
    pub fn stored_weights(&self) -> &[T] {
        &self.weights
    }

    pub fn diagonal_weights(&self) -> Vec<T> {
        (0..self.n_features()).map(|k| self.weight(k, k)).collect()
    }

    pub fn matrix(&self) -> Array2<T> {
        let n = self.n_features();
        Array2::from_shape_fn((n, n), |(k, l)| self.weight(k, l))
    }

    /// Weights laid out to match a design-matrix row of the same kind:
    /// `n_f` entries for diagonal models, `n_f²` row-major for full ones.
    pub fn flattened(&self) -> Vec<T> {
        let n = self.n_features();
        match self.kind {
            MetricKind::Diagonal => self.weights.clone(),
            MetricKind::Full => (0..n * n).map(|idx| self.weight(idx / n, idx % n)).collect(),
        }
    }

    /// `(a − b)ᵀ W (a − b)`.
    pub fn metric_distance(&self, a: &FeatureVector, b: &FeatureVector) -> Result<T> {
        let n = self.n_features();
        for v in [a, b] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        Ok(self.distance_unchecked(a.values(), b.values()))
    }

    pub(crate) fn distance_unchecked(&self, a: &[u8], b: &[u8]) -> T {
        let n = self.n_features();
        let diff: Vec<T> = a.iter().zip(b).map(|(&x, &y)| T::of(x as f64 - y as f64)).collect();
        match self.kind {
            MetricKind::Diagonal => diff.iter().zip(&self.weights).fold(T::zero(), |s, (&d, &w)| s + w * d * d),
            MetricKind::Full => {
                let mut s = T::zero();
                for k in 0..n {
                    if diff[k] == T::zero() {
                        continue;
                    }
                    s += self.weights[upper_index(k, k, n)] * diff[k] * diff[k];
                    for l in k + 1..n {
                        s += T::of(2.0) * self.weights[upper_index(k, l, n)] * diff[k] * diff[l];
                    }
                }
                s
            }
        }
    }

    /// Model distances between every pair of phonemes in `inv`.
    pub fn distances(&self, inv: &Inventory) -> Result<DistanceMatrix<T>> {
        if inv.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), found: inv.n_features() });
        }
        Ok(DistanceMatrix::from_fn(inv.phonemes().to_vec(), |i, j| {
            self.distance_unchecked(inv.feature(i).values(), inv.feature(j).values())
        }))
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            theory: self.theory.name().to_string(),
            kind: self.kind,
            feature_names: self.theory.feature_names().to_vec(),
            weights: self.weights.iter().map(|w| w.as_f64()).collect(),
            psd_certified: self.psd_certified,
            provenance: self.provenance.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let theory = FeatureTheory::new(file.theory, file.feature_names)?;
        let n = theory.arity();
        let expected = match file.kind {
            MetricKind::Diagonal => n,
            MetricKind::Full => n * (n + 1) / 2,
        };
        if file.weights.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: file.weights.len() });
        }
        Ok(Self {
            theory,
            kind: file.kind,
            weights: file.weights.into_iter().map(T::of).collect(),
            psd_certified: file.psd_certified,
            provenance: file.provenance,
        })
    }
}

/// JSON form of a model: upper-triangle weights for full models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub theory: String,
    pub kind: MetricKind,
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub psd_certified: bool,
    pub provenance: Provenance,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{load_inventory, DatasetId, TheoryId};
    use ndarray::array;

    fn theory(n: usize) -> FeatureTheory {
        FeatureTheory::new("toy", (0..n).map(|k| format!("f{k}")).collect()).unwrap()
    }

    fn fv(v: &[u8]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_vectors_are_at_zero() {
        let m = MetricModel::<f64>::full(theory(2), &array![[1.0, 0.3], [0.3, 2.0]], Provenance::new(Method::Ls))
            .unwrap();
        assert_eq!(m.metric_distance(&fv(&[1, 0]), &fv(&[1, 0])).unwrap(), 0.0);
    }

    #[test]
    fn identity_gives_hamming() {
        let inv = load_inventory(TheoryId::Phonological, DatasetId::Hebrew);
        let m = MetricModel::<f64>::uniform(inv.theory().clone());
        let d = m.metric_distance(inv.vector_of("p").unwrap(), inv.vector_of("b").unwrap()).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn diagonal_expands_to_weighted_disagreements() {
        let m = MetricModel::diagonal(theory(3), vec![2.0, 0.0, 0.0], Provenance::new(Method::LsDiag)).unwrap();
        assert_eq!(m.metric_distance(&fv(&[1, 0, 1]), &fv(&[0, 0, 1])).unwrap(), 2.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = MetricModel::<f64>::uniform(theory(3));
        assert!(matches!(m.metric_distance(&fv(&[1, 0]), &fv(&[0, 0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn full_matches_dense_quadratic_form() {
        let w = array![[2.0, -0.5, 0.25], [-0.5, 1.0, 0.0], [0.25, 0.0, 3.0]];
        let m = MetricModel::<f64>::full(theory(3), &w, Provenance::new(Method::Ls)).unwrap();
        let (a, b) = (fv(&[1, 0, 1]), fv(&[0, 1, 1]));
        let d = ndarray::array![1.0, -1.0, 0.0];
        let dense = d.dot(&w.dot(&d));
        assert!((m.metric_distance(&a, &b).unwrap() - dense).abs() < 1e-15);
        assert_eq!(m.matrix(), w);
    }

    #[test]
    fn projected_model_is_certified() {
        let w = array![[1.0, 0.0], [0.0, -2.0]];
        let m = MetricModel::<f64>::full_projected(theory(2), &w, Provenance::new(Method::Ls)).unwrap();
        assert!(m.psd_certified());
        assert_eq!(m.matrix(), array![[1.0, 0.0], [0.0, 0.0]]);
        let unprojected = MetricModel::<f64>::full(theory(2), &w, Provenance::new(Method::Ls)).unwrap();
        assert!(!unprojected.psd_certified());
    }

    #[test]
    fn json_round_trip() {
        let w = array![[2.0, 0.5], [0.5, 1.0]];
        let mut prov = Provenance::new(Method::Ls);
        prov.lambda = Some(0.1);
        let m = MetricModel::<f64>::full_projected(theory(2), &w, prov).unwrap();
        let back = MetricModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
