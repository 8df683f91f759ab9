//! Online passive-aggressive ranking for the quadratic metric.
//!
//! For a triplet with difference vectors `u₊ = pᵢ − pⱼ` (closer) and
//! `u₋ = pᵢ − pₖ`, the hinge loss is `max(0, 1 + u₊ᵀWu₊ − u₋ᵀWu₋)`. Its
//! negative subgradient in `W` is `V = u₋u₋ᵀ − u₊u₊ᵀ`, and the step
//! `τ = min(C, loss / ‖V‖²_F)` zeroes the loss whenever `τ < C`.

use ndarray::Array2;

use super::{SolverConfig, Triplet, TripletSampler};
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::method::Method;
use crate::metric::{project_psd, symmetrize, MetricKind, MetricModel, Provenance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<T> {
    pub triplet: Triplet,
    pub loss_before: T,
    pub loss_after: T,
    pub tau: T,
}

#[derive(Debug, Clone)]
pub struct OasisTrainer<T> {
    w: Array2<T>,
    diagonal: bool,
    aggressiveness: T,
}

impl<T: Scalar> OasisTrainer<T> {
    /// Starts from the identity.
    pub fn new(n_features: usize, diagonal: bool, aggressiveness: T) -> Self {
        Self { w: Array2::eye(n_features), diagonal, aggressiveness }
    }

    pub fn weights(&self) -> &Array2<T> {
        &self.w
    }

    fn quad(&self, u: &[T]) -> T {
        let n = u.len();
        let mut s = T::zero();
        for k in 0..n {
            if u[k] == T::zero() {
                continue;
            }
            for l in 0..n {
                s += u[k] * self.w[[k, l]] * u[l];
            }
        }
        s
    }

    pub fn loss(&self, u_pos: &[T], u_neg: &[T]) -> T {
        (T::one() + self.quad(u_pos) - self.quad(u_neg)).max(T::zero())
    }

    /// One passive-aggressive update.
    pub fn step(&mut self, triplet: Triplet, u_pos: &[T], u_neg: &[T]) -> StepOutcome<T> {
        let loss_before = self.loss(u_pos, u_neg);
        let mut outcome = StepOutcome { triplet, loss_before, loss_after: loss_before, tau: T::zero() };
        if loss_before <= T::zero() {
            return outcome;
        }
        let n = u_pos.len();
        let v = if self.diagonal {
            Array2::from_shape_fn((n, n), |(k, l)| {
                if k == l {
                    u_neg[k] * u_neg[k] - u_pos[k] * u_pos[k]
                } else {
                    T::zero()
                }
            })
        } else {
            Array2::from_shape_fn((n, n), |(k, l)| u_neg[k] * u_neg[l] - u_pos[k] * u_pos[l])
        };
        let norm_sq = v.iter().fold(T::zero(), |s, &x| s + x * x);
        if norm_sq == T::zero() {
            return outcome;
        }
        let tau = self.aggressiveness.min(loss_before / norm_sq);
        self.w.scaled_add(tau, &v);
        outcome.tau = tau;
        outcome.loss_after = self.loss(u_pos, u_neg);
        outcome
    }
}

/// Trains OASIS (or its diagonal variant) and projects onto the PSD cone once.
pub fn fit_oasis<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig) -> Result<MetricModel<T>> {
    fit_oasis_observed(inv, dm, cfg, |_| {})
}

/// [`fit_oasis`] with a callback after every update.
pub fn fit_oasis_observed<T: Scalar>(
    inv: &Inventory,
    dm: &DistanceMatrix<T>,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&StepOutcome<T>),
) -> Result<MetricModel<T>> {
    let diagonal = match cfg.method {
        Method::Oasis => false,
        Method::OasisDiag => true,
        other => return Err(Error::KindMismatch { design: "oasis".into(), method: other.to_string() }),
    };
    let aligned = dm.restrict(inv.phonemes())?;
    if aligned.len() != dm.len() {
        return Err(Error::LabelSetMismatch("distances carry phonemes outside the inventory".into()));
    }
    let nf = inv.n_features();
    let mut trainer = OasisTrainer::new(nf, diagonal, T::of(cfg.oasis_aggressiveness));
    if cfg.oasis_iterations > 0 {
        let mut sampler = TripletSampler::new(&aligned, cfg.seed)?;
        let diff = |a: usize, b: usize| -> Vec<T> {
            inv.feature(a)
                .values()
                .iter()
                .zip(inv.feature(b).values())
                .map(|(&x, &y)| T::of(x as f64 - y as f64))
                .collect()
        };
        for _ in 0..cfg.oasis_iterations {
            let t = sampler.sample();
            let outcome = trainer.step(t, &diff(t.anchor, t.positive), &diff(t.anchor, t.negative));
            observe(&outcome);
        }
    }
    let provenance = Provenance { method: cfg.method, lambda: None, seed: Some(cfg.seed) };
    let projected = project_psd(&symmetrize(trainer.weights()))?;
    if diagonal {
        let weights = (0..nf).map(|k| projected[[k, k]].max(T::zero())).collect();
        MetricModel::diagonal(inv.theory().clone(), weights, provenance)
    } else {
        let model = MetricModel::full_projected(inv.theory().clone(), &projected, provenance)?;
        debug_assert_eq!(model.kind(), MetricKind::Full);
        Ok(model)
    }
}
