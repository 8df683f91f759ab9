use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues descending, eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Array1<T>,
    pub eigenvectors: Array2<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn reconstruct(&self) -> Array2<T> {
        self.reconstruct_with(|l| l)
    }

    /// `V f(Λ) Vᵀ`, exactly symmetric.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Array2<T> {
        let n = self.eigenvalues.len();
        let mut out = Array2::zeros((n, n));
        for k in 0..n {
            let lambda = f(self.eigenvalues[k]);
            if lambda == T::zero() {
                continue;
            }
            let v = self.eigenvectors.column(k);
            for i in 0..n {
                let vi = v[i] * lambda;
                for j in i..n {
                    out[[i, j]] += vi * v[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[[i, j]] = out[[j, i]];
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::infinity(), T::min)
    }
}

fn max_abs<T: Scalar>(a: &Array2<T>) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub(crate) fn check_symmetric<T: Scalar>(w: &Array2<T>) -> Result<()> {
    let (r, c) = w.dim();
    if r != c {
        return Err(Error::NotSquare(r, c));
    }
    let tol = T::tolerance(0.0, max_abs(w));
    for i in 0..r {
        for j in 0..i {
            if !((w[[i, j]] - w[[j, i]]).abs() <= tol) {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// `(W + Wᵀ) / 2`.
pub fn symmetrize<T: Scalar>(w: &Array2<T>) -> Array2<T> {
    let half = T::of(0.5);
    Array2::from_shape_fn(w.dim(), |(i, j)| (w[[i, j]] + w[[j, i]]) * half)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops to 1e-12 (or the
/// precision floor of `T` relative to ‖W‖).
pub fn symmetric_eigendecompose<T: Scalar>(w: &Array2<T>) -> Result<Spectrum<T>> {
    check_symmetric(w)?;
    let n = w.nrows();
    let mut a = w.clone();
    let mut v = Array2::<T>::eye(n);
    let frobenius = a.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let threshold = T::tolerance(1e-12, frobenius);

    let off_norm = |a: &Array2<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[[i, j]] * a[[i, j]];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (T::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                a[[p, q]] = T::zero();
                a[[q, p]] = T::zero();
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > threshold {
            return Err(Error::EigenNotConverged { sweeps: MAX_SWEEPS, off_norm: off.as_f64() });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let column = v.column(src);
        // Deterministic sign: the largest-magnitude component is positive.
        let pivot = column
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bi, bv), (i, &x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) })
            .0;
        let sign = if column[pivot] < T::zero() { -T::one() } else { T::one() };
        for k in 0..n {
            eigenvectors[[k, col]] = column[k] * sign;
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clamped to zero.
pub fn project_psd<T: Scalar>(w: &Array2<T>) -> Result<Array2<T>> {
    let spectrum = symmetric_eigendecompose(w)?;
    Ok(spectrum.reconstruct_with(|l| l.max(T::zero())))
}

/// Eigenvalues above -1e-10 count as nonnegative.
pub const PSD_TOLERANCE: f64 = 1e-10;

pub fn is_psd<T: Scalar>(w: &Array2<T>) -> Result<bool> {
    let spectrum = symmetric_eigendecompose(w)?;
    Ok(spectrum.min_eigenvalue() >= -T::tolerance(PSD_TOLERANCE, max_abs(w)))
}
