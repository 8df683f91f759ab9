//! L1-regularized least squares, `Σ (P w − D)² + λ‖w‖₁`, by cyclic
//! coordinate descent with soft-thresholding on the Gram form.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::method::Method;
use crate::metric::{DesignMatrix, MetricKind, MetricModel, Provenance};
use crate::scalar::Scalar;

/// Sufficient statistics `PᵀP`, `PᵀD`, `DᵀD` of a least-squares problem.
///
/// Problems built from a design matrix merge identical columns into one
/// coefficient: with equal columns only the sum of their weights enters the
/// fit, and `|a| + |b| ≥ |a + b|`, so the merged problem has the same optimum.
/// [`LassoProblem::expand`] splits a merged weight evenly over its columns.
#[derive(Debug, Clone)]
pub struct LassoProblem<T> {
    pub gram: Array2<T>,
    pub xty: Array1<T>,
    pub yty: T,
    groups: Vec<Vec<usize>>,
    n_original: usize,
    /// Basis of the (numerical) null space of `gram`, with `gram · n` cached.
    null_basis: Vec<(Array1<T>, Array1<T>)>,
}

impl<T: Scalar> LassoProblem<T> {
    pub fn new(x: ArrayView2<T>, y: ArrayView1<T>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.len() });
        }
        let p = x.ncols();
        let gram = x.t().dot(&x);
        Ok(Self {
            null_basis: null_basis(&gram),
            gram,
            xty: x.t().dot(&y),
            yty: y.dot(&y),
            groups: (0..p).map(|k| vec![k]).collect(),
            n_original: p,
        })
    }

    pub fn from_design(design: &DesignMatrix<T>) -> Self {
        let x = &design.rows;
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in 0..x.ncols() {
            let key: Vec<u64> = x.column(k).iter().map(|v| v.as_f64().to_bits()).collect();
            match seen.get(&key) {
                Some(&g) => groups[g].push(k),
                None => {
                    seen.insert(key, groups.len());
                    groups.push(vec![k]);
                }
            }
        }
        let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
        let reduced = x.select(Axis(1), &reps);
        let y = &design.targets;
        let gram = reduced.t().dot(&reduced);
        Self {
            null_basis: null_basis(&gram),
            gram,
            xty: reduced.t().dot(y),
            yty: y.dot(y),
            groups,
            n_original: x.ncols(),
        }
    }

    /// Number of coefficients in the original (unmerged) problem.
    pub fn n_original(&self) -> usize {
        self.n_original
    }

    /// Maps merged weights back to one weight per original column.
    pub fn expand(&self, w: &Array1<T>) -> Array1<T> {
        let mut out = Array1::zeros(self.n_original);
        for (g, cols) in self.groups.iter().enumerate() {
            let share = w[g] / T::of_usize(cols.len());
            for &k in cols {
                out[k] = share;
            }
        }
        out
    }

    pub fn n_coefficients(&self) -> usize {
        self.xty.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions<T> {
    pub lambda: T,
    pub nonnegative: bool,
    /// Stop once no coordinate moves more than this in a sweep...
    pub tolerance: T,
    /// ...or once the KKT violation drops to this level.
    pub kkt_tolerance: T,
    pub max_sweeps: usize,
}

/// KKT level accepted as converged by the design-matrix fits.
pub const KKT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct LassoSolution<T> {
    pub weights: Array1<T>,
    pub sweeps: usize,
    /// Objective after each sweep (index 0 is the starting point).
    pub objective_trace: Vec<T>,
    pub kkt_violation: T,
}

/// `wᵀGw − 2bᵀw + DᵀD + λ‖w‖₁`.
pub fn lasso_objective<T: Scalar>(problem: &LassoProblem<T>, w: &Array1<T>, lambda: T) -> T {
    let quad = w.dot(&problem.gram.dot(w));
    let l1 = w.iter().fold(T::zero(), |s, &x| s + x.abs());
    quad - T::of(2.0) * problem.xty.dot(w) + problem.yty + lambda * l1
}

/// Largest violation of the optimality conditions, in gradient units.
pub fn kkt_violation<T: Scalar>(problem: &LassoProblem<T>, w: &Array1<T>, lambda: T, nonnegative: bool) -> T {
    kkt_from_gradient(problem, &problem.gram.dot(w), w, lambda, nonnegative)
}

fn kkt_from_gradient<T: Scalar>(problem: &LassoProblem<T>, gw: &Array1<T>, w: &Array1<T>, lambda: T, nonnegative: bool) -> T {
    let mut worst = T::zero();
    for k in 0..w.len() {
        let grad = T::of(2.0) * (gw[k] - problem.xty[k]);
        let v = if nonnegative {
            if w[k] > T::zero() {
                (grad + lambda).abs()
            } else {
                (-(grad + lambda)).max(T::zero())
            }
        } else if w[k] != T::zero() {
            (grad + lambda * w[k].signum()).abs()
        } else {
            (grad.abs() - lambda).max(T::zero())
        };
        worst = worst.max(v);
    }
    worst
}

fn soft_threshold<T: Scalar>(x: T, threshold: T) -> T {
    if x > threshold {
        x - threshold
    } else if x < -threshold {
        x + threshold
    } else {
        T::zero()
    }
}

/// Null-space basis of a PSD Gram matrix by Cholesky with diagonal pivoting;
/// pivots below `1e-9 · max diag` count as zero.
fn null_basis<T: Scalar>(gram: &Array2<T>) -> Vec<(Array1<T>, Array1<T>)> {
    let p = gram.nrows();
    let mut a = gram.clone();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut l = Array2::<T>::zeros((p, p));
    let max_diag = (0..p).fold(T::zero(), |m, i| m.max(gram[[i, i]]));
    let tol = max_diag * T::of(1e-9);
    let mut rank = p;
    for j in 0..p {
        let q = (j..p).fold(j, |best, i| if a[[i, i]] > a[[best, best]] { i } else { best });
        if a[[q, q]] <= tol {
            rank = j;
            break;
        }
        if q != j {
            perm.swap(j, q);
            for k in 0..p {
                a.swap([j, k], [q, k]);
            }
            for k in 0..p {
                a.swap([k, j], [k, q]);
            }
            for k in 0..j {
                l.swap([j, k], [q, k]);
            }
        }
        let d = a[[j, j]].sqrt();
        l[[j, j]] = d;
        for i in j + 1..p {
            l[[i, j]] = a[[i, j]] / d;
        }
        for i in j + 1..p {
            for k in j + 1..p {
                let v = l[[i, j]] * l[[k, j]];
                a[[i, k]] -= v;
            }
        }
    }
    let mut basis: Vec<Array1<T>> = Vec::new();
    for j in rank..p {
        // Solve L11ᵀ z = −L21[j]ᵀ by back substitution.
        let mut z = vec![T::zero(); rank];
        for r in (0..rank).rev() {
            let mut s = -l[[j, r]];
            for c in r + 1..rank {
                s -= l[[c, r]] * z[c];
            }
            z[r] = s / l[[r, r]];
        }
        let mut n = Array1::zeros(p);
        for (r, &v) in z.iter().enumerate() {
            n[perm[r]] = v;
        }
        n[perm[j]] = T::one();
        // Orthonormalize against the vectors kept so far.
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&n);
                n.scaled_add(-c, b);
            }
        }
        let norm = n.dot(&n).sqrt();
        if norm > T::of(1e-6) {
            basis.push(n.mapv(|v| v / norm));
        }
    }
    basis
        .into_iter()
        .map(|n| {
            let gn = gram.dot(&n);
            (n, gn)
        })
        .collect()
}

/// Exact minimizer over `t` of the objective along `w + t·n`:
/// `t²·nᵀGn + 2t·nᵀ(Gw − b) + λ Σ |wᵢ + t nᵢ|`, a convex piecewise quadratic.
/// Returns `(t, change in objective)`.
fn line_minimize<T: Scalar>(w: &Array1<T>, n: &Array1<T>, curvature: T, slope: T, lambda: T) -> (T, T) {
    let mut breaks: Vec<(T, T)> = w
        .iter()
        .zip(n.iter())
        .filter(|(_, &ni)| ni != T::zero())
        .map(|(&wi, &ni)| (-wi / ni, ni.abs()))
        .collect();
    breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let two = T::of(2.0);
    // Sum of sign(wᵢ + t nᵢ)·nᵢ left of every breakpoint.
    let mut s = -breaks.iter().fold(T::zero(), |acc, b| acc + b.1);
    let deriv = |t: T, s: T| two * curvature * t + two * slope + lambda * s;
    let mut t_best = None;
    let mut lo = T::neg_infinity();
    for &(bp, weight) in &breaks {
        // Interval (lo, bp) with constant sign sum s.
        if curvature > T::zero() {
            let root = -(two * slope + lambda * s) / (two * curvature);
            if root > lo && root < bp {
                t_best = Some(root);
                break;
            }
        }
        let left = deriv(bp, s);
        let right = deriv(bp, s + two * weight);
        if left <= T::zero() && right >= T::zero() {
            t_best = Some(bp);
            break;
        }
        s += two * weight;
        lo = bp;
    }
    let t = match t_best {
        Some(t) => t,
        None if curvature > T::zero() => -(two * slope + lambda * s) / (two * curvature),
        None => return (T::zero(), T::zero()),
    };
    let l1_change = w
        .iter()
        .zip(n.iter())
        .fold(T::zero(), |acc, (&wi, &ni)| acc + (wi + t * ni).abs() - wi.abs());
    (t, curvature * t * t + two * t * slope + lambda * l1_change)
}

/// Sweeps between Anderson extrapolation attempts.
const ANDERSON_DEPTH: usize = 5;

/// Anderson extrapolation of the last CD iterates: the affine combination
/// `Σ cᵢ wᵢ` (Σ cᵢ = 1) minimizing the norm of the combined sweep
/// differences. On a rank-deficient Gram, plain CD crawls along the null space
/// at a speed proportional to λ; the extrapolated point jumps ahead. Callers
/// keep it only when it lowers the objective.
fn anderson_extrapolate<T: Scalar>(history: &[Array1<T>], nonnegative: bool) -> Option<Array1<T>> {
    let k = history.len() - 1;
    let u: Vec<Array1<T>> = (0..k).map(|i| &history[i + 1] - &history[i]).collect();
    let mut a = Array2::from_shape_fn((k, k), |(i, j)| u[i].dot(&u[j]));
    let scale = (0..k).fold(T::zero(), |m, i| m.max(a[[i, i]]));
    if scale <= T::zero() {
        return None;
    }
    for i in 0..k {
        a[[i, i]] += scale * T::of(1e-10);
    }
    let z = solve_small(a, Array1::ones(k))?;
    let total = z.sum();
    if total == T::zero() || !total.is_finite() {
        return None;
    }
    let mut out = Array1::zeros(history[0].len());
    for (i, zi) in z.iter().enumerate() {
        out.scaled_add(*zi / total, &history[i + 1]);
    }
    if nonnegative {
        out.mapv_inplace(|x| x.max(T::zero()));
    }
    Some(out)
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_small<T: Scalar>(mut a: Array2<T>, mut b: Array1<T>) -> Option<Array1<T>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[[i, c]].abs().total_cmp_like(&a[[j, c]].abs()))?;
        if a[[piv, c]] == T::zero() {
            return None;
        }
        for k in 0..n {
            a.swap([c, k], [piv, k]);
        }
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[[r, c]] / a[[c, c]];
            for k in c..n {
                let v = a[[c, k]];
                a[[r, k]] -= f * v;
            }
            let v = b[c];
            b[r] -= f * v;
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let s = (r + 1..n).fold(T::zero(), |s, k| s + a[[r, k]] * x[k]);
        x[r] = (b[r] - s) / a[[r, r]];
    }
    x.iter().all(|v: &T| v.is_finite()).then_some(x)
}

trait TotalCmpLike {
    fn total_cmp_like(&self, other: &Self) -> std::cmp::Ordering;
}

impl<T: Scalar> TotalCmpLike for T {
    fn total_cmp_like(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Cyclic coordinate descent from `w = 0`.
pub fn solve_lasso<T: Scalar>(problem: &LassoProblem<T>, opts: &LassoOptions<T>) -> Result<LassoSolution<T>> {
    solve_lasso_from(problem, opts, Array1::zeros(problem.n_coefficients()))
}

/// Cyclic coordinate descent from `start` (a warm start, e.g. the solution
/// at a neighbouring λ).
pub fn solve_lasso_from<T: Scalar>(problem: &LassoProblem<T>, opts: &LassoOptions<T>, start: Array1<T>) -> Result<LassoSolution<T>> {
    let p = problem.n_coefficients();
    if start.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: start.len() });
    }
    let half_lambda = opts.lambda * T::of(0.5);
    let mut w = start;
    if opts.nonnegative {
        w.mapv_inplace(|x| x.max(T::zero()));
    }
    let mut gw = problem.gram.dot(&w);
    let mut trace = vec![lasso_objective(problem, &w, opts.lambda)];
    let slack = T::tolerance(1e-10, problem.yty);
    let mut history = vec![w.clone()];

    for sweep in 1..=opts.max_sweeps {
        let mut max_step = T::zero();
        for k in 0..p {
            let gkk = problem.gram[[k, k]];
            if gkk <= T::zero() {
                continue;
            }
            let rho = problem.xty[k] - (gw[k] - gkk * w[k]);
            let updated = if opts.nonnegative {
                (rho - half_lambda).max(T::zero()) / gkk
            } else {
                soft_threshold(rho, half_lambda) / gkk
            };
            let delta = updated - w[k];
            if delta != T::zero() {
                w[k] = updated;
                gw.scaled_add(delta, &problem.gram.column(k));
                max_step = max_step.max(delta.abs());
            }
        }
        if !opts.nonnegative {
            // Along null-space directions the fit is constant and only the
            // L1 term changes; coordinate steps alone crawl there.
            let mut directions: Vec<(Array1<T>, Array1<T>)> = Vec::new();
            if !problem.null_basis.is_empty() {
                // Projected sign vector: the L1 descent direction inside the
                // null space when no coordinate sits at zero.
                let signs = w.mapv(|v| if v == T::zero() { T::zero() } else { v.signum() });
                let mut d = Array1::<T>::zeros(p);
                let mut gd = Array1::<T>::zeros(p);
                for (n, gn) in &problem.null_basis {
                    let c = -n.dot(&signs);
                    d.scaled_add(c, n);
                    gd.scaled_add(c, gn);
                }
                directions.push((d, gd));
            }
            for (n, gn) in directions.iter().chain(&problem.null_basis) {
                let curvature = n.dot(gn);
                let slope = n.dot(&gw) - n.dot(&problem.xty);
                let (t, change) = line_minimize(&w, n, curvature, slope, opts.lambda);
                if change < -slack {
                    w.scaled_add(t, n);
                    gw.scaled_add(t, gn);
                    max_step = max_step.max((t * n.iter().fold(T::zero(), |m, v| m.max(v.abs()))).abs());
                }
            }
        }
        let objective = lasso_objective(problem, &w, opts.lambda);
        let previous = *trace.last().unwrap();
        debug_assert!(
            objective <= previous + slack,
            "objective increased in sweep {sweep}: {previous} -> {objective}"
        );
        trace.push(objective);
        history.push(w.clone());
        if history.len() > ANDERSON_DEPTH {
            if let Some(candidate) = anderson_extrapolate(&history, opts.nonnegative) {
                let value = lasso_objective(problem, &candidate, opts.lambda);
                if value < objective {
                    w = candidate;
                    gw = problem.gram.dot(&w);
                    *trace.last_mut().unwrap() = value;
                }
            }
            history.clear();
            history.push(w.clone());
        }
        let kkt = kkt_from_gradient(problem, &gw, &w, opts.lambda, opts.nonnegative);
        if max_step <= opts.tolerance || kkt <= opts.kkt_tolerance {
            let kkt = kkt_violation(problem, &w, opts.lambda, opts.nonnegative);
            return Ok(LassoSolution { weights: w, sweeps: sweep, objective_trace: trace, kkt_violation: kkt });
        }
    }
    Err(Error::NotConverged {
        sweeps: opts.max_sweeps,
        kkt_violation: kkt_violation(problem, &w, opts.lambda, opts.nonnegative).as_f64(),
    })
}

/// Fits LS (full, unconstrained, then PSD-projected) or diagonal LS
/// (nonnegative, PSD by construction) at `cfg.lambda`.
pub fn fit_ls<T: Scalar>(design: &DesignMatrix<T>, cfg: &SolverConfig) -> Result<MetricModel<T>> {
    let problem = LassoProblem::from_design(design);
    fit_ls_problem(design, &problem, cfg)
}

pub(crate) fn fit_ls_problem<T: Scalar>(
    design: &DesignMatrix<T>,
    problem: &LassoProblem<T>,
    cfg: &SolverConfig,
) -> Result<MetricModel<T>> {
    check_ls_kind(design.kind, cfg.method)?;
    let lambda = cfg
        .lambda
        .ok_or_else(|| Error::InvalidConfig("least-squares fit needs a fixed lambda".into()))?;
    // Continuation from the grid points above λ: the full design is rank
    // deficient and a cold start crawls along its null space for ~1/λ sweeps.
    let mut lambdas: Vec<f64> = cfg.lambda_grid.iter().copied().filter(|&l| l > lambda).collect();
    lambdas.push(lambda);
    let weights = lasso_path(problem, &lambdas, design.kind == MetricKind::Diagonal, cfg)?
        .pop()
        .expect("path is non-empty");
    ls_model(design, weights, cfg.method, lambda)
}

pub(crate) fn check_ls_kind(kind: MetricKind, method: Method) -> Result<()> {
    let expected = match method {
        Method::Ls => MetricKind::Full,
        Method::LsDiag => MetricKind::Diagonal,
        other => return Err(Error::KindMismatch { design: kind.to_string(), method: other.to_string() }),
    };
    if kind != expected {
        return Err(Error::KindMismatch { design: kind.to_string(), method: method.to_string() });
    }
    Ok(())
}

/// Solves at every λ in `lambdas`, largest first, each warm-started from the
/// previous solution. Returns expanded weights in the order given.
pub(crate) fn lasso_path<T: Scalar>(
    problem: &LassoProblem<T>,
    lambdas: &[f64],
    nonnegative: bool,
    cfg: &SolverConfig,
) -> Result<Vec<Array1<T>>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));
    let mut out = vec![Array1::zeros(0); lambdas.len()];
    let mut w = Array1::zeros(problem.n_coefficients());
    for i in order {
        let opts = LassoOptions {
            lambda: T::of(lambdas[i]),
            nonnegative,
            tolerance: T::tolerance(cfg.tolerance, T::zero()),
            kkt_tolerance: T::tolerance(KKT_TOLERANCE, T::zero()),
            max_sweeps: cfg.max_sweeps,
        };
        w = solve_lasso_from(problem, &opts, w)?.weights;
        out[i] = problem.expand(&w);
    }
    Ok(out)
}

pub(crate) fn ls_model<T: Scalar>(
    design: &DesignMatrix<T>,
    weights: Array1<T>,
    method: Method,
    lambda: f64,
) -> Result<MetricModel<T>> {
    let provenance = Provenance { method, lambda: Some(lambda), seed: None };
    let theory = design.theory.clone();
    match design.kind {
        MetricKind::Diagonal => {
            let weights = weights.iter().map(|&w| w.max(T::zero())).collect();
            MetricModel::diagonal(theory, weights, provenance)
        }
        MetricKind::Full => {
            let n = design.n_features();
            let w = Array2::from_shape_fn((n, n), |(k, l)| weights[k * n + l]);
            MetricModel::full_projected(theory, &w, provenance)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::DistanceMatrix;
    use crate::inventory::{load_inventory, DatasetId, TheoryId};
    use crate::metric::build_design_matrix;
    use ndarray::array;

    /// Gaussian elimination with partial pivoting; independent of the CD path.
    fn dense_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Array1<f64> {
        let n = b.len();
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| a[[i, c]].abs().partial_cmp(&a[[j, c]].abs()).unwrap()).unwrap();
            for k in 0..n {
                a.swap([c, k], [piv, k]);
            }
            b.swap(c, piv);
            for r in c + 1..n {
                let f = a[[r, c]] / a[[c, c]];
                for k in c..n {
                    a[[r, k]] -= f * a[[c, k]];
                }
                b[r] -= f * b[c];
            }
        }
        let mut x = Array1::zeros(n);
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| a[[r, k]] * x[k]).sum();
            x[r] = (b[r] - s) / a[[r, r]];
        }
        x
    }

    fn opts(lambda: f64, nonnegative: bool) -> LassoOptions<f64> {
        LassoOptions { lambda, nonnegative, tolerance: 1e-12, kkt_tolerance: 0.0, max_sweeps: 100_000 }
    }

    #[test]
    fn zero_lambda_matches_normal_equations() {
        let x = array![[1.0, 0.5, -1.0], [0.0, 2.0, 1.0], [1.0, 1.0, 1.0], [3.0, -1.0, 0.5], [0.2, 0.1, 2.0]];
        let y = array![1.0, -2.0, 0.5, 4.0, 1.5];
        let problem = LassoProblem::new(x.view(), y.view()).unwrap();
        let sol = solve_lasso(&problem, &opts(0.0, false)).unwrap();
        let exact = dense_solve(x.t().dot(&x), x.t().dot(&y));
        for (a, b) in sol.weights.iter().zip(exact.iter()) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn huge_lambda_zeroes_everything() {
        let x = array![[1.0, 0.5], [0.0, 2.0], [1.0, 1.0]];
        let y = array![1.0, -2.0, 0.5];
        let problem = LassoProblem::new(x.view(), y.view()).unwrap();
        for nonneg in [false, true] {
            let sol = solve_lasso(&problem, &opts(1e12, nonneg)).unwrap();
            assert!(sol.weights.iter().all(|&w| w == 0.0));
        }
    }

    #[test]
    fn objective_never_increases_and_kkt_holds() {
        let x = Array2::from_shape_fn((30, 6), |(i, j)| (((i * 31 + j * 17) % 11) as f64 - 5.0) / 3.0);
        let y = Array1::from_shape_fn(30, |i| ((i * 7) % 5) as f64 - 1.0);
        let problem = LassoProblem::new(x.view(), y.view()).unwrap();
        for (lambda, nonneg) in [(0.5, false), (3.0, true), (0.01, true)] {
            let sol = solve_lasso(&problem, &opts(lambda, nonneg)).unwrap();
            for w in sol.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
            assert!(sol.kkt_violation <= 1e-6, "{}", sol.kkt_violation);
            if nonneg {
                assert!(sol.weights.iter().all(|&w| w >= 0.0));
            }
        }
    }

    #[test]
    fn non_convergence_reported() {
        let x = array![[1.0, 0.999], [1.0, 1.001], [0.5, 0.5]];
        let y = array![1.0, 2.0, 0.0];
        let problem = LassoProblem::new(x.view(), y.view()).unwrap();
        let err = solve_lasso(&problem, &LassoOptions { lambda: 0.0, nonnegative: false, tolerance: 1e-14, kkt_tolerance: 0.0, max_sweeps: 2 })
            .unwrap_err();
        assert!(matches!(err, Error::NotConverged { sweeps: 2, .. }));
    }

    #[test]
    fn diagonal_recovery_from_planted_weights() {
        let inv = load_inventory(TheoryId::Articulatory, DatasetId::Hebrew);
        let planted: Vec<f64> = (0..inv.n_features()).map(|k| 0.25 + (k % 4) as f64 * 0.5).collect();
        let truth = MetricModel::diagonal(inv.theory().clone(), planted.clone(), Provenance::new(Method::LsDiag)).unwrap();
        let dm: DistanceMatrix<f64> = truth.distances(&inv).unwrap();
        let design = build_design_matrix(&inv, &dm, MetricKind::Diagonal).unwrap();
        let model = fit_ls(&design, &SolverConfig::for_method(Method::LsDiag).with_lambda(0.0)).unwrap();
        // "dn" is constant over the Hebrew inventory, so its weight is unidentifiable.
        let dn = inv.theory().index_of("dn").unwrap();
        for (k, (&got, &want)) in model.diagonal_weights().iter().zip(&planted).enumerate() {
            if k == dn {
                assert_eq!(got, 0.0);
            } else {
                assert!((got - want).abs() <= 1e-6 * want, "feature {k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn kind_mismatch_rejected() {
        let inv = load_inventory(TheoryId::Phonological, DatasetId::Hebrew);
        let truth = MetricModel::<f64>::uniform(inv.theory().clone());
        let dm = truth.distances(&inv).unwrap();
        let design = build_design_matrix(&inv, &dm, MetricKind::Full).unwrap();
        let cfg = SolverConfig::for_method(Method::LsDiag).with_lambda(0.1);
        assert!(matches!(fit_ls(&design, &cfg), Err(Error::KindMismatch { .. })));
        let cfg = SolverConfig::for_method(Method::Ls);
        assert!(matches!(fit_ls(&design, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn merged_columns_reach_the_unmerged_optimum() {
        let inv = load_inventory(TheoryId::Articulatory, DatasetId::Nm);
        let d = |i: usize, j: usize| 1.0 + ((i * 7 + j * 3) % 5) as f64;
        let dm = DistanceMatrix::from_fn(inv.phonemes().to_vec(), |i, j| d(i, j));
        let design = build_design_matrix(&inv, &dm, MetricKind::Full).unwrap();
        let merged = LassoProblem::from_design(&design);
        let plain = LassoProblem::new(design.rows.view(), design.targets.view()).unwrap();
        assert!(merged.n_coefficients() < plain.n_coefficients());
        assert_eq!(merged.n_original(), plain.n_coefficients());
        let lambda = 0.5;
        let o = LassoOptions { lambda, nonnegative: false, tolerance: 1e-13, kkt_tolerance: 1e-9, max_sweeps: 1_000_000 };
        let w = merged.expand(&solve_lasso(&merged, &o).unwrap().weights);
        assert!(kkt_violation(&plain, &w, lambda, false) <= 1e-6);
        let n = inv.n_features();
        for k in 0..n {
            for l in 0..n {
                assert_eq!(w[k * n + l], w[l * n + k]);
            }
        }
    }

    #[test]
    fn full_fit_is_psd_certified() {
        let inv = load_inventory(TheoryId::Phonological, DatasetId::Hebrew);
        let truth = MetricModel::<f64>::uniform(inv.theory().clone());
        let dm = truth.distances(&inv).unwrap();
        let design = build_design_matrix(&inv, &dm, MetricKind::Full).unwrap();
        let model = fit_ls(&design, &SolverConfig::for_method(Method::Ls).with_lambda(0.01)).unwrap();
        assert!(model.psd_certified());
        assert!(crate::metric::is_psd(&model.matrix()).unwrap());
    }
}
