use rayon::prelude::*;
use serde::Serialize;

use super::stats::{mean, sample_sd, spearman};
use crate::baselines::baseline_distances;
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::method::Method;
use crate::metric::{build_design_matrix, MetricModel, ModelFile};
use crate::scalar::Scalar;
use crate::solvers::lasso::{check_ls_kind, lasso_path, ls_model};
use crate::solvers::{fit_oasis, LassoProblem, SolverConfig};

/// What produced a fold's predictions.
#[derive(Debug, Clone, PartialEq)]
pub enum FoldModel<T> {
    Learned(MetricModel<T>),
    Baseline(Method),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult<T> {
    pub left_out: String,
    pub rho: f64,
    pub selected_lambda: Option<f64>,
    pub model: FoldModel<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T> {
    pub method: Method,
    pub theory: String,
    pub folds: Vec<FoldResult<T>>,
    pub mean_rho: f64,
    pub sd_rho: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FoldModelFile {
    Learned(ModelFile),
    Baseline { baseline: Method },
}

#[derive(Serialize)]
struct FoldFile<'a> {
    left_out: &'a str,
    rho: f64,
    lambda: Option<f64>,
    model: FoldModelFile,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    method: Method,
    theory: &'a str,
    mean_rho: f64,
    sd_rho: f64,
    folds: Vec<FoldFile<'a>>,
}

impl<T: Scalar> EvaluationReport<T> {
    fn from_folds(method: Method, theory: String, folds: Vec<FoldResult<T>>) -> Self {
        let rhos: Vec<f64> = folds.iter().map(|f| f.rho).collect();
        Self { method, theory, mean_rho: mean(&rhos), sd_rho: sample_sd(&rhos), folds }
    }

    pub fn rhos(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.rho).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.folds.iter().map(|f| f.left_out.as_str()).collect()
    }

    /// Fitted models in fold order (empty for baselines).
    pub fn models(&self) -> Vec<&MetricModel<T>> {
        self.folds
            .iter()
            .filter_map(|f| match &f.model {
                FoldModel::Learned(m) => Some(m),
                FoldModel::Baseline(_) => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let folds = self
            .folds
            .iter()
            .map(|f| FoldFile {
                left_out: &f.left_out,
                rho: f.rho,
                lambda: f.selected_lambda,
                model: match &f.model {
                    FoldModel::Learned(m) => FoldModelFile::Learned(m.to_file()),
                    FoldModel::Baseline(b) => FoldModelFile::Baseline { baseline: *b },
                },
            })
            .collect();
        let file = ReportFile { method: self.method, theory: &self.theory, mean_rho: self.mean_rho, sd_rho: self.sd_rho, folds };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// `left_out,rho,lambda`; the lambda cell is empty when no λ applies.
    pub fn fold_csv(&self) -> String {
        let mut out = String::from("left_out,rho,lambda\n");
        for f in &self.folds {
            let lambda = f.selected_lambda.map(|l| l.to_string()).unwrap_or_default();
            out += &format!("{},{},{}\n", f.left_out, f.rho, lambda);
        }
        out
    }
}

/// Spearman, with a constant prediction or target scored as 0 (no rank
/// information).
fn fold_score(pred: &[f64], truth: &[f64]) -> Result<f64> {
    match spearman(pred, truth) {
        Err(Error::ConstantVector) => Ok(0.0),
        other => other,
    }
}

/// Predicted and empirical distances from phoneme `p` to every other phoneme.
fn fold_vectors<T: Scalar>(model: &MetricModel<T>, inv: &Inventory, dm: &DistanceMatrix<T>, p: usize) -> (Vec<f64>, Vec<f64>) {
    let fp = inv.feature(p).values();
    (0..inv.len())
        .filter(|&q| q != p)
        .map(|q| (model.distance_unchecked(fp, inv.feature(q).values()).as_f64(), dm.get(p, q).as_f64()))
        .unzip()
}

fn without<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, p: usize) -> Result<(Inventory, DistanceMatrix<T>)> {
    let keep: Vec<&str> = inv
        .phonemes()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != p)
        .map(|(_, l)| l.as_str())
        .collect();
    Ok((inv.subset(&keep)?, dm.without(p)))
}

/// LS weights at every grid λ, one model per λ.
fn ls_grid_models<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig, lambdas: &[f64]) -> Result<Vec<MetricModel<T>>> {
    let kind = cfg.method.kind().expect("LS methods have a kind");
    let design = build_design_matrix(inv, dm, kind)?;
    let problem = LassoProblem::from_design(&design);
    let paths = lasso_path(&problem, lambdas, kind == crate::metric::MetricKind::Diagonal, cfg)?;
    paths
        .into_iter()
        .zip(lambdas)
        .map(|(w, &l)| ls_model(&design, w, cfg.method, l))
        .collect()
}

/// λ maximizing the mean inner leave-one-phoneme-out Spearman over the grid;
/// ties go to the smallest λ (least shrinkage).
pub fn select_lambda<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig) -> Result<f64> {
    let grid = &cfg.lambda_grid;
    let mut totals = vec![0.0; grid.len()];
    for q in 0..inv.len() {
        let (train_inv, train_dm) = without(inv, dm, q)?;
        let models = ls_grid_models(&train_inv, &train_dm, cfg, grid)?;
        for (total, model) in totals.iter_mut().zip(&models) {
            let (pred, truth) = fold_vectors(model, inv, dm, q);
            *total += fold_score(&pred, &truth)?;
        }
    }
    let mut best = 0;
    for (i, &t) in totals.iter().enumerate() {
        if t > totals[best] {
            best = i;
        }
    }
    Ok(grid[best])
}

/// Fits `cfg.method` on all pairs, selecting λ by inner leave-one-phoneme-out
/// when `cfg.lambda` is unset. Returns the model and the λ used.
pub fn fit_method<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig) -> Result<(MetricModel<T>, Option<f64>)> {
    cfg.validate()?;
    let dm = dm.restrict(inv.phonemes())?;
    match cfg.method {
        Method::Uniform => Ok((MetricModel::uniform(inv.theory().clone()), None)),
        Method::Pmv | Method::Frisch => {
            Err(Error::InvalidConfig(format!("'{}' has no weight matrix", cfg.method)))
        }
        _ => fit_fold(inv, &dm, cfg),
    }
}

fn fit_fold<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig) -> Result<(MetricModel<T>, Option<f64>)> {
    if cfg.method.is_oasis() {
        return Ok((fit_oasis(inv, dm, cfg)?, None));
    }
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => select_lambda(inv, dm, cfg)?,
    };
    // Same continuation as a direct fit: grid points above λ, then λ.
    let mut lambdas: Vec<f64> = cfg.lambda_grid.iter().copied().filter(|&l| l > lambda).collect();
    lambdas.push(lambda);
    let model = ls_grid_models(inv, dm, cfg, &lambdas)?.pop().expect("non-empty path");
    Ok((model, Some(lambda)))
}

/// Leave-one-phoneme-out evaluation of one method. Folds run on the current
/// rayon pool; results are reported in inventory order.
pub fn lopo_evaluate<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, method: Method, cfg: &SolverConfig) -> Result<EvaluationReport<T>> {
    let cfg = SolverConfig { method, ..cfg.clone() };
    cfg.validate()?;
    let dm = dm.restrict(inv.phonemes())?;
    let n = inv.len();
    if n < 4 {
        return Err(Error::FoldTooSmall { phoneme: inv.phonemes()[0].clone(), pairs: n - 1 });
    }
    let theory = inv.theory().name().to_string();
    if method.is_baseline() {
        let bdm: DistanceMatrix<T> = baseline_distances(method, inv)?;
        let folds = (0..n)
            .map(|p| {
                let (pred, truth): (Vec<f64>, Vec<f64>) =
                    (0..n).filter(|&q| q != p).map(|q| (bdm.get(p, q).as_f64(), dm.get(p, q).as_f64())).unzip();
                Ok(FoldResult {
                    left_out: inv.phonemes()[p].clone(),
                    rho: fold_score(&pred, &truth)?,
                    selected_lambda: None,
                    model: FoldModel::Baseline(method),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(EvaluationReport::from_folds(method, theory, folds));
    }
    if method.is_least_squares() {
        check_ls_kind(method.kind().expect("LS kind"), method)?;
    }
    let folds = (0..n)
        .into_par_iter()
        .map(|p| {
            let label = inv.phonemes()[p].clone();
            let wrap = |e: Error| Error::Fold { phoneme: label.clone(), source: Box::new(e) };
            let (train_inv, train_dm) = without(inv, &dm, p).map_err(wrap)?;
            let (model, selected_lambda) = fit_fold(&train_inv, &train_dm, &cfg).map_err(wrap)?;
            let (pred, truth) = fold_vectors(&model, inv, &dm, p);
            let rho = fold_score(&pred, &truth).map_err(wrap)?;
            Ok(FoldResult { left_out: label, rho, selected_lambda, model: FoldModel::Learned(model) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport::from_folds(method, theory, folds))
}
