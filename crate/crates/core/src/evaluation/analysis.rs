use serde::Serialize;

use super::lopo::{lopo_evaluate, EvaluationReport};
use super::stats::{average_ranks, mean, paired_t_test, sample_sd, wilcoxon_signed_rank, Alternative, TestKind};
use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::method::Method;
use crate::metric::{MetricKind, MetricModel};
use crate::packed::strict_index;
use crate::scalar::Scalar;
use crate::solvers::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub method_a: String,
    pub method_b: String,
    pub statistic: f64,
    pub p_value: f64,
    pub test: TestKind,
}

impl ComparisonResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Paired two-tailed t-test on per-fold Spearman differences `a − b`.
pub fn compare_methods<T: Scalar>(a: &EvaluationReport<T>, b: &EvaluationReport<T>) -> Result<ComparisonResult> {
    if a.labels() != b.labels() {
        return Err(Error::MismatchedFolds);
    }
    let (statistic, p_value) = paired_t_test(&a.rhos(), &b.rhos())?;
    Ok(ComparisonResult {
        method_a: a.method.to_string(),
        method_b: b.method.to_string(),
        statistic,
        p_value,
        test: TestKind::PairedTTwoTailed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationEntry {
    pub feature: String,
    /// Mean ρ with every feature minus mean ρ without this one.
    pub delta: f64,
    pub mean_rho: f64,
}

/// Leave-one-feature-out with diagonal LS. Sorted ascending by delta.
pub fn ablate_features<T: Scalar>(inv: &Inventory, dm: &DistanceMatrix<T>, cfg: &SolverConfig) -> Result<Vec<AblationEntry>> {
    let full = lopo_evaluate(inv, dm, Method::LsDiag, cfg)?;
    let mut out = Vec::with_capacity(inv.n_features());
    for feature in inv.theory().feature_names() {
        let reduced = inv.drop_feature(feature)?;
        let report = lopo_evaluate(&reduced, dm, Method::LsDiag, cfg)?;
        debug_assert_eq!(report.folds.len(), full.folds.len());
        out.push(AblationEntry { feature: feature.clone(), delta: full.mean_rho - report.mean_rho, mean_rho: report.mean_rho });
    }
    out.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    Ok(out)
}

pub fn ablation_csv(entries: &[AblationEntry]) -> String {
    let mut out = String::from("feature,delta_mean_rho\n");
    for e in entries {
        out += &format!("{},{}\n", e.feature, e.delta);
    }
    out
}

/// Per-feature mean and SD of diagonal weights across models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaliencyReport {
    pub theory: String,
    pub features: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub n_models: usize,
}

impl SaliencyReport {
    /// Features by decreasing mean weight (stable on ties).
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut order: Vec<usize> = (0..self.features.len()).collect();
        order.sort_by(|&a, &b| self.mean[b].total_cmp(&self.mean[a]));
        order.into_iter().map(|k| (self.features[k].as_str(), self.mean[k])).collect()
    }

    /// 1-based rank of a feature by decreasing mean weight.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.ranked().iter().position(|(f, _)| *f == feature).map(|r| r + 1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,mean,sd\n");
        for ((f, m), s) in self.features.iter().zip(&self.mean).zip(&self.sd) {
            out += &format!("{f},{m},{s}\n");
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn feature_saliency<T: Scalar>(models: &[&MetricModel<T>]) -> Result<SaliencyReport> {
    let first = models.first().ok_or(Error::TooFewValues { needed: 1, got: 0 })?;
    if models.iter().any(|m| m.kind() != MetricKind::Diagonal || m.theory() != first.theory()) {
        return Err(Error::MixedModels);
    }
    let nf = first.n_features();
    let columns: Vec<Vec<f64>> =
        (0..nf).map(|k| models.iter().map(|m| m.weight(k, k).as_f64()).collect()).collect();
    Ok(SaliencyReport {
        theory: first.theory().name().to_string(),
        features: first.theory().feature_names().to_vec(),
        mean: columns.iter().map(|c| mean(c)).collect(),
        sd: columns.iter().map(|c| sample_sd(c)).collect(),
        n_models: models.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedWeight {
    pub feature: String,
    pub a: f64,
    pub b: f64,
}

/// L1-normalized mean weights of two reports, paired by feature.
pub fn normalized_weight_comparison(a: &SaliencyReport, b: &SaliencyReport) -> Result<Vec<NormalizedWeight>> {
    if a.features != b.features {
        return Err(Error::TheoryMismatch);
    }
    let norm = |v: &[f64]| -> Result<Vec<f64>> {
        let total: f64 = v.iter().map(|x| x.abs()).sum();
        if total == 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(v.iter().map(|x| x / total).collect())
    };
    let (na, nb) = (norm(&a.mean)?, norm(&b.mean)?);
    Ok(a.features
        .iter()
        .zip(na.into_iter().zip(nb))
        .map(|(f, (x, y))| NormalizedWeight { feature: f.clone(), a: x, b: y })
        .collect())
}

pub fn normalized_weights_csv(rows: &[NormalizedWeight], a_name: &str, b_name: &str) -> String {
    let mut out = format!("feature,{a_name},{b_name}\n");
    for r in rows {
        out += &format!("{},{},{}\n", r.feature, r.a, r.b);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRanks {
    pub a: String,
    pub b: String,
    /// Rank of the pair's distance among all shared-subset pairs, per dataset.
    pub ranks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalPairReport {
    pub datasets: Vec<String>,
    pub shared: Vec<String>,
    pub pairs: Vec<PairRanks>,
    /// First dataset against each of the others.
    pub comparisons: Vec<ComparisonResult>,
}

impl MinimalPairReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("pair,{}\n", self.datasets.join(","));
        for p in &self.pairs {
            let ranks: Vec<String> = p.ranks.iter().map(|r| r.to_string()).collect();
            out += &format!("{}-{},{}\n", p.a, p.b, ranks.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Ranks the given pairs within each dataset restricted to the phonemes all
/// datasets share, and tests the first dataset's ranks against each other's
/// with the Wilcoxon signed-rank test on `first − other`.
pub fn minimal_pair_analysis<T: Scalar>(
    dms: &[(String, DistanceMatrix<T>)],
    pairs: &[(String, String)],
    alternative: Alternative,
) -> Result<MinimalPairReport> {
    if dms.len() < 2 {
        return Err(Error::TooFewValues { needed: 2, got: dms.len() });
    }
    let shared: Vec<String> = dms[0]
        .1
        .labels()
        .iter()
        .filter(|l| dms.iter().all(|(_, dm)| dm.index_of(l).is_some()))
        .cloned()
        .collect();
    let n = shared.len();
    let idx = |l: &str| shared.iter().position(|s| s == l);
    let located = pairs
        .iter()
        .map(|(a, b)| match (idx(a), idx(b)) {
            (Some(i), Some(j)) if i != j => Ok((i.min(j), i.max(j))),
            _ => Err(Error::PairNotShared(a.clone(), b.clone())),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_dataset = Vec::with_capacity(dms.len());
    for (_, dm) in dms {
        let restricted = dm.restrict(&shared)?;
        let values: Vec<f64> = restricted.pair_values().iter().map(|v| v.as_f64()).collect();
        let ranks = average_ranks(&values);
        per_dataset.push(located.iter().map(|&(i, j)| ranks[strict_index(i, j, n)]).collect::<Vec<f64>>());
    }
    let pair_ranks = pairs
        .iter()
        .enumerate()
        .map(|(p, (a, b))| PairRanks { a: a.clone(), b: b.clone(), ranks: per_dataset.iter().map(|r| r[p]).collect() })
        .collect();
    let comparisons = (1..dms.len())
        .map(|d| {
            let diffs: Vec<f64> = per_dataset[0].iter().zip(&per_dataset[d]).map(|(x, y)| x - y).collect();
            let w = wilcoxon_signed_rank(&diffs, alternative);
            ComparisonResult {
                method_a: dms[0].0.clone(),
                method_b: dms[d].0.clone(),
                statistic: w.statistic,
                p_value: w.p_value,
                test: TestKind::WilcoxonSignedRank,
            }
        })
        .collect();
    Ok(MinimalPairReport {
        datasets: dms.iter().map(|(name, _)| name.clone()).collect(),
        shared,
        pairs: pair_ranks,
        comparisons,
    })
}

/// The five voicing minimal pairs.
pub fn voicing_pairs() -> Vec<(String, String)> {
    [("b", "p"), ("d", "t"), ("g", "k"), ("z", "s"), ("v", "f")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{hebrew_confusion, shepard_distance, shepard_similarity};
    use crate::evaluation::lopo::{FoldModel, FoldResult};
    use crate::inventory::{load_inventory, parse_feature_table, DatasetId, TheoryId};
    use crate::metric::Provenance;

    fn report(method: Method, rhos: &[f64]) -> EvaluationReport<f64> {
        let folds: Vec<FoldResult<f64>> = rhos
            .iter()
            .enumerate()
            .map(|(i, &rho)| FoldResult {
                left_out: format!("p{i}"),
                rho,
                selected_lambda: None,
                model: FoldModel::Baseline(method),
            })
            .collect();
        EvaluationReport { method, theory: "t".into(), mean_rho: mean(rhos), sd_rho: sample_sd(rhos), folds }
    }

    #[test]
    fn compare_identical_reports() {
        let a = report(Method::Uniform, &[0.1, 0.5, 0.3, 0.9]);
        let c = compare_methods(&a, &a).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
        assert_eq!(c.test, TestKind::PairedTTwoTailed);
    }

    #[test]
    fn compare_rejects_mismatched_folds() {
        let a = report(Method::Uniform, &[0.1, 0.5, 0.3]);
        let mut b = report(Method::Pmv, &[0.2, 0.4, 0.3]);
        b.folds.swap(0, 1);
        assert!(matches!(compare_methods(&a, &b), Err(Error::MismatchedFolds)));
    }

    #[test]
    fn saliency_conventions() {
        let inv = load_inventory(TheoryId::Phonological, DatasetId::Hebrew);
        let w: Vec<f64> = (0..inv.n_features()).map(|k| k as f64).collect();
        let m = MetricModel::diagonal(inv.theory().clone(), w.clone(), Provenance::new(Method::LsDiag)).unwrap();
        let s = feature_saliency(&[&m, &m]).unwrap();
        assert_eq!(s.mean, w);
        assert!(s.sd.iter().all(|&x| x == 0.0));
        assert_eq!(s.rank_of(&inv.theory().feature_names()[inv.n_features() - 1]), Some(1));
        let single = feature_saliency(&[&m]).unwrap();
        assert!(single.sd.iter().all(|&x| x == 0.0));
        let full = MetricModel::full_projected(inv.theory().clone(), &m.matrix(), Provenance::new(Method::Ls)).unwrap();
        assert!(matches!(feature_saliency(&[&m, &full]), Err(Error::MixedModels)));
    }

    #[test]
    fn normalized_weights_scale_invariant() {
        let a = SaliencyReport { theory: "t".into(), features: vec!["x".into(), "y".into()], mean: vec![1.0, 3.0], sd: vec![0.0; 2], n_models: 1 };
        let b = SaliencyReport { mean: vec![10.0, 30.0], ..a.clone() };
        let rows = normalized_weight_comparison(&a, &b).unwrap();
        for r in &rows {
            assert!((r.a - r.b).abs() < 1e-15);
        }
        assert_eq!(rows[1].a, 0.75);
        let zero = SaliencyReport { mean: vec![0.0, 0.0], ..a.clone() };
        assert!(matches!(normalized_weight_comparison(&a, &zero), Err(Error::ZeroTotalWeight)));
    }

    #[test]
    fn minimal_pairs_identical_datasets() {
        let dm = shepard_distance(&shepard_similarity(&hebrew_confusion(), 0.0f64).unwrap()).unwrap();
        let dms = vec![("hebrew".to_string(), dm.clone()), ("copy".to_string(), dm)];
        let r = minimal_pair_analysis(&dms, &voicing_pairs(), Alternative::TwoSided).unwrap();
        assert_eq!(r.comparisons[0].p_value, 1.0);
        assert_eq!(r.comparisons[0].statistic, 0.0);
        assert_eq!(r.pairs.len(), 5);
        assert!(r.to_csv().starts_with("pair,hebrew,copy\n"));
    }

    #[test]
    fn minimal_pairs_one_sided_exact() {
        // Four phonemes; dataset A ranks the three listed pairs strictly
        // higher than dataset B does.
        let labels: Vec<String> = ["d", "t", "g", "k"].iter().map(|s| s.to_string()).collect();
        let a = DistanceMatrix::from_fn(labels.clone(), |i, j| [6.0, 1.0, 2.0, 3.0, 4.0, 5.0][strict_index(i, j, 4)]);
        let b = DistanceMatrix::from_fn(labels, |i, j| [1.0, 4.0, 5.0, 6.0, 2.0, 3.0][strict_index(i, j, 4)]);
        let pairs: Vec<(String, String)> = [("d", "t"), ("g", "k"), ("t", "k")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
        let r = minimal_pair_analysis(&[("A".into(), a), ("B".into(), b)], &pairs, Alternative::Greater).unwrap();
        for p in &r.pairs {
            assert!(p.ranks[0] > p.ranks[1], "{p:?}");
        }
        // All three differences positive: only 1 of 2³ sign assignments is as extreme.
        assert_eq!(r.comparisons[0].p_value, 1.0 / 8.0);
    }

    #[test]
    fn minimal_pairs_missing_pair() {
        let dm = shepard_distance(&shepard_similarity(&hebrew_confusion(), 0.0f64).unwrap()).unwrap();
        let pairs = vec![("b".to_string(), "T".to_string())];
        let dms = vec![("a".to_string(), dm.clone()), ("b".to_string(), dm)];
        assert!(matches!(minimal_pair_analysis(&dms, &pairs, Alternative::TwoSided), Err(Error::PairNotShared(..))));
    }

    #[test]
    fn ablation_finds_the_signal_feature_and_ignores_a_duplicate() {
        // Eight phonemes over three independent features plus a copy of f2.
        let mut text = String::from("phoneme,f0,f1,f2,f2copy\n");
        for i in 0..8 {
            let bits = [i & 1, i >> 1 & 1, i >> 2 & 1];
            text += &format!("x{i},{},{},{},{}\n", bits[0], bits[1], bits[2], bits[2]);
        }
        let inv = parse_feature_table(&text, "toy").unwrap();
        let w = vec![5.0, 1.0, 0.5, 0.0];
        let truth = MetricModel::diagonal(inv.theory().clone(), w, Provenance::new(Method::LsDiag)).unwrap();
        let dm = truth.distances(&inv).unwrap();
        let entries = ablate_features(&inv, &dm, &SolverConfig::default()).unwrap();
        assert_eq!(entries.last().unwrap().feature, "f0");
        for e in &entries {
            if e.feature.starts_with("f2") {
                assert!(e.delta.abs() < 1e-9, "{e:?}");
            }
        }
        assert!(ablation_csv(&entries).starts_with("feature,delta_mean_rho\n"));
    }
}
