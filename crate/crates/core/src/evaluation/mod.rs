//! Leave-one-phoneme-out scoring, method comparison and the cross-language
//! analyses.

mod analysis;
mod lopo;
mod stats;

pub use analysis::{
    ablate_features, ablation_csv, compare_methods, feature_saliency, minimal_pair_analysis,
    normalized_weight_comparison, normalized_weights_csv, voicing_pairs, AblationEntry, ComparisonResult,
    MinimalPairReport, NormalizedWeight, PairRanks, SaliencyReport,
};
pub use lopo::{fit_method, lopo_evaluate, select_lambda, EvaluationReport, FoldModel, FoldResult};
pub use stats::{
    average_ranks, mean, paired_t_test, sample_sd, spearman, t_two_tailed_p, wilcoxon_signed_rank, Alternative,
    TestKind, WilcoxonResult, WILCOXON_EXACT_MAX,
};
