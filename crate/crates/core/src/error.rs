use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // inventory
    #[error("invalid feature theory: {0}")]
    InvalidTheory(String),
    #[error("feature table line {line}: expected {expected} cells, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("feature table line {line}, column '{column}': non-binary cell '{value}'")]
    NonBinaryCell { line: usize, column: String, value: String },
    #[error("line {line}: duplicate phoneme label '{label}'")]
    DuplicateLabel { line: usize, label: String },
    #[error("duplicate feature vector: '{first}' and '{second}' share all features")]
    DuplicateFeatureVector { first: String, second: String },
    #[error("inventory needs at least 2 phonemes, got {0}")]
    TooFewPhonemes(usize),
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("empty table")]
    EmptyTable,

    // confusion / distances
    #[error("confusion matrix is not square: {rows} rows for {columns} labels")]
    NonSquare { rows: usize, columns: usize },
    #[error("line {line}, column '{column}': invalid count '{value}' (expected a nonnegative integer)")]
    InvalidCount { line: usize, column: String, value: String },
    #[error("line {line}: invalid number '{value}'")]
    InvalidNumber { line: usize, value: String },
    #[error("zero diagonal count for '{0}'")]
    ZeroDiagonal(String),
    #[error("row label '{row}' does not match header label '{header}' at position {position}")]
    LabelMismatch { position: usize, row: String, header: String },
    #[error("zero similarity for {} pair(s) ({}); rerun with a positive smoothing, e.g. 0.5", .0.len(), format_pairs(.0))]
    ZeroSimilarity(Vec<(String, String)>),
    #[error("nonpositive similarity {value} for pair ({a}, {b})")]
    NonPositiveSimilarity { a: String, b: String, value: f64 },
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    AsymmetricDistances(String, String),
    #[error("distance matrix has nonzero diagonal at '{0}'")]
    NonZeroDiagonal(String),
    #[error("unknown phoneme label '{0}'")]
    UnknownLabel(String),
    #[error("label sets differ: {0}")]
    LabelSetMismatch(String),
    #[error("invalid smoothing {0}; must be finite and >= 0")]
    InvalidSmoothing(f64),

    // metric
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },
    #[error("design kind {design} does not match method {method}")]
    KindMismatch { design: String, method: String },

    // solvers
    #[error("coordinate descent did not converge after {sweeps} sweeps (max KKT violation {kkt_violation:e})")]
    NotConverged { sweeps: usize, kkt_violation: f64 },
    #[error("no valid triplet: every anchor has all-equal distances")]
    NoValidTriplet,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    // baselines
    #[error("natural-class enumeration supports at most {max} features and 64 phonemes (got {features} features, {phonemes} phonemes)")]
    EnumerationBound { features: usize, phonemes: usize, max: usize },
    #[error("phoneme '{0}' has no PMV mapping")]
    UnmappedPhoneme(String),

    // evaluation
    #[error("fold for '{phoneme}' has {pairs} test pairs; at least 3 are required")]
    FoldTooSmall { phoneme: String, pairs: usize },
    #[error("fold '{phoneme}': {source}")]
    Fold {
        phoneme: String,
        #[source]
        source: Box<Error>,
    },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("constant vector has no rank correlation")]
    ConstantVector,
    #[error("reports have mismatched folds")]
    MismatchedFolds,
    #[error("degenerate test: all paired differences are equal and nonzero")]
    DegenerateTest,
    #[error("saliency needs diagonal models of a single theory")]
    MixedModels,
    #[error("reports use different feature theories")]
    TheoryMismatch,
    #[error("total weight is zero; cannot normalize")]
    ZeroTotalWeight,
    #[error("pair ({0}, {1}) is not in the shared phoneme subset")]
    PairNotShared(String, String),
    #[error("invalid embedding dimension {dims} for {phonemes} phonemes")]
    InvalidDimensions { dims: usize, phonemes: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for numerical failures (as opposed to bad input data).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::EigenNotConverged { .. } | Error::NotConverged { .. } => true,
            Error::Fold { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect::<Vec<_>>()
        .join(", ")
}
