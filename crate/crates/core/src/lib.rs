//! Learning quadratic feature metrics from phoneme confusion data.

pub mod baselines;
pub mod cli;
pub mod distances;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod inventory;
pub mod method;
pub mod metric;
pub mod packed;
pub mod scalar;
pub mod solvers;
pub mod svg;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DistanceMatrixF64 = distances::DistanceMatrix<f64>;
pub type DistanceMatrixF32 = distances::DistanceMatrix<f32>;
pub type SimilarityMatrixF64 = distances::SimilarityMatrix<f64>;
pub type SimilarityMatrixF32 = distances::SimilarityMatrix<f32>;
pub type MetricModelF64 = metric::MetricModel<f64>;
pub type MetricModelF32 = metric::MetricModel<f32>;
pub type EmbeddingF64 = embedding::Embedding<f64>;
pub type EmbeddingF32 = embedding::Embedding<f32>;
pub type EvaluationReportF64 = evaluation::EvaluationReport<f64>;
