//! Evaluation harness: dataset ingestion, context strategies (abstraction
//! and raw-code baselines), similarity scoring, metric computation, and the
//! resumable experiment grid.

mod context;
mod dataset;
mod grid;
mod metrics;
pub mod similarity;

use thiserror::Error;

pub use context::{
    build_context, build_context_with_quota, sample_units, ContextKind, ContextResult,
    ContextStrategy, BASELINE_DEPTH, BASELINE_QUOTA,
};
pub use dataset::{load_dataset, load_dataset_str, CalleeRecord, Label, SampleRecord};
pub use grid::{format_table, run_grid, CellResult, EvalRun, RunConfig, VerdictCacheEntry};
pub use metrics::{score, ConfusionMatrix, MetricsReport, Prediction};
pub use similarity::{
    called_names, jaccard, levenshtein, similarity_score, tokenize, Bm25, Similarity,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset schema error at line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("no predictions to score")]
    EmptyInput,
    #[error("empty evaluation grid: {0}")]
    EmptyGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
