//! Numerical statistics: ranks, correlations, least squares, VIF and GLMs.

mod correlation;
mod glm;
mod heatmap;
mod linalg;
mod model;
mod ols;
mod rank;

pub use correlation::{
    partial_spearman, pearson, pearson_r, spearman, spearman_exact_p, t_test_p, CorrelationMethod,
    CorrelationResult,
};
pub use glm::{glm_fit, nb_log_likelihood, Dispersion, GlmOptions, FALLBACK_ALPHA, LOG_ALPHA_RANGE};
pub use heatmap::{correlation_heatmap, Heatmap};
pub use model::{Design, Family, Link, ModelFit, Z_95};
pub use ols::{ols_fit, ols_with_residuals, vif, VifEntry};
pub use rank::{iqr_bounds, quantile_sorted, rank, Fences};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("need at least {needed} predictors, got {got}")]
    TooFewPredictors { needed: usize, got: usize },
    #[error("design is rank deficient at column `{column}`")]
    RankDeficient { column: String },
    #[error("control variables are collinear at `{column}`")]
    CollinearControls { column: String },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("negative binomial response must be a non-negative integer (index {index}: {value})")]
    NonCountResponse { index: usize, value: f64 },
    #[error("exact permutation test limited to n <= 10, got {n}")]
    TooManyForExact { n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
