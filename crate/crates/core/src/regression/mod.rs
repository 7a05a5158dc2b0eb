//! Logistic regression of word production on standardized predictors:
//! plain IRLS for fixed effects and a Laplace-approximated GLMM with crossed
//! random intercepts for child and word.

mod design;
mod glmm;
mod irls;
mod items;
pub mod linalg;
pub mod optim;
pub mod quadrature;
mod wald;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use design::{build_design, DesignMatrix, ModelSpec, INTERCEPT};
pub use glmm::{
    fit_glmm_laplace, fit_glmm_laplace_with, laplace_log_likelihood, marginal_log_likelihood, penalized_gradient,
    penalized_objective, GlmmOptions,
};
pub use irls::{fit_logistic_irls, logistic_log_likelihood, logistic_score, IrlsOptions, SEPARATION_BOUND};
pub use items::{item_prediction_error, predict, ItemError, ItemErrorReport};
pub use wald::{wald, wald_inference, WaldSummary, Z_975};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("model has no predictors")]
    EmptyModel,
    #[error("predictor table has no rows for age {0}")]
    AgeNotInTable(u32),
    #[error("no complete observations at age {0}")]
    NoRows(u32),
    #[error("predictor {0} is constant over the retained rows")]
    ConstantPredictor(String),
    #[error("design is inconsistent: {0}")]
    InvalidDesign(&'static str),
    #[error("random factor {factor} has {levels} level(s); at least 2 needed")]
    TooFewLevels { factor: &'static str, levels: usize },
    #[error("complete separation suspected: |{term}| = {value:.3} exceeds the bound")]
    Separation { term: String, value: f64 },
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
    #[error("fit did not converge")]
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    /// Converged with at least one variance component estimated at zero.
    ConvergedAtBoundary,
    NotConverged,
}

impl FitStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::ConvergedAtBoundary => "converged-boundary",
            Self::NotConverged => "not-converged",
        }
    }

    pub fn is_converged(self) -> bool {
        !matches!(self, Self::NotConverged)
    }
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub status: FitStatus,
    /// IRLS iterations, or objective evaluations of the outer GLMM search.
    pub iterations: usize,
    /// Infinity norm of the final (inner) gradient.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermEstimate {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TermEstimate {
    pub fn new(term: String, estimate: f64, std_error: f64) -> Self {
        let w = wald(estimate, std_error);
        Self {
            term,
            estimate,
            std_error,
            z: w.z,
            p: w.p,
            ci_low: w.ci_low,
            ci_high: w.ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub terms: Vec<TermEstimate>,
    /// Random-intercept variances; `None` when the factor is not in the model.
    pub variance_child: Option<f64>,
    pub variance_word: Option<f64>,
    /// Log-likelihood (Laplace approximation for mixed models).
    pub log_likelihood: f64,
    pub convergence: Convergence,
    /// Conditional modes of the child intercepts, on the linear-predictor scale.
    pub child_modes: Vec<f64>,
    /// Conditional modes of the word intercepts, on the linear-predictor scale.
    pub word_modes: Vec<f64>,
}

impl FitResult {
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.estimate).collect()
    }
}
