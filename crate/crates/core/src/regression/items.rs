use alloc::vec;
use alloc::vec::Vec;

use super::{DesignMatrix, FitError, FitResult};
use crate::math;
use crate::stats::{correlation_cell, CorrelationReport, Grouping};

/// Per-word calibration of a fit: mean of (predicted − observed).
#[derive(Debug, Clone, PartialEq)]
pub struct ItemError {
    /// Lexicon index.
    pub word_index: usize,
    pub n_rows: usize,
    /// Predictions include the conditional random-effect modes.
    pub mean_error: f64,
    /// Predictions from the fixed effects alone.
    pub mean_error_fixed: f64,
    pub mcdip: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemErrorReport {
    pub age_months: u32,
    pub items: Vec<ItemError>,
    /// pearson(mean_error, MCDIp) over the items.
    pub correlation: CorrelationReport,
}

const P_MIN: f64 = f64::MIN_POSITIVE;
const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

fn eta(fit: &FitResult, design: &DesignMatrix, with_modes: bool) -> Result<Vec<f64>, FitError> {
    let beta = fit.coefficients();
    if beta.len() != design.n_fixed() {
        return Err(FitError::InvalidDesign("fit and design disagree on the fixed effects"));
    }
    let mut eta = design.linear_predictor(&beta);
    if with_modes {
        let child = &fit.child_modes;
        let word = &fit.word_modes;
        if (!child.is_empty() && child.len() != design.n_children()) || (!word.is_empty() && word.len() != design.n_words()) {
            return Err(FitError::InvalidDesign("fit and design disagree on the random-effect levels"));
        }
        for (i, e) in eta.iter_mut().enumerate() {
            *e += child.get(design.child[i]).copied().unwrap_or(0.0) + word.get(design.word[i]).copied().unwrap_or(0.0);
        }
    }
    Ok(eta)
}

/// Predicted production probabilities per design row, strictly inside (0, 1).
pub fn predict(fit: &FitResult, design: &DesignMatrix, with_modes: bool) -> Result<Vec<f64>, FitError> {
    Ok(eta(fit, design, with_modes)?
        .into_iter()
        .map(|e| math::logistic(e).clamp(P_MIN, P_MAX))
        .collect())
}

/// Mean prediction error per word; positive means over-prediction.
/// `mcdip_row` is indexed by lexicon index.
pub fn item_prediction_error(fit: &FitResult, design: &DesignMatrix, mcdip_row: &[f64]) -> Result<ItemErrorReport, FitError> {
    if !fit.convergence.status.is_converged() {
        return Err(FitError::NotConverged);
    }
    if design.word_lexicon.iter().any(|&w| w >= mcdip_row.len()) {
        return Err(FitError::InvalidDesign("MCDIp row is shorter than the lexicon"));
    }
    let full = predict(fit, design, true)?;
    let fixed = predict(fit, design, false)?;
    let q = design.n_words();
    let mut n = vec![0usize; q];
    let mut sum = vec![0.0; q];
    let mut sum_fixed = vec![0.0; q];
    for i in 0..design.n_rows() {
        let w = design.word[i];
        n[w] += 1;
        sum[w] += full[i] - design.y[i];
        sum_fixed[w] += fixed[i] - design.y[i];
    }
    let items: Vec<ItemError> = (0..q)
        .filter(|&w| n[w] > 0)
        .map(|w| ItemError {
            word_index: design.word_lexicon[w],
            n_rows: n[w],
            mean_error: sum[w] / n[w] as f64,
            mean_error_fixed: sum_fixed[w] / n[w] as f64,
            mcdip: mcdip_row[design.word_lexicon[w]],
        })
        .collect();
    let errors: Vec<Option<f64>> = items.iter().map(|it| Some(it.mean_error)).collect();
    let mcdip: Vec<Option<f64>> = items.iter().map(|it| Some(it.mcdip)).collect();
    let correlation = correlation_cell(Grouping::All, design.age_months, "mean_error", "mcdip", &errors, &mcdip);
    Ok(ItemErrorReport {
        age_months: design.age_months,
        items,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{Convergence, FitStatus, TermEstimate};
    use alloc::string::ToString;

    fn forced_fit(intercept: f64) -> FitResult {
        FitResult {
            terms: vec![TermEstimate::new("(Intercept)".to_string(), intercept, 0.1)],
            variance_child: None,
            variance_word: None,
            log_likelihood: 0.0,
            convergence: Convergence {
                status: FitStatus::Converged,
                iterations: 0,
                gradient_norm: 0.0,
            },
            child_modes: Vec::new(),
            word_modes: Vec::new(),
        }
    }

    fn design(y: Vec<f64>) -> DesignMatrix {
        let n = y.len();
        let word = (0..n).map(|i| i % 3).collect();
        let child = (0..n).map(|i| i / 3).collect();
        DesignMatrix::from_parts(vec![1.0; n], vec!["(Intercept)".to_string()], y, child, word).unwrap()
    }

    #[test]
    fn all_zero_outcomes_at_even_odds() {
        let d = design(vec![0.0; 12]);
        let report = item_prediction_error(&forced_fit(0.0), &d, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(report.items.len(), 3);
        for it in &report.items {
            assert_eq!(it.mean_error, 0.5);
            assert_eq!(it.n_rows, 4);
        }
    }

    #[test]
    fn over_prediction_is_positive() {
        // Word 0 never produced, others always.
        let y = (0..12).map(|i| if i % 3 == 0 { 0.0 } else { 1.0 }).collect();
        let report = item_prediction_error(&forced_fit(1.0), &design(y), &[0.0, 1.0, 1.0]).unwrap();
        assert!(report.items[0].mean_error > 0.0);
        assert!(report.items[1].mean_error < 0.0);
    }

    #[test]
    fn probabilities_stay_open() {
        let d = design(vec![1.0; 6]);
        for b in [-1000.0, 1000.0] {
            for p in predict(&forced_fit(b), &d, true).unwrap() {
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }

    #[test]
    fn refuses_unconverged() {
        let mut fit = forced_fit(0.0);
        fit.convergence.status = FitStatus::NotConverged;
        assert_eq!(item_prediction_error(&fit, &design(vec![0.0; 6]), &[0.0; 3]), Err(FitError::NotConverged));
    }
}
