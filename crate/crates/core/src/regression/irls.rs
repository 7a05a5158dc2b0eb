use alloc::vec;
use alloc::vec::Vec;

use super::linalg::Cholesky;
use super::{Convergence, DesignMatrix, FitError, FitResult, FitStatus, TermEstimate};
use crate::math;

/// Largest admissible |coefficient| on standardized predictors.
pub const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Clone, Copy)]
pub struct IrlsOptions {
    pub max_iterations: usize,
    pub deviance_tolerance: f64,
    pub gradient_tolerance: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            deviance_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
        }
    }
}

/// Bernoulli log-likelihood at `beta`.
pub fn logistic_log_likelihood(design: &DesignMatrix, beta: &[f64]) -> f64 {
    design
        .linear_predictor(beta)
        .iter()
        .zip(&design.y)
        .map(|(&eta, &y)| y * eta - math::softplus(eta))
        .sum()
}

/// Gradient of [`logistic_log_likelihood`] with respect to `beta`.
pub fn logistic_score(design: &DesignMatrix, beta: &[f64]) -> Vec<f64> {
    let p = design.n_fixed();
    let mut g = vec![0.0; p];
    for (i, eta) in design.linear_predictor(beta).into_iter().enumerate() {
        let r = design.y[i] - math::logistic(eta);
        for (gk, xk) in g.iter_mut().zip(design.row(i)) {
            *gk += r * xk;
        }
    }
    g
}

fn information(design: &DesignMatrix, beta: &[f64]) -> Result<Vec<f64>, FitError> {
    let p = design.n_fixed();
    let mut h = vec![0.0; p * p];
    for (i, eta) in design.linear_predictor(beta).into_iter().enumerate() {
        let mu = math::logistic(eta);
        let w = mu * (1.0 - mu);
        if !w.is_finite() {
            return Err(FitError::Numerical("non-finite working weight"));
        }
        let x = design.row(i);
        for a in 0..p {
            for b in 0..=a {
                h[a * p + b] += w * x[a] * x[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            h[b * p + a] = h[a * p + b];
        }
    }
    Ok(h)
}

fn check_separation(design: &DesignMatrix, beta: &[f64]) -> Result<(), FitError> {
    match beta.iter().enumerate().find(|(_, b)| math::abs(**b) > SEPARATION_BOUND) {
        Some((k, &value)) => Err(FitError::Separation {
            term: design.term_names[k].clone(),
            value,
        }),
        None => Ok(()),
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(math::abs(*x)))
}

/// Maximum-likelihood logistic regression on the fixed-effect columns only.
pub fn fit_logistic_irls(design: &DesignMatrix, options: &IrlsOptions) -> Result<FitResult, FitError> {
    let p = design.n_fixed();
    if design.n_rows() == 0 {
        return Err(FitError::NoRows(design.age_months));
    }
    let mut beta = vec![0.0; p];
    let mut ll = logistic_log_likelihood(design, &beta);
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    let mut status = FitStatus::NotConverged;
    let mut gnorm;

    loop {
        let g = logistic_score(design, &beta);
        gnorm = inf_norm(&g);
        if !gnorm.is_finite() {
            return Err(FitError::Numerical("non-finite gradient"));
        }
        if gnorm < options.gradient_tolerance && (iterations == 0 || last_change < options.deviance_tolerance) {
            status = FitStatus::Converged;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        let h = information(design, &beta)?;
        let chol = Cholesky::factor(h, p).ok_or(FitError::Numerical("singular information matrix"))?;
        let step = chol.solve(&g);

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + scale * s).collect();
            let trial_ll = logistic_log_likelihood(design, &trial);
            if trial_ll.is_finite() && trial_ll >= ll - super::glmm::rounding(ll) {
                accepted = Some((trial, trial_ll));
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        let Some((next, next_ll)) = accepted else {
            // No ascent possible at machine precision; treat as converged if the
            // gradient is already negligible.
            if gnorm < options.gradient_tolerance {
                status = FitStatus::Converged;
            }
            break;
        };
        check_separation(design, &next)?;
        last_change = math::abs(next_ll - ll) / (math::abs(next_ll) + 0.1);
        beta = next;
        ll = next_ll;
    }

    let h = information(design, &beta)?;
    let chol = Cholesky::factor(h, p).ok_or(FitError::Numerical("singular information matrix"))?;
    let cov = chol.inverse_trailing(p);
    let terms = design
        .term_names
        .iter()
        .enumerate()
        .map(|(k, name)| TermEstimate::new(name.clone(), beta[k], math::sqrt(cov[k * p + k])))
        .collect();
    Ok(FitResult {
        terms,
        variance_child: None,
        variance_word: None,
        log_likelihood: ll,
        convergence: Convergence {
            status,
            iterations,
            gradient_norm: gnorm,
        },
        child_modes: Vec::new(),
        word_modes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};

    fn intercept_only(ones: usize, zeros: usize) -> DesignMatrix {
        let n = ones + zeros;
        let y = (0..n).map(|i| if i < ones { 1.0 } else { 0.0 }).collect();
        DesignMatrix::from_parts(vec![1.0; n], vec!["(Intercept)".to_string()], y, vec![0; n], vec![0; n]).unwrap()
    }

    #[test]
    fn balanced_intercept_is_zero() {
        let fit = fit_logistic_irls(&intercept_only(20, 20), &IrlsOptions::default()).unwrap();
        assert_eq!(fit.terms[0].estimate, 0.0);
        assert!(fit.convergence.status.is_converged());
    }

    #[test]
    fn intercept_is_logit_of_base_rate() {
        let fit = fit_logistic_irls(&intercept_only(30, 10), &IrlsOptions::default()).unwrap();
        assert!((fit.terms[0].estimate - math::ln(3.0)).abs() < 1e-10);
        // Var = 1 / (n p (1 - p))
        let se = 1.0 / (40.0f64 * 0.75 * 0.25).sqrt();
        assert!((fit.terms[0].std_error - se).abs() < 1e-10);
    }

    #[test]
    fn separation_detected() {
        let x: Vec<f64> = (0..20).flat_map(|i| [1.0, i as f64 - 9.5]).collect();
        let y = (0..20).map(|i| if i >= 10 { 1.0 } else { 0.0 }).collect();
        let names: Vec<String> = vec!["(Intercept)".into(), "x".into()];
        let d = DesignMatrix::from_parts(x, names, y, vec![0; 20], vec![0; 20]).unwrap();
        assert!(matches!(fit_logistic_irls(&d, &IrlsOptions::default()), Err(FitError::Separation { .. })));
    }
}
