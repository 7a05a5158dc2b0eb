use alloc::vec::Vec;

use super::{FitError, FitResult};
use crate::stats::normal_two_tailed;

/// 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldSummary {
    pub z: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn wald(estimate: f64, std_error: f64) -> WaldSummary {
    let z = estimate / std_error;
    WaldSummary {
        z,
        p: normal_two_tailed(z),
        ci_low: estimate - Z_975 * std_error,
        ci_high: estimate + Z_975 * std_error,
    }
}

/// Wald z tests and 95% intervals for every fixed-effect term of a converged fit.
pub fn wald_inference(fit: &FitResult) -> Result<Vec<WaldSummary>, FitError> {
    if !fit.convergence.status.is_converged() {
        return Err(FitError::NotConverged);
    }
    Ok(fit.terms.iter().map(|t| wald(t.estimate, t.std_error)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_estimate() {
        let w = wald(0.0, 1.0);
        assert_eq!(w.z, 0.0);
        assert_eq!(w.p, 1.0);
        assert!((w.ci_low + 1.96).abs() < 1e-4 && (w.ci_high - 1.96).abs() < 1e-4);
    }

    #[test]
    fn two_sigma_is_five_percent() {
        assert!((wald(1.96, 1.0).p - 0.05).abs() < 1e-4);
        assert!((wald(Z_975, 1.0).p - 0.05).abs() < 1e-12);
    }
}
