use alloc::vec::Vec;

use super::special::student_t_two_tailed;
use super::StatsError;
use crate::math;

/// A Pearson r together with the number of pairs it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub n: usize,
}

/// Product-moment correlation of two complete series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientData { n, needed: 3 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Pearson r over the pairs where both members are present.
pub fn pearson_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    let r = pearson(&xs, &ys)?;
    Ok(Correlation { r, n: xs.len() })
}

/// Two-tailed p-value of r from `n` pairs via Student's t with n - 2 df.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub p: f64,
    /// |r| = 1, where t is infinite and p is 0 by convention.
    pub degenerate: bool,
}

pub fn pearson_pvalue(r: f64, n: usize) -> Result<PValue, StatsError> {
    if n < 3 {
        return Err(StatsError::InsufficientData { n, needed: 3 });
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(StatsError::InvalidCorrelation(r));
    }
    if math::abs(r) == 1.0 {
        return Ok(PValue {
            p: 0.0,
            degenerate: true,
        });
    }
    let df = (n - 2) as f64;
    let t = r * math::sqrt(df / (1.0 - r * r));
    Ok(PValue {
        p: student_t_two_tailed(t, df),
        degenerate: false,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n - 1) standard deviation.
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    math::sqrt(ss / (values.len() as f64 - 1.0))
}

/// Center and scale to mean 0, sample sd 1.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::InsufficientData {
            n: values.len(),
            needed: 2,
        });
    }
    let m = mean(values);
    let sd = sample_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Err(StatsError::ZeroVariance);
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}
