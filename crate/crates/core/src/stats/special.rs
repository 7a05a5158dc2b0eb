//! Distribution tails used for p-values.

use crate::math;

/// Relative convergence tolerance of the incomplete beta continued fraction.
pub const BETA_CF_TOLERANCE: f64 = 1e-10;
const BETA_CF_MAX_TERMS: usize = 10_000;
const TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    math::ln_gamma(a) + math::ln_gamma(b) - math::ln_gamma(a + b)
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// Continued fraction evaluated with the modified Lentz method, switching to
/// the complementary form when x lies past the mean so the fraction converges fast.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * math::ln(x) + b * math::ln(1.0 - x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        math::exp(ln_front) * beta_fraction(a, b, x) / a
    } else {
        1.0 - math::exp(ln_front) * beta_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if math::abs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_TERMS {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if math::abs(delta - 1.0) < BETA_CF_TOLERANCE {
            break;
        }
    }
    h
}

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// P(|Z| >= |z|) for a standard normal.
pub fn normal_two_tailed(z: f64) -> f64 {
    math::erfc(math::abs(z) / core::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x ; I_x(2, 1) = x^2 ; I_x(1, 3) = 1 - (1 - x)^3
        for &x in &[0.05, 0.3, 0.5, 0.77, 0.99] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x) - x).abs() < 1e-12);
            assert!((regularized_incomplete_beta(2.0, 1.0, x) - x * x).abs() < 1e-12);
            let c = 1.0 - (1.0 - x) * (1.0 - x) * (1.0 - x);
            assert!((regularized_incomplete_beta(1.0, 3.0, x) - c).abs() < 1e-12);
        }
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
    }

    #[test]
    fn incomplete_beta_symmetry() {
        for &(a, b, x) in &[(2.5, 0.5, 0.3), (10.0, 0.5, 0.9), (0.7, 4.0, 0.2)] {
            let lhs = regularized_incomplete_beta(a, b, x);
            let rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
            assert!((lhs - rhs).abs() < 1e-11, "{a} {b} {x}");
        }
    }

    #[test]
    fn t_tail_landmarks() {
        // df = 1 is Cauchy: P(|T| > 1) = 1/2
        assert!((student_t_two_tailed(1.0, 1.0) - 0.5).abs() < 1e-12);
        // df = 2 has closed form 1 - t / sqrt(2 + t^2)
        let t: f64 = 1.7;
        let exact = 1.0 - t / (2.0 + t * t).sqrt();
        assert!((student_t_two_tailed(t, 2.0) - exact).abs() < 1e-12);
        assert_eq!(student_t_two_tailed(0.0, 9.0), 1.0);
    }

    #[test]
    fn normal_tail_landmarks() {
        assert_eq!(normal_two_tailed(0.0), 1.0);
        assert!((normal_two_tailed(1.959963984540054) - 0.05).abs() < 1e-12);
        assert!((normal_two_tailed(-2.5758293035489) - 0.01).abs() < 1e-12);
    }
}
