//! Gauss–Hermite rules.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Nodes and weights of the `n`-point rule for weight `e^{-x²}`, nodes
/// ascending. Newton iteration on the normalized Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let pim4 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => math::sqrt(2.0 * nf + 1.0) - 1.855_75 * math::pow(2.0 * nf + 1.0, -1.0 / 6.0),
            1 => z - 1.14 * math::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * math::sqrt(2.0 / (jf + 1.0)) * p2 - math::sqrt(jf / (jf + 1.0)) * p3;
            }
            dp = math::sqrt(2.0 * nf) * p2;
            let step = p1 / dp;
            z -= step;
            if math::abs(step) <= 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (dp * dp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_moments() {
        let (x, w) = gauss_hermite(15);
        let m = |k: i32| x.iter().zip(&w).map(|(a, b)| b * a.powi(k)).sum::<f64>();
        let sqrt_pi = core::f64::consts::PI.sqrt();
        assert!((m(0) - sqrt_pi).abs() < 1e-13);
        assert!(m(1).abs() < 1e-13);
        assert!((m(2) - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((m(8) - 105.0 / 16.0 * sqrt_pi).abs() < 1e-11);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn one_point_rule() {
        let (x, w) = gauss_hermite(1);
        assert_eq!(x[0], 0.0);
        assert!((w[0] - core::f64::consts::PI.sqrt()).abs() < 1e-14);
    }
}
