//! Dense symmetric positive-definite factorization for the small blocks the
//! fitters solve with.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Lower Cholesky factor of an n x n row-major matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factor `a` (only the lower triangle is read). `None` if not positive definite.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= a[j * n + k] * a[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = math::sqrt(d);
            a[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= a[i * n + k] * a[j * n + k];
                }
                a[i * n + j] = s / d;
            }
            for k in j + 1..n {
                a[j * n + k] = 0.0;
            }
        }
        Some(Self { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * n + k] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// log det of the leading `k` x `k` block of A.
    pub fn log_det_leading(&self, k: usize) -> f64 {
        (0..k).map(|i| 2.0 * math::ln(self.l[i * self.n + i])).sum()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det_leading(self.n)
    }

    /// Trailing `k` x `k` block of A⁻¹, row-major.
    pub fn inverse_trailing(&self, k: usize) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; k * k];
        let mut e = vec![0.0; n];
        for j in 0..k {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[n - k + j] = 1.0;
            self.solve_in_place(&mut e);
            for i in 0..k {
                out[i * k + j] = e[n - k + i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd() -> Vec<f64> {
        alloc::vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]
    }

    #[test]
    fn solves_and_inverts() {
        let c = Cholesky::factor(spd(), 3).unwrap();
        let x = c.solve(&[1.0, 2.0, 3.0]);
        let a = spd();
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((ax - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let inv = c.inverse_trailing(3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        let tail = c.inverse_trailing(1);
        assert!((tail[0] - inv[8]).abs() < 1e-15);
    }

    #[test]
    fn log_det_matches_expansion() {
        let a = spd();
        let det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
            + a[2] * (a[3] * a[7] - a[4] * a[6]);
        let c = Cholesky::factor(a.clone(), 3).unwrap();
        assert!((c.log_det() - det.ln()).abs() < 1e-12);
        assert!((c.log_det_leading(1) - 4.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(Cholesky::factor(alloc::vec![1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
