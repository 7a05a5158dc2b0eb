//! Derivative-free box-constrained minimization (Nelder–Mead with projection).

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop when the simplex's objective spread falls below this, relative to |f|.
    pub f_tolerance: f64,
    /// ...and its largest vertex distance from the best point falls below this.
    pub x_tolerance: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 500,
            f_tolerance: 1e-8,
            x_tolerance: 1e-6,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimize `f` over the box `[lower, upper]` starting at `x0`.
/// Non-finite objective values are treated as +inf.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], options: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut start = x0.to_vec();
    project(&mut start, lower, upper);
    let mut simplex: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..n {
        let mut v = start.clone();
        v[i] += options.initial_step;
        if v[i] > upper[i] {
            v[i] = start[i] - options.initial_step;
        }
        project(&mut v, lower, upper);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut converged = false;
    while evaluations < options.max_evaluations {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| math::abs(a - b))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= options.f_tolerance * (math::abs(values[0]) + options.f_tolerance)
            && size <= options.x_tolerance
        {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut p, lower, upper);
            p
        };

        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = along(0.5);
                let fc = eval(&c, &mut evaluations);
                (c, fc)
            } else {
                let c = along(-0.5);
                let fc = eval(&c, &mut evaluations);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = eval(&shrunk, &mut evaluations);
                    simplex[i] = shrunk;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        f: values[best],
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evaluations: 2000,
            x_tolerance: 1e-8,
            f_tolerance: 1e-14,
            initial_step: 0.5,
        };
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn respects_bounds() {
        let m = nelder_mead(|x| (x[0] + 3.0).powi(2), &[0.0], &[-1.0], &[2.0], &NelderMeadOptions::default());
        assert!((m.x[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let m = nelder_mead(|x| (x[0] - 0.7).powi(2) + 2.0, &[0.0], &[-8.0], &[3.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 0.7).abs() < 1e-5);
    }

    #[test]
    fn stops_at_evaluation_cap() {
        let opts = NelderMeadOptions {
            max_evaluations: 10,
            ..Default::default()
        };
        let m = nelder_mead(|x| x[0].powi(2) + x[1].powi(2), &[3.0, 3.0], &[-9.0; 2], &[9.0; 2], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 12);
    }
}
