//! Adaptive Gauss–Hermite marginal likelihood for logistic regression with a
//! single random intercept, maximized by a local Nelder–Mead.

/// Physicists' Gauss–Hermite nodes and weights (weight function e^{-x²}) by
/// Golub–Welsch: eigen-decomposition of the Jacobi matrix with cyclic Jacobi
/// rotations.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![vec![0.0; n]; n];
    for i in 1..n {
        let off = (i as f64 / 2.0).sqrt();
        a[i][i - 1] = off;
        a[i - 1][i] = off;
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (a[i][i], std::f64::consts::PI.sqrt() * v[0][i] * v[0][i])).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs.into_iter().unzip()
}

pub struct GroupedData {
    /// Rows of covariates, each including the intercept column.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub group: Vec<usize>,
    pub n_groups: usize,
}

fn log1pexp(e: f64) -> f64 {
    if e > 0.0 {
        e + (-e).exp().ln_1p()
    } else {
        e.exp().ln_1p()
    }
}

/// log ∫ Π p(y | η + σ b) φ(b) db per group, summed.
pub fn marginal_loglik(data: &GroupedData, beta: &[f64], sigma: f64, n_nodes: usize) -> f64 {
    let (nodes, weights) = gauss_hermite(n_nodes);
    let mut total = 0.0;
    for g in 0..data.n_groups {
        let rows: Vec<usize> = (0..data.y.len()).filter(|&i| data.group[i] == g).collect();
        let fixed: Vec<f64> = rows
            .iter()
            .map(|&i| data.x[i].iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect();
        let h = |b: f64| -> f64 {
            let mut s = -0.5 * b * b - 0.5 * (2.0 * std::f64::consts::PI).ln();
            for (k, &i) in rows.iter().enumerate() {
                let e = fixed[k] + sigma * b;
                s += data.y[i] * e - log1pexp(e);
            }
            s
        };
        // Mode by Newton with step halving (h is strictly concave), then the
        // curvature at the mode.
        let derivs = |b: f64| -> (f64, f64) {
            let mut grad = -b;
            let mut curv = 1.0;
            for (k, &i) in rows.iter().enumerate() {
                let mu = 1.0 / (1.0 + (-(fixed[k] + sigma * b)).exp());
                grad += sigma * (data.y[i] - mu);
                curv += sigma * sigma * mu * (1.0 - mu);
            }
            (grad, curv)
        };
        let mut b = 0.0;
        for _ in 0..500 {
            let (grad, curv) = derivs(b);
            let mut step = grad / curv;
            let here = h(b);
            while h(b + step) < here && step.abs() > 1e-300 {
                step *= 0.5;
            }
            b += step;
            if step.abs() < 1e-14 * b.abs().max(1.0) {
                break;
            }
        }
        let curv = derivs(b).1;
        let s = 1.0 / curv.sqrt();
        let hb = h(b);
        let sum: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(z, w)| {
                let t = b + std::f64::consts::SQRT_2 * s * z;
                w * (z * z).exp() * (h(t) - hb).exp()
            })
            .sum();
        total += hb + (std::f64::consts::SQRT_2 * s * sum).ln();
    }
    total
}

/// Plain Nelder–Mead minimizer, unconstrained.
pub fn minimize(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut fs: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..max_iter {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap());
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        fs = idx.iter().map(|&i| fs[i]).collect();
        if (fs[n] - fs[0]).abs() < tol {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < fs[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                fs[n] = fe;
            } else {
                simplex[n] = xr;
                fs[n] = fr;
            }
        } else if fr < fs[n - 1] {
            simplex[n] = xr;
            fs[n] = fr;
        } else {
            let xc = if fr < fs[n] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < fs[n].min(fr) {
                simplex[n] = xc;
                fs[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    fs[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap()).unwrap();
    simplex[best].clone()
}

/// Maximum marginal likelihood over (β, log σ); restarts until stable.
pub fn fit(data: &GroupedData, n_nodes: usize) -> (Vec<f64>, f64) {
    let p = data.x[0].len();
    let objective = |v: &[f64]| -marginal_loglik(data, &v[..p], v[p].exp(), n_nodes);
    let mut x = vec![0.0; p + 1];
    let mut step = 0.5;
    for _ in 0..8 {
        x = minimize(&objective, &x, step, 1e-14, 20_000);
        step *= 0.3;
    }
    let sigma = x[p].exp();
    x.truncate(p);
    (x, sigma)
}
