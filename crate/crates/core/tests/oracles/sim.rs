//! Simulated logistic data with known parameters.

use prokwo_core::regression::DesignMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn bernoulli<R: Rng>(rng: &mut R, eta: f64) -> f64 {
    if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) {
        1.0
    } else {
        0.0
    }
}

fn names(p: usize) -> Vec<String> {
    let mut out = vec!["(Intercept)".to_string()];
    out.extend((1..p).map(|k| format!("x{k}")));
    out
}

/// n independent rows, predictors N(0, 1), no grouping.
pub fn logistic<R: Rng>(rng: &mut R, n: usize, beta: &[f64]) -> DesignMatrix {
    let p = beta.len();
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = std::iter::once(1.0).chain((1..p).map(|_| normal(rng))).collect();
        let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
        y.push(bernoulli(rng, eta));
        x.extend(row);
    }
    DesignMatrix::from_parts(x, names(p), y, vec![0; n], vec![0; n]).unwrap()
}

/// `groups` levels of one random intercept with `per` rows each; the word
/// factor is a single dummy level.
pub fn single_factor<R: Rng>(rng: &mut R, groups: usize, per: usize, beta: &[f64], sigma: f64) -> DesignMatrix {
    let p = beta.len();
    let u: Vec<f64> = (0..groups).map(|_| sigma * normal(rng)).collect();
    let (mut x, mut y, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for (gi, ui) in u.iter().enumerate() {
        for _ in 0..per {
            let row: Vec<f64> = std::iter::once(1.0).chain((1..p).map(|_| normal(rng))).collect();
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + ui;
            y.push(bernoulli(rng, eta));
            x.extend(row);
            g.push(gi);
        }
    }
    let n = y.len();
    DesignMatrix::from_parts(x, names(p), y, g, vec![0; n]).unwrap()
}

/// Fully crossed children × words; predictors vary by word, as in the
/// production data.
pub fn crossed<R: Rng>(rng: &mut R, children: usize, words: usize, beta: &[f64], sigma: [f64; 2]) -> DesignMatrix {
    let p = beta.len();
    let uc: Vec<f64> = (0..children).map(|_| sigma[0] * normal(rng)).collect();
    let uw: Vec<f64> = (0..words).map(|_| sigma[1] * normal(rng)).collect();
    let xw: Vec<Vec<f64>> = (0..words)
        .map(|_| std::iter::once(1.0).chain((1..p).map(|_| normal(rng))).collect())
        .collect();
    let (mut x, mut y, mut ch, mut wd) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for c in 0..children {
        for w in 0..words {
            let eta: f64 = xw[w].iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + uc[c] + uw[w];
            y.push(bernoulli(rng, eta));
            x.extend_from_slice(&xw[w]);
            ch.push(c);
            wd.push(w);
        }
    }
    DesignMatrix::from_parts(x, names(p), y, ch, wd).unwrap()
}

/// Same design as a grouped-data oracle input.
pub fn grouped(design: &DesignMatrix) -> super::aghq::GroupedData {
    super::aghq::GroupedData {
        x: (0..design.n_rows()).map(|i| design.row(i).to_vec()).collect(),
        y: design.y.clone(),
        group: design.child.clone(),
        n_groups: design.n_children(),
    }
}
