//! Textbook statistics written out longhand.

use std::f64::consts::FRAC_PI_2;

/// Pearson r from the definition: covariance over the product of standard
/// deviations, each from raw sums of squares about the mean.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Two-tailed p for Pearson r on n pairs, by integrating the t density.
///
/// With t = √ν tan θ the density becomes proportional to cos^{ν−1} θ on
/// (−π/2, π/2), so p = ∫_{θ₀}^{π/2} cos^{ν−1} / ∫_0^{π/2} cos^{ν−1}.
pub fn pvalue_by_integration(r: f64, n: usize) -> f64 {
    let nu = (n - 2) as f64;
    let t = r * (nu / (1.0 - r * r)).sqrt();
    let theta0 = (t.abs() / nu.sqrt()).atan();
    let f = |th: f64| th.cos().powf(nu - 1.0);
    let panels = 200_000;
    let tail = simpson(f, theta0, FRAC_PI_2, panels);
    let whole = simpson(f, 0.0, FRAC_PI_2, panels);
    tail / whole
}
