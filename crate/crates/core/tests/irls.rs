mod oracles;

use prokwo_core::regression::{
    fit_logistic_irls, logistic_log_likelihood, logistic_score, DesignMatrix, FitError, IrlsOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn intercept_only(ones: usize, n: usize) -> DesignMatrix {
    let y = (0..n).map(|i| if i < ones { 1.0 } else { 0.0 }).collect();
    DesignMatrix::from_parts(vec![1.0; n], vec!["(Intercept)".into()], y, vec![0; n], vec![0; n]).unwrap()
}

#[test]
fn intercept_only_is_logit_of_base_rate() {
    for (ones, n) in [(50, 100), (75, 100), (3, 40), (399, 400), (1, 7)] {
        let fit = fit_logistic_irls(&intercept_only(ones, n), &IrlsOptions::default()).unwrap();
        let rate = ones as f64 / n as f64;
        let logit = (rate / (1.0 - rate)).ln();
        assert!((fit.terms[0].estimate - logit).abs() < 1e-10, "{ones}/{n}");
    }
    let half = fit_logistic_irls(&intercept_only(50, 100), &IrlsOptions::default()).unwrap();
    assert_eq!(half.terms[0].estimate, 0.0);
}

#[test]
fn score_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let d = oracles::sim::logistic(&mut rng, 500, &[0.3, -0.8, 0.5]);
    for beta in [[0.0, 0.0, 0.0], [0.2, -0.5, 0.9], [-1.0, 1.5, 0.1]] {
        let g = logistic_score(&d, &beta);
        let h = 1e-5;
        for k in 0..3 {
            let mut up = beta;
            let mut down = beta;
            up[k] += h;
            down[k] -= h;
            let fd = (logistic_log_likelihood(&d, &up) - logistic_log_likelihood(&d, &down)) / (2.0 * h);
            assert!((g[k] - fd).abs() <= 1e-6 * g[k].abs().max(1.0), "k {k}: {} vs {fd}", g[k]);
        }
    }
}

#[test]
fn recovers_known_coefficients() {
    let truth = [-0.4, 0.9, -0.6];
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let d = oracles::sim::logistic(&mut rng, 5000, &truth);
        let fit = fit_logistic_irls(&d, &IrlsOptions::default()).unwrap();
        assert!(fit.convergence.status.is_converged());
        for (t, b) in fit.terms.iter().zip(truth) {
            assert!((t.estimate - b).abs() < 3.0 * t.std_error, "{}: {} vs {b}", t.term, t.estimate);
            assert!(t.ci_low < t.estimate && t.estimate < t.ci_high);
        }
        let g = logistic_score(&d, &fit.coefficients());
        assert!(g.iter().all(|v| v.abs() < 1e-8));
    }
}

#[test]
fn separation_is_an_error() {
    let n = 30;
    let x: Vec<f64> = (0..n).flat_map(|i| [1.0, i as f64 / 10.0 - 1.5]).collect();
    let y = (0..n).map(|i| if i >= 15 { 1.0 } else { 0.0 }).collect();
    let d = DesignMatrix::from_parts(x, vec!["(Intercept)".into(), "x".into()], y, vec![0; n], vec![0; n]).unwrap();
    assert!(matches!(fit_logistic_irls(&d, &IrlsOptions::default()), Err(FitError::Separation { .. })));
}
