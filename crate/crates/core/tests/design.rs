mod oracles;

use prokwo_core::distributional::{Predictor, PredictorRow, PredictorTable};
use prokwo_core::lexicon::ProductionRecord;
use prokwo_core::regression::{
    build_design, fit_glmm_laplace_with, item_prediction_error, predict, GlmmOptions, ModelSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_inputs(seed: u64, words: usize, children: usize) -> (Vec<ProductionRecord>, PredictorTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..words)
        .map(|w| {
            let pk = if rng.random_bool(0.9) { Some(rng.random::<f64>()) } else { None };
            PredictorRow {
                age_months: 24,
                word_index: w,
                frequency_log10: Some(rng.random_range(0.0..5.0)),
                lexical_diversity: Some(rng.random()),
                document_diversity: Some(rng.random()),
                pro_kwo: pk,
                missing: Vec::new(),
            }
        })
        .collect();
    let table = PredictorTable::new(words, rows).unwrap();
    let records = (0..children)
        .flat_map(|c| (0..words).map(move |w| (c, w)))
        .map(|(c, w)| ProductionRecord {
            child_id: format!("child{c}").into(),
            age_months: 24,
            word_index: w,
            produced: rng.random_bool(0.4),
        })
        .collect();
    (records, table)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standardized_columns_are_centred(seed in 0u64..10_000, words in 5usize..40, children in 2usize..30) {
        let (records, table) = random_inputs(seed, words, children);
        let design = match build_design(&records, &table, &ModelSpec::full(24)) {
            Ok(d) => d,
            Err(_) => return Ok(()),
        };
        for k in 1..design.n_fixed() {
            let col: Vec<f64> = (0..design.n_rows()).map(|i| design.row(i)[k]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            prop_assert!(mean.abs() < 1e-10);
        }
        let retained = design.n_rows() + design.dropped_rows;
        prop_assert_eq!(retained, records.len());
    }
}

#[test]
fn calibrated_fit_has_small_item_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let design = oracles::sim::crossed(&mut rng, 1000, 8, &[-0.2, 0.6], [0.8, 0.6]);
    let spec = ModelSpec::single(0, Predictor::ProKwo);
    let fit = fit_glmm_laplace_with(&design, &spec, &GlmmOptions::default()).unwrap();
    let mcdip: Vec<f64> = (0..8).map(|w| w as f64 / 8.0).collect();
    let report = item_prediction_error(&fit, &design, &mcdip).unwrap();
    assert_eq!(report.items.len(), 8);
    for item in &report.items {
        assert_eq!(item.n_rows, 1000);
        assert!(item.mean_error.abs() < 0.02, "{item:?}");
    }
    for p in predict(&fit, &design, true).unwrap() {
        assert!(p > 0.0 && p < 1.0);
    }
}
