mod oracles;

use std::collections::BTreeSet;

use oracles::corpus::{lexicon, random_corpus};
use prokwo_core::corpus::{normalize_tokens, Corpus, SpeakerFilter};
use prokwo_core::distributional::{
    cumulative_counts, predictor_table, pro_kwo, pro_kwo_row, tally_document, CooccurrenceMatrix, CountingOptions,
    MissingReason, Predictor,
};
use prokwo_core::lexicon::{compute_mcdip, Administration, Lexicon};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn table_one_reproduction() {
    let words = ["why", "where", "ball", "cup", "think", "did"];
    let m = CooccurrenceMatrix::from_triples(
        words.len(),
        24,
        &[(0, 2, 10), (0, 3, 10), (0, 4, 100), (0, 5, 100), (1, 2, 100), (1, 3, 100), (1, 4, 10), (1, 5, 10)],
    );
    let mcdip = [0.0, 0.0, 0.7, 0.6, 0.2, 0.3];
    let pk = pro_kwo(&m, &mcdip).unwrap();
    let why = pk[0].unwrap();
    let where_ = pk[1].unwrap();
    assert!((why - 63.0 / 220.0).abs() < 1e-12);
    assert!((where_ - 135.0 / 220.0).abs() < 1e-12);
    assert!((why - 0.29).abs() < 0.005);
    assert!((where_ - 0.61).abs() < 0.005);
}

fn random_admins(rng: &mut ChaCha8Rng, v: usize) -> Vec<Administration> {
    let mut out = Vec::new();
    for child in 0..40 {
        for age in [16u32, 18, 20, 22, 24, 26, 28, 30] {
            if rng.random_bool(0.6) {
                let produced = (0..v).filter(|_| rng.random_bool(0.3)).collect();
                out.push(Administration {
                    child_id: format!("c{child}").into(),
                    age_months: age,
                    produced,
                });
            }
        }
    }
    out
}

#[test]
fn mcdip_matches_tally() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lex = lexicon(25);
    let admins = random_admins(&mut rng, 25);
    let table = compute_mcdip(&admins, &lex).unwrap();
    for age in 16..=30u32 {
        let at: Vec<&Administration> = admins.iter().filter(|a| a.age_months == age).collect();
        match table.row(age) {
            None => assert!(at.is_empty()),
            Some(row) => {
                for (w, &value) in row.iter().enumerate() {
                    let producers = at.iter().filter(|a| a.produced.contains(&w)).count();
                    assert_eq!(value, producers as f64 / at.len() as f64);
                }
            }
        }
    }
}

fn full_table(seed: u64) -> (Corpus, Lexicon, prokwo_core::distributional::PredictorTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = random_corpus(&mut rng, 30, 20, 30);
    let lex = lexicon(30);
    let admins = random_admins(&mut rng, 30);
    let mcdip = compute_mcdip(&admins, &lex).unwrap();
    let ages = [16, 20, 24, 28, 30];
    let table = predictor_table(&corpus, &lex, &mcdip, &ages, SpeakerFilter::default(), &CountingOptions::default()).unwrap();
    (corpus, lex, table)
}

#[test]
fn predictor_ranges_and_missingness() {
    for seed in 0..20 {
        let (_, _, table) = full_table(seed);
        for row in table.rows() {
            for p in [Predictor::LexicalDiversity, Predictor::DocumentDiversity, Predictor::ProKwo] {
                if let Some(v) = row.value(p) {
                    assert!((0.0..=1.0).contains(&v), "{p} = {v}");
                }
            }
            let missing: BTreeSet<Predictor> = row.missing.iter().map(|m| m.0).collect();
            for p in Predictor::ALL {
                assert_eq!(row.value(p).is_none(), missing.contains(&p));
            }
            for (p, reason) in &row.missing {
                match reason {
                    MissingReason::ZeroFrequency => assert_eq!(*p, Predictor::Frequency),
                    MissingReason::NoCooccurrence => assert_eq!(*p, Predictor::ProKwo),
                    MissingReason::EmptySlice => {}
                }
            }
        }
    }
}

#[test]
fn cumulative_counts_never_decrease() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus = random_corpus(&mut rng, 50, 30, 40);
    let lex = lexicon(40);
    let tallies: Vec<_> = corpus
        .documents()
        .iter()
        .filter_map(|d| Some((d.child_age_months?, tally_document(d, &lex, SpeakerFilter::default(), &CountingOptions::default()))))
        .collect();
    let ages: Vec<u32> = (16..=30).collect();
    let counts = cumulative_counts(40, &tallies, &ages);
    for pair in counts.windows(2) {
        for r in 0..40 {
            for c in 0..40 {
                assert!(pair[0].matrix.get(r, c) <= pair[1].matrix.get(r, c));
            }
            assert!(pair[0].token_counts[r] <= pair[1].token_counts[r]);
            assert!(pair[0].document_counts[r] <= pair[1].document_counts[r]);
        }
        assert!(pair[0].n_documents <= pair[1].n_documents);
    }
}

fn row_strategy() -> impl Strategy<Value = (Vec<(usize, u64)>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|v| {
        (
            prop::collection::btree_map(0..v, 1u64..10_000, 1..=v).prop_map(|m| m.into_iter().collect::<Vec<_>>()),
            prop::collection::vec(0.0f64..=1.0, v),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pro_kwo_is_a_convex_combination((row, mcdip) in row_strategy()) {
        let pk = pro_kwo_row(row.iter().copied(), &mcdip).unwrap();
        let lo = row.iter().map(|&(c, _)| mcdip[c]).fold(f64::INFINITY, f64::min);
        let hi = row.iter().map(|&(c, _)| mcdip[c]).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(pk >= lo - 1e-15 && pk <= hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&pk));
    }

    #[test]
    fn pro_kwo_ignores_row_scale((row, mcdip) in row_strategy(), k in 2u64..1000) {
        let pk = pro_kwo_row(row.iter().copied(), &mcdip).unwrap();
        let scaled = pro_kwo_row(row.iter().map(|&(c, n)| (c, n * k)), &mcdip).unwrap();
        prop_assert!((pk - scaled).abs() < 1e-12);
    }

    #[test]
    fn tokenization_is_idempotent(s in "[ a-zA-Z0-9&@<>\\[\\]:'+_.?!-]{0,60}") {
        let once = normalize_tokens(&s);
        let twice = normalize_tokens(&once.join(" "));
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn document_diversity_uses_fixed_denominator(seed in 0u64..1000) {
        let (corpus, _, table) = full_table(seed);
        let total = corpus.eligible_document_count() as f64;
        for row in table.rows() {
            if let Some(dd) = row.document_diversity {
                let docs = dd * total;
                prop_assert!((docs - docs.round()).abs() < 1e-9);
            }
        }
    }
}
