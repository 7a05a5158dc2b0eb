//! Random corpora and a brute-force co-occurrence count.

use std::collections::{BTreeMap, BTreeSet};

use prokwo_core::corpus::{Corpus, Document, Utterance};
use prokwo_core::lexicon::{Lexicon, LexiconRow};
use rand::Rng;

pub const CLASSES: [&str; 4] = ["noun", "verb", "adjective", "function_word"];

/// Lexicon `w0..w{v-1}` with classes assigned round-robin.
pub fn lexicon(v: usize) -> Lexicon {
    let rows = (0..v)
        .map(|i| LexiconRow {
            word: format!("w{i}"),
            mcdi_category: "cat".into(),
            grammatical_class: CLASSES[i % CLASSES.len()].into(),
            excluded: false,
        })
        .collect();
    Lexicon::load(rows, &BTreeSet::new()).unwrap()
}

/// Corpus over `w0..w{vocab-1}` plus out-of-lexicon tokens `o0..o4`.
pub fn random_corpus<R: Rng>(rng: &mut R, max_docs: usize, max_utts: usize, vocab: usize) -> Corpus {
    let n_docs = rng.random_range(1..=max_docs);
    let docs = (0..n_docs)
        .map(|d| {
            let n_utts = rng.random_range(0..=max_utts);
            let utterances = (0..n_utts)
                .map(|_| {
                    let speaker = ["MOT", "FAT", "CHI", "INV"][rng.random_range(0..4)];
                    let len = rng.random_range(0..12);
                    let tokens = (0..len)
                        .map(|_| {
                            if rng.random_bool(0.2) {
                                format!("o{}", rng.random_range(0..5))
                            } else {
                                format!("w{}", rng.random_range(0..vocab))
                            }
                        })
                        .collect();
                    Utterance { speaker: speaker.into(), tokens }
                })
                .collect();
            Document {
                doc_id: format!("doc{d}"),
                child_age_months: if rng.random_bool(0.05) { None } else { Some(rng.random_range(16..=30)) },
                utterances,
                source: "synthetic".into(),
            }
        })
        .collect();
    Corpus::new(docs).unwrap()
}

pub struct CountSettings<'a> {
    pub cutoff: u32,
    pub window: usize,
    pub include_diagonal: bool,
    pub lexicon_only: bool,
    pub speakers_excluded: &'a [&'a str],
}

/// Count every ordered pair of positions `i < j <= i + window` within an
/// utterance by explicit double loop.
pub fn brute_force(corpus: &Corpus, lexicon: &Lexicon, s: &CountSettings) -> BTreeMap<(usize, usize), u64> {
    let mut out = BTreeMap::new();
    for doc in corpus.documents() {
        match doc.child_age_months {
            Some(a) if a <= s.cutoff => {}
            _ => continue,
        }
        for utt in &doc.utterances {
            if s.speakers_excluded.contains(&utt.speaker.as_str()) {
                continue;
            }
            let mut toks: Vec<Option<usize>> = utt.tokens.iter().map(|t| lexicon.index_of(t)).collect();
            if s.lexicon_only {
                toks.retain(|t| t.is_some());
            }
            for i in 0..toks.len() {
                for j in 0..toks.len() {
                    if j <= i || j - i > s.window {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (toks[i], toks[j]) {
                        if a == b && !s.include_diagonal {
                            continue;
                        }
                        *out.entry((a, b)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    out
}
