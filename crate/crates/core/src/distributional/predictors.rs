//! The four per-word predictors and the per-age table that holds them.

use alloc::vec::Vec;

use super::cooccurrence::{tally_document, Accumulator, AgeCounts, CooccurrenceMatrix};
use super::{slice_counts, CountingOptions, DistributionalError, MissingReason, Predictor};
use crate::age_in_range;
use crate::corpus::{Corpus, CorpusSlice, IngestError, SpeakerFilter};
use crate::lexicon::{Lexicon, McdipTable};
use crate::math;

/// log10 of raw token counts; zero counts are missing.
pub fn log_frequency_from_counts(counts: &[u64]) -> Vec<Option<f64>> {
    counts
        .iter()
        .map(|&c| (c > 0).then(|| math::log10(c as f64)))
        .collect()
}

pub fn log_frequency(
    slice: &CorpusSlice<'_>,
    lexicon: &Lexicon,
) -> Result<Vec<Option<f64>>, DistributionalError> {
    let counts = slice_counts(slice, lexicon, &CountingOptions::default())?;
    Ok(log_frequency_from_counts(&counts.token_counts))
}

/// Share of lexicon words each word co-occurs with at least once.
pub fn lexical_diversity(matrix: &CooccurrenceMatrix) -> Vec<f64> {
    let v = matrix.size() as f64;
    (0..matrix.size()).map(|w| matrix.row_nnz(w) as f64 / v).collect()
}

/// Share of `total_documents` in which each word occurs in the slice.
pub fn document_diversity(
    slice: &CorpusSlice<'_>,
    lexicon: &Lexicon,
    total_documents: usize,
) -> Result<Vec<f64>, DistributionalError> {
    let counts = slice_counts(slice, lexicon, &CountingOptions::default())?;
    Ok(diversity(&counts.document_counts, total_documents))
}

fn diversity(document_counts: &[u64], total_documents: usize) -> Vec<f64> {
    document_counts
        .iter()
        .map(|&d| d as f64 / total_documents as f64)
        .collect()
}

/// Co-occurrence-weighted mean MCDIp of the words `row` co-occurs with:
/// the MCDIp-weighted row sum divided by the raw row sum.
pub fn pro_kwo_row(row: impl Iterator<Item = (usize, u64)>, mcdip: &[f64]) -> Option<f64> {
    let mut unweighted = 0.0;
    let mut weighted = 0.0;
    for (col, n) in row {
        let n = n as f64;
        unweighted += n;
        weighted += n * mcdip[col];
    }
    (unweighted > 0.0).then(|| weighted / unweighted)
}

/// Pro-KWo for every word; missing where the word has no co-occurrences.
pub fn pro_kwo(matrix: &CooccurrenceMatrix, mcdip_row: &[f64]) -> Result<Vec<Option<f64>>, DistributionalError> {
    if mcdip_row.len() != matrix.size() {
        return Err(DistributionalError::McdipLength {
            expected: matrix.size(),
            got: mcdip_row.len(),
        });
    }
    Ok((0..matrix.size())
        .map(|w| pro_kwo_row(matrix.row(w), mcdip_row))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorRow {
    pub age_months: u32,
    pub word_index: usize,
    pub frequency_log10: Option<f64>,
    pub lexical_diversity: Option<f64>,
    pub document_diversity: Option<f64>,
    pub pro_kwo: Option<f64>,
    pub missing: Vec<(Predictor, MissingReason)>,
}

impl PredictorRow {
    pub fn value(&self, predictor: Predictor) -> Option<f64> {
        match predictor {
            Predictor::Frequency => self.frequency_log10,
            Predictor::LexicalDiversity => self.lexical_diversity,
            Predictor::DocumentDiversity => self.document_diversity,
            Predictor::ProKwo => self.pro_kwo,
        }
    }
}

/// Predictor values for one age.
///
/// `total_documents` is the fixed document-diversity denominator (documents
/// eligible at the oldest cutoff), not the slice size.
pub fn predictor_rows(
    counts: &AgeCounts,
    mcdip_row: &[f64],
    total_documents: usize,
) -> Result<Vec<PredictorRow>, DistributionalError> {
    let v = counts.matrix.size();
    let age = counts.age_months;
    if counts.n_documents == 0 {
        return Ok((0..v)
            .map(|w| PredictorRow {
                age_months: age,
                word_index: w,
                frequency_log10: None,
                lexical_diversity: None,
                document_diversity: None,
                pro_kwo: None,
                missing: Predictor::ALL
                    .iter()
                    .map(|&p| (p, MissingReason::EmptySlice))
                    .collect(),
            })
            .collect());
    }
    let freq = log_frequency_from_counts(&counts.token_counts);
    let ld = lexical_diversity(&counts.matrix);
    let dd = diversity(&counts.document_counts, total_documents);
    let pk = pro_kwo(&counts.matrix, mcdip_row)?;
    Ok((0..v)
        .map(|w| {
            let mut missing = Vec::new();
            if freq[w].is_none() {
                missing.push((Predictor::Frequency, MissingReason::ZeroFrequency));
            }
            if pk[w].is_none() {
                missing.push((Predictor::ProKwo, MissingReason::NoCooccurrence));
            }
            PredictorRow {
                age_months: age,
                word_index: w,
                frequency_log10: freq[w],
                lexical_diversity: Some(ld[w]),
                document_diversity: Some(dd[w]),
                pro_kwo: pk[w],
                missing,
            }
        })
        .collect())
}

/// Predictor rows for a set of ages, ordered by age then word index.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorTable {
    words: usize,
    ages: Vec<u32>,
    rows: Vec<PredictorRow>,
}

impl PredictorTable {
    /// Assemble from rows in any order; every age present must cover each of
    /// the `words` lexicon indices exactly once.
    pub fn new(words: usize, mut rows: Vec<PredictorRow>) -> Result<Self, DistributionalError> {
        rows.sort_by_key(|r| (r.age_months, r.word_index));
        let mut ages: Vec<u32> = rows.iter().map(|r| r.age_months).collect();
        ages.dedup();
        for (k, &age) in ages.iter().enumerate() {
            for w in 0..words {
                match rows.get(k * words + w) {
                    Some(r) if r.age_months == age && r.word_index == w => {}
                    _ => return Err(DistributionalError::IncompleteTable { age, word: w }),
                }
            }
        }
        if let Some(extra) = rows.get(ages.len() * words) {
            return Err(DistributionalError::IncompleteTable {
                age: extra.age_months,
                word: extra.word_index,
            });
        }
        Ok(Self { words, ages, rows })
    }

    pub fn word_count(&self) -> usize {
        self.words
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn rows(&self) -> &[PredictorRow] {
        &self.rows
    }

    /// Rows for `age` indexed by word, or `None` when the age is absent.
    pub fn at_age(&self, age: u32) -> Option<&[PredictorRow]> {
        let k = self.ages.iter().position(|&a| a == age)?;
        Some(&self.rows[k * self.words..(k + 1) * self.words])
    }

    pub fn column(&self, age: u32, predictor: Predictor) -> Option<Vec<Option<f64>>> {
        Some(self.at_age(age)?.iter().map(|r| r.value(predictor)).collect())
    }
}

/// Predictor table from precomputed cumulative counts.
pub fn predictor_table_from_counts(
    counts: &[AgeCounts],
    mcdip: &McdipTable,
    total_documents: usize,
    words: usize,
) -> Result<PredictorTable, DistributionalError> {
    let mut rows = Vec::with_capacity(counts.len() * words);
    for c in counts {
        let mcdip_row = mcdip
            .row(c.age_months)
            .ok_or(DistributionalError::McdipUnavailable(c.age_months))?;
        rows.extend(predictor_rows(c, mcdip_row, total_documents)?);
    }
    PredictorTable::new(words, rows)
}

/// Count the corpus cumulatively and compute all predictors at `ages`.
pub fn predictor_table(
    corpus: &Corpus,
    lexicon: &Lexicon,
    mcdip: &McdipTable,
    ages: &[u32],
    speakers: SpeakerFilter,
    options: &CountingOptions,
) -> Result<PredictorTable, DistributionalError> {
    options.validate()?;
    let mut ages = ages.to_vec();
    ages.sort_unstable();
    ages.dedup();
    for &age in &ages {
        if !age_in_range(age) {
            return Err(IngestError::CutoffOutOfRange(age).into());
        }
        if !mcdip.is_available(age) {
            return Err(DistributionalError::McdipUnavailable(age));
        }
    }
    let mut docs: Vec<_> = corpus
        .documents()
        .iter()
        .filter_map(|d| d.child_age_months.map(|a| (a, d)))
        .collect();
    docs.sort_by_key(|(a, _)| *a);
    let mut acc = Accumulator::new(lexicon.len());
    let mut next = 0;
    let mut counts = Vec::with_capacity(ages.len());
    for &age in &ages {
        while next < docs.len() && docs[next].0 <= age {
            acc.add(&tally_document(docs[next].1, lexicon, speakers, options));
            next += 1;
        }
        counts.push(acc.snapshot(age));
    }
    predictor_table_from_counts(&counts, mcdip, corpus.eligible_document_count(), lexicon.len())
}
