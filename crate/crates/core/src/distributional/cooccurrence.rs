//! Forward-window co-occurrence counting.

use alloc::vec;
use alloc::vec::Vec;

use super::{CountingOptions, DistributionalError, WindowFillers};
use crate::corpus::{CorpusSlice, Document, SpeakerFilter};
use crate::lexicon::Lexicon;

/// Per-age co-occurrence counts over the lexicon, stored as compressed rows.
///
/// Row = target word, column = a lexicon word found in the target's forward
/// window. Only nonzero cells are stored; columns within a row are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    pub age_cutoff_months: u32,
    size: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u64>,
}

impl CooccurrenceMatrix {
    /// Build from `(row, col, count)` triples; repeated cells are summed and
    /// zero counts dropped.
    pub fn from_triples(size: usize, age_cutoff_months: u32, triples: &[(usize, usize, u64)]) -> Self {
        let mut sorted: Vec<(usize, usize, u64)> = triples.iter().copied().filter(|t| t.2 > 0).collect();
        sorted.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_start = vec![0usize; size + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut counts: Vec<u64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, n) in sorted {
            assert!(r < size && c < size, "cell ({r}, {c}) outside {size}x{size}");
            if last == Some((r, c)) {
                *counts.last_mut().unwrap() += n;
                continue;
            }
            last = Some((r, c));
            row_start[r + 1] += 1;
            cols.push(c as u32);
            counts.push(n);
        }
        for r in 0..size {
            row_start[r + 1] += row_start[r];
        }
        Self {
            age_cutoff_months,
            size,
            row_start,
            cols,
            counts,
        }
    }

    fn from_dense(size: usize, age_cutoff_months: u32, dense: &[u64]) -> Self {
        let mut row_start = Vec::with_capacity(size + 1);
        let mut cols = Vec::new();
        let mut counts = Vec::new();
        row_start.push(0);
        for r in 0..size {
            for (c, &n) in dense[r * size..(r + 1) * size].iter().enumerate() {
                if n > 0 {
                    cols.push(c as u32);
                    counts.push(n);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            age_cutoff_months,
            size,
            row_start,
            cols,
            counts,
        }
    }

    /// Lexicon size V (the matrix is V x V).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Nonzero `(column, count)` pairs of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let span = self.row_start[row]..self.row_start[row + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.counts[span])
            .map(|(&c, &n)| (c as usize, n))
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_start[row + 1] - self.row_start[row]
    }

    pub fn row_sum(&self, row: usize) -> u64 {
        self.row(row).map(|(_, n)| n).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        let span = self.row_start[row]..self.row_start[row + 1];
        match self.cols[span.clone()].binary_search(&(col as u32)) {
            Ok(k) => self.counts[span.start + k],
            Err(_) => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// All nonzero cells in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.size).flat_map(move |r| self.row(r).map(move |(c, n)| (r, c, n)))
    }
}

/// Counts contributed by a single document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocumentTally {
    /// Aggregated `(row, col, count)` window pairs, sorted.
    pub pairs: Vec<(u32, u32, u64)>,
    /// `(word, token count)` for lexicon words present, sorted by word.
    pub tokens: Vec<(u32, u64)>,
}

/// Count one document. Independent documents can be tallied in parallel and
/// merged with [`Accumulator::add`] in any order.
pub fn tally_document(
    doc: &Document,
    lexicon: &Lexicon,
    speakers: SpeakerFilter,
    options: &CountingOptions,
) -> DocumentTally {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut tokens: Vec<u32> = Vec::new();
    let mut ids: Vec<Option<u32>> = Vec::new();
    for utt in doc.utterances.iter().filter(|u| speakers.admits(&u.speaker)) {
        ids.clear();
        ids.extend(utt.tokens.iter().map(|t| lexicon.index_of(t).map(|i| i as u32)));
        if options.fillers == WindowFillers::LexiconOnly {
            ids.retain(Option::is_some);
        }
        for (i, id) in ids.iter().enumerate() {
            let Some(target) = *id else { continue };
            tokens.push(target);
            let end = (i + 1 + options.window).min(ids.len());
            for context in ids[i + 1..end].iter().flatten() {
                if options.include_diagonal || *context != target {
                    pairs.push((target, *context));
                }
            }
        }
    }
    DocumentTally {
        pairs: run_lengths(pairs).into_iter().map(|((r, c), n)| (r, c, n)).collect(),
        tokens: run_lengths(tokens),
    }
}

fn run_lengths<T: Ord + Copy>(mut items: Vec<T>) -> Vec<(T, u64)> {
    items.sort_unstable();
    let mut out: Vec<(T, u64)> = Vec::new();
    for x in items {
        match out.last_mut() {
            Some((y, n)) if *y == x => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Running totals over a growing set of documents.
///
/// Pair counts are held densely (V² cells) while accumulating and compressed
/// on [`Accumulator::snapshot`].
#[derive(Debug, Clone)]
pub struct Accumulator {
    size: usize,
    pairs: Vec<u64>,
    tokens: Vec<u64>,
    documents: Vec<u64>,
    n_documents: usize,
}

impl Accumulator {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            pairs: vec![0; size * size],
            tokens: vec![0; size],
            documents: vec![0; size],
            n_documents: 0,
        }
    }

    pub fn add(&mut self, tally: &DocumentTally) {
        for &(r, c, n) in &tally.pairs {
            self.pairs[r as usize * self.size + c as usize] += n;
        }
        for &(w, n) in &tally.tokens {
            self.tokens[w as usize] += n;
            self.documents[w as usize] += 1;
        }
        self.n_documents += 1;
    }

    pub fn snapshot(&self, age_cutoff_months: u32) -> AgeCounts {
        AgeCounts {
            age_months: age_cutoff_months,
            matrix: CooccurrenceMatrix::from_dense(self.size, age_cutoff_months, &self.pairs),
            token_counts: self.tokens.clone(),
            document_counts: self.documents.clone(),
            n_documents: self.n_documents,
        }
    }
}

/// Everything counted from one cumulative slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeCounts {
    pub age_months: u32,
    pub matrix: CooccurrenceMatrix,
    /// Tokens of each word (speaker-filtered).
    pub token_counts: Vec<u64>,
    /// Documents containing each word at least once (speaker-filtered).
    pub document_counts: Vec<u64>,
    /// Documents in the slice.
    pub n_documents: usize,
}

fn count_slice(slice: &CorpusSlice<'_>, lexicon: &Lexicon, options: &CountingOptions) -> AgeCounts {
    let mut acc = Accumulator::new(lexicon.len());
    for doc in &slice.documents {
        acc.add(&tally_document(doc, lexicon, slice.speaker_filter, options));
    }
    acc.snapshot(slice.age_cutoff_months)
}

/// Co-occurrence matrix of a cumulative slice.
pub fn build_cooccurrence(
    slice: &CorpusSlice<'_>,
    lexicon: &Lexicon,
    options: &CountingOptions,
) -> Result<CooccurrenceMatrix, DistributionalError> {
    options.validate()?;
    Ok(count_slice(slice, lexicon, options).matrix)
}

/// All counts of a cumulative slice.
pub fn slice_counts(
    slice: &CorpusSlice<'_>,
    lexicon: &Lexicon,
    options: &CountingOptions,
) -> Result<AgeCounts, DistributionalError> {
    options.validate()?;
    Ok(count_slice(slice, lexicon, options))
}

/// Cumulative counts at each of `ages` from per-document tallies.
///
/// `tallies` pairs each document's age with its tally; ages above the largest
/// requested cutoff are ignored. Output follows ascending age.
pub fn cumulative_counts(size: usize, tallies: &[(u32, DocumentTally)], ages: &[u32]) -> Vec<AgeCounts> {
    let mut ages: Vec<u32> = ages.to_vec();
    ages.sort_unstable();
    ages.dedup();
    let mut order: Vec<usize> = (0..tallies.len()).collect();
    order.sort_by_key(|&i| tallies[i].0);
    let mut acc = Accumulator::new(size);
    let mut next = 0;
    let mut out = Vec::with_capacity(ages.len());
    for age in ages {
        while next < order.len() && tallies[order[next]].0 <= age {
            acc.add(&tallies[order[next]].1);
            next += 1;
        }
        out.push(acc.snapshot(age));
    }
    out
}
