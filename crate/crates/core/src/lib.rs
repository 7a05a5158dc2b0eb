//! Corpus statistics for predicting when children start producing words.
//!
//! The crate turns child-directed speech transcripts and vocabulary-checklist
//! survey data into per-age, per-word distributional predictors (cumulative log
//! frequency, lexical diversity, document diversity and the proportion of known
//! word co-occurrence, "Pro-KWo"), and evaluates them with Pearson correlations
//! and logistic regressions with crossed random intercepts for child and word.
//!
//! Everything here is pure computation over in-memory values and builds with
//! `no_std` + `alloc`. File formats, the command line and parallel drivers live
//! in the `prokwo` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod distributional;
pub mod lexicon;
pub mod math;
pub mod regression;
pub mod rng;
pub mod stats;

/// Youngest age (months) covered by the vocabulary checklist.
pub const MIN_AGE_MONTHS: u32 = 16;
/// Oldest age (months) covered by the vocabulary checklist.
pub const MAX_AGE_MONTHS: u32 = 30;

/// `true` when `age` lies in the checklist range.
pub fn age_in_range(age: u32) -> bool {
    (MIN_AGE_MONTHS..=MAX_AGE_MONTHS).contains(&age)
}
