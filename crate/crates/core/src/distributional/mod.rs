//! Corpus-side predictors: co-occurrence counts, frequency, lexical and
//! document diversity, Pro-KWo and its shuffled baseline.

mod cooccurrence;
mod predictors;
mod shuffle;

use core::fmt;
use core::str::FromStr;

pub use cooccurrence::{
    build_cooccurrence, cumulative_counts, slice_counts, tally_document, Accumulator, AgeCounts,
    CooccurrenceMatrix, DocumentTally,
};
pub use predictors::{
    document_diversity, lexical_diversity, log_frequency, log_frequency_from_counts, pro_kwo,
    pro_kwo_row, predictor_rows, predictor_table, predictor_table_from_counts, PredictorRow,
    PredictorTable,
};
pub use shuffle::{pro_kwo_shuffle, shuffle_iteration, shuffled_mcdip, ShuffleDraw, ShuffleOutcome};

use crate::corpus::IngestError;
use crate::stats::StatsError;

/// Forward window length used when none is given.
pub const DEFAULT_WINDOW: usize = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistributionalError {
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("no MCDIp data for age {0}")]
    McdipUnavailable(u32),
    #[error("MCDIp vector has {got} entries, lexicon has {expected}")]
    McdipLength { expected: usize, got: usize },
    #[error("predictor table row for age {age}, word {word} is missing or repeated")]
    IncompleteTable { age: u32, word: usize },
    #[error("shuffle needs at least one iteration")]
    NoShuffles,
    #[error("shuffle iteration {iteration}: {source}")]
    ShuffleCorrelation { iteration: u64, source: StatsError },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Which tokens take up positions in the forward window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowFillers {
    /// Every token occupies a slot; only lexicon words are counted.
    #[default]
    AllTokens,
    /// Non-lexicon tokens are removed before windowing.
    LexiconOnly,
}

impl fmt::Display for WindowFillers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AllTokens => "all",
            Self::LexiconOnly => "mcdi-only",
        })
    }
}

impl FromStr for WindowFillers {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "all" => Ok(Self::AllTokens),
            "mcdi-only" => Ok(Self::LexiconOnly),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingOptions {
    pub window: usize,
    /// Count a word co-occurring with another token of itself.
    pub include_diagonal: bool,
    pub fillers: WindowFillers,
}

impl Default for CountingOptions {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            include_diagonal: true,
            fillers: WindowFillers::AllTokens,
        }
    }
}

impl CountingOptions {
    pub fn validate(&self) -> Result<(), DistributionalError> {
        if self.window == 0 {
            return Err(DistributionalError::ZeroWindow);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predictor {
    Frequency,
    LexicalDiversity,
    DocumentDiversity,
    ProKwo,
}

impl Predictor {
    pub const ALL: [Predictor; 4] = [
        Self::Frequency,
        Self::LexicalDiversity,
        Self::DocumentDiversity,
        Self::ProKwo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Frequency => "frequency",
            Self::LexicalDiversity => "lexical_diversity",
            Self::DocumentDiversity => "document_diversity",
            Self::ProKwo => "pro_kwo",
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predictor {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

/// Why a predictor value is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MissingReason {
    /// The word never occurs in the slice, so its log frequency is undefined.
    ZeroFrequency,
    /// The word has no co-occurrences, so Pro-KWo is 0/0.
    NoCooccurrence,
    /// The slice holds no documents at all.
    EmptySlice,
}

impl MissingReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ZeroFrequency => "zero-frequency",
            Self::NoCooccurrence => "no-cooccurrence",
            Self::EmptySlice => "empty-slice",
        }
    }
}

impl fmt::Display for MissingReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MissingReason {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [Self::ZeroFrequency, Self::NoCooccurrence, Self::EmptySlice]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(())
    }
}
