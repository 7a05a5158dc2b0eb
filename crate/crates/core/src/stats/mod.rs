//! Correlation machinery: Pearson r, t-based p-values, and the per-age,
//! per-grammatical-class correlation reports built on them.

mod correlation;
mod special;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use correlation::{
    mean, pearson, pearson_pairwise, pearson_pvalue, sample_sd, standardize, Correlation, PValue,
};
pub use special::{
    ln_beta, normal_two_tailed, regularized_incomplete_beta, student_t_two_tailed,
    BETA_CF_TOLERANCE,
};

use crate::distributional::{Predictor, PredictorTable};
use crate::lexicon::{GrammaticalClass, Lexicon, McdipTable};

/// Significance threshold used to flag correlations.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} complete observations, have {n}")]
    InsufficientData { n: usize, needed: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation {0} outside [-1, 1]")]
    InvalidCorrelation(f64),
}

/// The set of words a correlation is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grouping {
    All,
    Class(GrammaticalClass),
}

impl Grouping {
    pub fn admits(self, class: GrammaticalClass) -> bool {
        match self {
            Self::All => true,
            Self::Class(c) => c == class,
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("all"),
            Self::Class(c) => f.write_str(c.as_str()),
        }
    }
}

/// Whether to correlate over all words or separately per grammatical class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingMode {
    All,
    ByClass,
}

impl GroupingMode {
    /// Groups in report order; classes without any word are skipped.
    pub fn groups(self, lexicon: &Lexicon) -> Vec<Grouping> {
        match self {
            Self::All => alloc::vec![Grouping::All],
            Self::ByClass => GrammaticalClass::ALL
                .into_iter()
                .filter(|&c| (0..lexicon.len()).any(|w| lexicon.class(w) == c))
                .map(Grouping::Class)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub r: f64,
    pub p: f64,
    pub significant_01: bool,
    pub degenerate: bool,
}

/// One cell of a correlation report. `estimate` is `None` when the cell is
/// unavailable (fewer than 3 complete pairs or a constant series).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub grouping: Grouping,
    pub age_months: u32,
    pub var_a: String,
    pub var_b: String,
    /// Pairwise-complete observations.
    pub n: usize,
    pub estimate: Option<CorrelationEstimate>,
}

/// Correlate two series with pairwise deletion, marking failures unavailable.
pub fn correlation_cell(
    grouping: Grouping,
    age_months: u32,
    var_a: &str,
    var_b: &str,
    x: &[Option<f64>],
    y: &[Option<f64>],
) -> CorrelationReport {
    let n = x.iter().zip(y).filter(|(a, b)| a.is_some() && b.is_some()).count();
    let estimate = pearson_pairwise(x, y).ok().and_then(|c| {
        let pv = pearson_pvalue(c.r, c.n).ok()?;
        Some(CorrelationEstimate {
            r: c.r,
            p: pv.p,
            significant_01: pv.p < SIGNIFICANCE_LEVEL,
            degenerate: pv.degenerate,
        })
    });
    CorrelationReport {
        grouping,
        age_months,
        var_a: var_a.to_string(),
        var_b: var_b.to_string(),
        n,
        estimate,
    }
}

fn masked(values: Vec<Option<f64>>, lexicon: &Lexicon, grouping: Grouping) -> Vec<Option<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(w, v)| if grouping.admits(lexicon.class(w)) { v } else { None })
        .collect()
}

/// All six predictor pairs at each age, per group.
pub fn correlate_predictors(
    table: &PredictorTable,
    lexicon: &Lexicon,
    ages: &[u32],
    mode: GroupingMode,
) -> Vec<CorrelationReport> {
    let mut out = Vec::new();
    for grouping in mode.groups(lexicon) {
        for &age in ages {
            for (i, &a) in Predictor::ALL.iter().enumerate() {
                for &b in &Predictor::ALL[i + 1..] {
                    let (x, y) = match (table.column(age, a), table.column(age, b)) {
                        (Some(x), Some(y)) => (masked(x, lexicon, grouping), masked(y, lexicon, grouping)),
                        _ => (Vec::new(), Vec::new()),
                    };
                    out.push(correlation_cell(grouping, age, a.as_str(), b.as_str(), &x, &y));
                }
            }
        }
    }
    out
}

/// Each predictor against MCDIp at the same age, per group.
pub fn correlate_with_outcome(
    table: &PredictorTable,
    mcdip: &McdipTable,
    lexicon: &Lexicon,
    ages: &[u32],
    mode: GroupingMode,
) -> Vec<CorrelationReport> {
    let mut out = Vec::new();
    for grouping in mode.groups(lexicon) {
        for &age in ages {
            let outcome: Vec<Option<f64>> = match mcdip.row(age) {
                Some(row) => masked(row.iter().copied().map(Some).collect(), lexicon, grouping),
                None => Vec::new(),
            };
            for p in Predictor::ALL {
                let x = match table.column(age, p) {
                    Some(x) if !outcome.is_empty() => masked(x, lexicon, grouping),
                    _ => Vec::new(),
                };
                let y = if x.is_empty() { &[][..] } else { &outcome[..] };
                out.push(correlation_cell(grouping, age, p.as_str(), "mcdip", &x, y));
            }
        }
    }
    out
}
