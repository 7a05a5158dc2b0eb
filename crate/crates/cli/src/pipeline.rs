//! Analysis stages shared by the commands. Parallel work is always collected
//! back in a fixed order, so results do not depend on the thread count.

use prokwo_core::corpus::{Corpus, SpeakerFilter};
use prokwo_core::distributional::{
    cumulative_counts, predictor_table_from_counts, pro_kwo, shuffle_iteration, AgeCounts, CountingOptions,
    PredictorTable, ShuffleOutcome,
};
use prokwo_core::lexicon::{Lexicon, McdipTable, ProductionRecord};
use prokwo_core::regression::{
    build_design, fit_glmm_laplace_with, item_prediction_error, FitError, FitResult, GlmmOptions, ItemErrorReport,
};
use prokwo_core::stats::{
    correlate_predictors, correlate_with_outcome, pearson_pairwise, pearson_pvalue, CorrelationReport, GroupingMode,
};
use rayon::prelude::*;

use crate::config::ModelSelector;
use crate::error::{CliError, Result};

/// Cumulative counts at each age; documents are tallied in parallel.
pub fn count_corpus(
    corpus: &Corpus,
    lexicon: &Lexicon,
    speakers: SpeakerFilter,
    options: &CountingOptions,
    ages: &[u32],
) -> Vec<AgeCounts> {
    let oldest = ages.iter().copied().max().unwrap_or(0);
    let tallies: Vec<_> = corpus
        .documents()
        .par_iter()
        .filter_map(|d| d.child_age_months.filter(|&a| a <= oldest).map(|a| (a, d)))
        .map(|(a, d)| (a, prokwo_core::distributional::tally_document(d, lexicon, speakers, options)))
        .collect();
    cumulative_counts(lexicon.len(), &tallies, ages)
}

pub fn check_mcdip_ages(mcdip: &McdipTable, ages: &[u32], source: &str) -> Result<()> {
    let missing: Vec<String> = ages
        .iter()
        .filter(|&&a| !mcdip.is_available(a))
        .map(u32::to_string)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::analysis(format!(
            "{source}: no administrations at age(s) {}",
            missing.join(", ")
        )))
    }
}

pub fn predictor_table(
    counts: &[AgeCounts],
    mcdip: &McdipTable,
    corpus: &Corpus,
    lexicon: &Lexicon,
) -> Result<PredictorTable> {
    predictor_table_from_counts(counts, mcdip, corpus.eligible_document_count(), lexicon.len())
        .map_err(CliError::analysis)
}

pub fn check_table_ages(table: &PredictorTable, ages: &[u32], source: &str) -> Result<()> {
    let missing: Vec<String> = ages
        .iter()
        .filter(|&&a| table.at_age(a).is_none())
        .map(u32::to_string)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::analysis(format!("{source}: no rows for age(s) {}", missing.join(", "))))
    }
}

/// Predictor pairs then predictor-outcome cells, each overall and by class.
pub fn correlations(
    table: &PredictorTable,
    mcdip: &McdipTable,
    lexicon: &Lexicon,
    ages: &[u32],
) -> Vec<CorrelationReport> {
    let mut out = Vec::new();
    for mode in [GroupingMode::All, GroupingMode::ByClass] {
        out.extend(correlate_predictors(table, lexicon, ages, mode));
    }
    for mode in [GroupingMode::All, GroupingMode::ByClass] {
        out.extend(correlate_with_outcome(table, mcdip, lexicon, ages, mode));
    }
    out
}

/// Shuffle baseline at one age next to the unshuffled correlation.
#[derive(Debug, Clone)]
pub struct ShuffleAge {
    pub age_months: u32,
    pub observed_r: f64,
    pub observed_p: f64,
    pub n: usize,
    pub outcome: ShuffleOutcome,
    pub mean_p: f64,
}

pub fn shuffles(counts: &[AgeCounts], mcdip: &McdipTable, n_shuffles: u64, seed: u64) -> Result<Vec<ShuffleAge>> {
    counts
        .iter()
        .map(|c| {
            let age = c.age_months;
            let row = mcdip
                .row(age)
                .ok_or_else(|| CliError::analysis(format!("no MCDIp at age {age}")))?;
            let pk = pro_kwo(&c.matrix, row).map_err(CliError::analysis)?;
            let truth: Vec<Option<f64>> = row.iter().copied().map(Some).collect();
            let observed = pearson_pairwise(&pk, &truth)
                .map_err(|e| CliError::analysis(format!("age {age}: Pro-KWo vs MCDIp: {e}")))?;
            let draws = (0..n_shuffles)
                .into_par_iter()
                .map(|i| shuffle_iteration(&c.matrix, row, row, seed, i))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::analysis(format!("age {age}: {e}")))?;
            let outcome = ShuffleOutcome::from_draws(draws).map_err(CliError::analysis)?;
            let p = |r: f64| pearson_pvalue(r, observed.n).map(|v| v.p).unwrap_or(f64::NAN);
            Ok(ShuffleAge {
                age_months: age,
                observed_r: observed.r,
                observed_p: p(observed.r),
                n: observed.n,
                mean_p: p(outcome.mean_r),
                outcome,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ModelFit {
    pub age_months: u32,
    pub model: ModelSelector,
    pub rows: usize,
    pub dropped_rows: usize,
    pub fit: FitResult,
    /// Absent when the fit did not converge.
    pub items: Option<ItemErrorReport>,
}

/// Fit every (model, age) pair in parallel; output follows model then age.
pub fn fits(
    records: &[ProductionRecord],
    table: &PredictorTable,
    mcdip: &McdipTable,
    models: &[ModelSelector],
    ages: &[u32],
    options: &GlmmOptions,
) -> Result<Vec<ModelFit>> {
    let jobs: Vec<(ModelSelector, u32)> = models
        .iter()
        .flat_map(|&m| ages.iter().map(move |&a| (m, a)))
        .collect();
    jobs.par_iter()
        .map(|&(model, age)| {
            let context = |e: FitError| CliError::analysis(format!("model {model}, age {age}: {e}"));
            let spec = model.spec(age);
            let design = build_design(records, table, &spec).map_err(context)?;
            let fit = fit_glmm_laplace_with(&design, &spec, options).map_err(context)?;
            let items = if fit.convergence.status.is_converged() {
                let row = mcdip
                    .row(age)
                    .ok_or_else(|| CliError::analysis(format!("no MCDIp at age {age}")))?;
                Some(item_prediction_error(&fit, &design, row).map_err(context)?)
            } else {
                None
            };
            Ok(ModelFit {
                age_months: age,
                model,
                rows: design.n_rows(),
                dropped_rows: design.dropped_rows,
                fit,
                items,
            })
        })
        .collect()
}

/// Names of the fits that did not converge, for the exit diagnostic.
pub fn unconverged(fits: &[ModelFit]) -> Vec<String> {
    fits.iter()
        .filter(|f| !f.fit.convergence.status.is_converged())
        .map(|f| format!("{}@{}", f.model, f.age_months))
        .collect()
}
