//! CSV and SVG renderings of analysis results.

use std::collections::BTreeMap;

use prokwo_core::distributional::{AgeCounts, Predictor};
use prokwo_core::lexicon::{GrammaticalClass, Lexicon};
use prokwo_core::regression::INTERCEPT;
use prokwo_core::stats::{CorrelationReport, Grouping};

use crate::config::ModelSelector;
use crate::formats::{csv_bytes, flag, num, opt_num};
use crate::pipeline::{ModelFit, ShuffleAge};
use crate::svg::{correlogram, figure, Panel, Series};

const OUTCOME: &str = "mcdip";

fn correlation_row(c: &CorrelationReport) -> Vec<String> {
    let e = c.estimate;
    vec![
        c.grouping.to_string(),
        c.age_months.to_string(),
        c.var_a.clone(),
        c.var_b.clone(),
        opt_num(e.map(|e| e.r)),
        c.n.to_string(),
        opt_num(e.map(|e| e.p)),
        e.map(|e| flag(e.significant_01)).unwrap_or_default(),
    ]
}

pub fn correlations_csv(cells: &[CorrelationReport]) -> Vec<u8> {
    csv_bytes(
        &["grouping", "age_months", "var_a", "var_b", "r", "n", "p", "significant_01"],
        cells.iter().map(correlation_row),
    )
}

pub fn cooccurrence_csv(counts: &[AgeCounts], lexicon: &Lexicon) -> Vec<u8> {
    let rows = counts.iter().flat_map(|c| {
        c.matrix.triples().map(move |(r, col, n)| {
            vec![
                c.age_months.to_string(),
                lexicon.word(r).to_string(),
                lexicon.word(col).to_string(),
                n.to_string(),
            ]
        })
    });
    csv_bytes(&["age_months", "target_word", "context_word", "count"], rows)
}

/// Per age: the unshuffled correlation, the mean over shuffles, then each draw.
pub fn shuffle_csv(ages: &[ShuffleAge]) -> Vec<u8> {
    let mut rows = Vec::new();
    for a in ages {
        let age = a.age_months.to_string();
        rows.push(vec![
            age.clone(),
            "observed".into(),
            num(a.observed_r),
            a.n.to_string(),
            num(a.observed_p),
        ]);
        rows.push(vec![
            age.clone(),
            "mean".into(),
            num(a.outcome.mean_r),
            a.n.to_string(),
            num(a.mean_p),
        ]);
        for d in &a.outcome.draws {
            rows.push(vec![
                age.clone(),
                d.iteration.to_string(),
                num(d.r),
                d.n.to_string(),
                String::new(),
            ]);
        }
    }
    csv_bytes(&["age_months", "iteration", "r", "n", "p"], rows)
}

pub fn fits_csv(fits: &[ModelFit]) -> Vec<u8> {
    let rows = fits.iter().flat_map(|f| {
        f.fit.terms.iter().map(move |t| {
            vec![
                f.age_months.to_string(),
                f.model.to_string(),
                t.term.clone(),
                num(t.estimate),
                num(t.std_error),
                num(t.z),
                num(t.p),
                num(t.ci_low),
                num(t.ci_high),
            ]
        })
    });
    csv_bytes(
        &["age_months", "model_id", "term", "estimate", "std_error", "z", "p", "ci_low", "ci_high"],
        rows,
    )
}

pub fn variance_csv(fits: &[ModelFit]) -> Vec<u8> {
    let mut rows = Vec::new();
    for f in fits {
        for (factor, v) in [("child", f.fit.variance_child), ("word", f.fit.variance_word)] {
            if let Some(v) = v {
                rows.push(vec![f.age_months.to_string(), f.model.to_string(), factor.into(), num(v)]);
            }
        }
    }
    csv_bytes(&["age_months", "model_id", "factor", "variance"], rows)
}

pub fn convergence_csv(fits: &[ModelFit]) -> Vec<u8> {
    let rows = fits.iter().map(|f| {
        let c = f.fit.convergence;
        vec![
            f.age_months.to_string(),
            f.model.to_string(),
            c.status.to_string(),
            c.iterations.to_string(),
            num(c.gradient_norm),
            num(f.fit.log_likelihood),
            f.rows.to_string(),
            f.dropped_rows.to_string(),
        ]
    });
    csv_bytes(
        &[
            "age_months",
            "model_id",
            "status",
            "iterations",
            "gradient_norm",
            "log_likelihood",
            "n_rows",
            "dropped_rows",
        ],
        rows,
    )
}

pub fn item_errors_csv(fits: &[ModelFit], lexicon: &Lexicon) -> Vec<u8> {
    let rows = fits.iter().filter_map(|f| f.items.as_ref().map(|r| (f, r))).flat_map(|(f, r)| {
        r.items.iter().map(move |it| {
            vec![
                lexicon.word(it.word_index).to_string(),
                lexicon.class(it.word_index).to_string(),
                r.age_months.to_string(),
                num(it.mean_error),
                num(it.mcdip),
                num(it.mean_error_fixed),
                it.n_rows.to_string(),
                f.model.to_string(),
            ]
        })
    });
    csv_bytes(
        &[
            "word",
            "grammatical_class",
            "age_months",
            "mean_error",
            "mcdip",
            "mean_error_fixed",
            "n_rows",
            "model_id",
        ],
        rows,
    )
}

/// pearson(mean_error, MCDIp) per converged fit.
pub fn item_error_correlations_csv(fits: &[ModelFit]) -> Vec<u8> {
    let rows = fits.iter().filter_map(|f| {
        let c = &f.items.as_ref()?.correlation;
        let mut row = vec![f.model.to_string()];
        row.extend(correlation_row(c).into_iter().skip(1));
        Some(row)
    });
    csv_bytes(
        &["model_id", "age_months", "var_a", "var_b", "r", "n", "p", "significant_01"],
        rows,
    )
}

fn pair_cells<'a>(cells: &'a [CorrelationReport]) -> impl Iterator<Item = &'a CorrelationReport> {
    cells
        .iter()
        .filter(|c| c.grouping == Grouping::All && c.var_b != OUTCOME)
}

/// Predictor intercorrelations, one row per pair and one column pair per age.
pub fn table2_csv(cells: &[CorrelationReport], ages: &[u32]) -> Vec<u8> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut by: BTreeMap<(String, String, u32), &CorrelationReport> = BTreeMap::new();
    for c in pair_cells(cells) {
        let key = (c.var_a.clone(), c.var_b.clone());
        if !pairs.contains(&key) {
            pairs.push(key.clone());
        }
        by.insert((key.0, key.1, c.age_months), c);
    }
    let mut header = vec!["var_a".to_string(), "var_b".to_string()];
    for a in ages {
        header.push(format!("r_{a}"));
        header.push(format!("significant_01_{a}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = pairs.iter().map(|(a, b)| {
        let mut row = vec![a.clone(), b.clone()];
        for &age in ages {
            let e = by.get(&(a.clone(), b.clone(), age)).and_then(|c| c.estimate);
            row.push(opt_num(e.map(|e| e.r)));
            row.push(e.map(|e| flag(e.significant_01)).unwrap_or_default());
        }
        row
    });
    csv_bytes(&header, rows)
}

const TERM_HEADER: [&str; 6] = ["estimate", "std_error", "z", "p", "ci_low", "ci_high"];

fn term_values(t: &prokwo_core::regression::TermEstimate) -> [String; 6] {
    [
        num(t.estimate),
        num(t.std_error),
        num(t.z),
        num(t.p),
        num(t.ci_low),
        num(t.ci_high),
    ]
}

/// The predictor term of each single-predictor model, by predictor then age.
pub fn table3_csv(fits: &[ModelFit]) -> Vec<u8> {
    let mut rows = Vec::new();
    for p in Predictor::ALL {
        for f in fits.iter().filter(|f| f.model == ModelSelector::Single(p)) {
            if let Some(t) = f.fit.terms.iter().find(|t| t.term == p.as_str()) {
                let mut row = vec![p.to_string(), f.age_months.to_string()];
                row.extend(term_values(t));
                rows.push(row);
            }
        }
    }
    let mut header = vec!["predictor", "age_months"];
    header.extend(TERM_HEADER);
    csv_bytes(&header, rows)
}

/// Predictor terms of the full model, by age.
pub fn table4_csv(fits: &[ModelFit]) -> Vec<u8> {
    let rows = fits
        .iter()
        .filter(|f| f.model == ModelSelector::Full)
        .flat_map(|f| {
            f.fit.terms.iter().filter(|t| t.term != INTERCEPT).map(move |t| {
                let mut row = vec![f.age_months.to_string(), t.term.clone()];
                row.extend(term_values(t));
                row
            })
        });
    let mut header = vec!["age_months", "term"];
    header.extend(TERM_HEADER);
    csv_bytes(&header, rows)
}

fn outcome_series(cells: &[CorrelationReport], grouping: Grouping) -> Vec<Series> {
    Predictor::ALL
        .iter()
        .map(|p| Series {
            name: p.to_string(),
            points: cells
                .iter()
                .filter(|c| c.grouping == grouping && c.var_b == OUTCOME && c.var_a == p.as_str())
                .map(|c| (f64::from(c.age_months), c.estimate.map(|e| e.r)))
                .collect(),
        })
        .collect()
}

/// Each predictor's correlation with MCDIp by age, with the shuffled baseline.
pub fn figure2_svg(cells: &[CorrelationReport], shuffles: &[ShuffleAge]) -> String {
    let mut series = outcome_series(cells, Grouping::All);
    if !shuffles.is_empty() {
        series.push(Series {
            name: "pro_kwo_shuffled".into(),
            points: shuffles
                .iter()
                .map(|s| (f64::from(s.age_months), Some(s.outcome.mean_r)))
                .collect(),
        });
    }
    let panel = Panel {
        title: "correlation with MCDIp".into(),
        x_label: "age (months)".into(),
        y_label: "r".into(),
        series,
        lines: true,
    };
    figure("Predictor correlations with MCDIp by age", &[panel], 1)
}

/// The same correlations within each grammatical class.
pub fn figure6_svg(cells: &[CorrelationReport]) -> String {
    let panels: Vec<Panel> = GrammaticalClass::ALL
        .into_iter()
        .map(Grouping::Class)
        .filter(|g| cells.iter().any(|c| c.grouping == *g))
        .map(|g| Panel {
            title: g.to_string(),
            x_label: "age (months)".into(),
            y_label: "r".into(),
            series: outcome_series(cells, g),
            lines: true,
        })
        .collect();
    figure("Predictor correlations with MCDIp by grammatical class", &panels, 2)
}

/// Item prediction error against MCDIp, one panel per age, one series per class.
pub fn figure7_svg(fits: &[ModelFit], lexicon: &Lexicon, model: ModelSelector) -> String {
    let panels: Vec<Panel> = fits
        .iter()
        .filter(|f| f.model == model)
        .filter_map(|f| f.items.as_ref())
        .map(|r| Panel {
            title: format!("{model}, {} months", r.age_months),
            x_label: "mean prediction error".into(),
            y_label: "MCDIp".into(),
            series: GrammaticalClass::ALL
                .into_iter()
                .map(|class| Series {
                    name: class.to_string(),
                    points: r
                        .items
                        .iter()
                        .filter(|it| lexicon.class(it.word_index) == class)
                        .map(|it| (it.mean_error, Some(it.mcdip)))
                        .collect(),
                })
                .filter(|s| !s.points.is_empty())
                .collect(),
            lines: false,
        })
        .collect();
    figure("Item prediction error against MCDIp", &panels, 2)
}

/// Predictor correlogram at one age, over all words.
pub fn correlogram_svg(cells: &[CorrelationReport], age: u32) -> String {
    let names: Vec<&str> = Predictor::ALL.iter().map(|p| p.as_str()).collect();
    let mut m = vec![vec![None; names.len()]; names.len()];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Some(1.0);
    }
    for c in pair_cells(cells).filter(|c| c.age_months == age) {
        let i = names.iter().position(|n| *n == c.var_a);
        let j = names.iter().position(|n| *n == c.var_b);
        if let (Some(i), Some(j)) = (i, j) {
            let r = c.estimate.map(|e| e.r);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    correlogram(&format!("Predictor correlations at {age} months"), &names, &m)
}
