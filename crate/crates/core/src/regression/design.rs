use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::FitError;
use crate::distributional::{Predictor, PredictorTable};
use crate::lexicon::ProductionRecord;
use crate::stats::{mean, sample_sd};

/// Name of the intercept term.
pub const INTERCEPT: &str = "(Intercept)";

/// Which model to fit at which age.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub age_months: u32,
    pub predictors: Vec<Predictor>,
    pub random_child: bool,
    pub random_word: bool,
}

impl ModelSpec {
    pub fn single(age_months: u32, predictor: Predictor) -> Self {
        Self {
            age_months,
            predictors: alloc::vec![predictor],
            random_child: true,
            random_word: true,
        }
    }

    pub fn full(age_months: u32) -> Self {
        Self {
            age_months,
            predictors: Predictor::ALL.to_vec(),
            random_child: true,
            random_word: true,
        }
    }

    /// `single:<predictor>`, `full`, or `custom:<a>+<b>...`.
    pub fn model_id(&self) -> String {
        match self.predictors.as_slice() {
            [p] => format!("single:{p}"),
            ps if ps == Predictor::ALL => "full".to_string(),
            ps => {
                let names: Vec<&str> = ps.iter().map(|p| p.as_str()).collect();
                format!("custom:{}", names.join("+"))
            }
        }
    }
}

/// Observation rows of one model: intercept plus standardized predictors,
/// binary outcomes, and dense child/word group indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub age_months: u32,
    pub term_names: Vec<String>,
    /// Row-major `n_rows x n_fixed`.
    pub x: Vec<f64>,
    /// 0.0 or 1.0.
    pub y: Vec<f64>,
    pub child: Vec<usize>,
    pub word: Vec<usize>,
    /// Child id of each dense child index.
    pub child_ids: Vec<Arc<str>>,
    /// Lexicon index of each dense word index.
    pub word_lexicon: Vec<usize>,
    /// Records dropped because a predictor was missing for their word.
    pub dropped_rows: usize,
    /// Raw-scale mean and sd of each predictor column (intercept excluded).
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
}

impl DesignMatrix {
    /// Assemble a design from raw parts, without standardizing anything.
    /// Group labels are taken as already dense.
    pub fn from_parts(
        x: Vec<f64>,
        term_names: Vec<String>,
        y: Vec<f64>,
        child: Vec<usize>,
        word: Vec<usize>,
    ) -> Result<Self, FitError> {
        let p = term_names.len();
        let n = y.len();
        if p == 0 || x.len() != n * p || child.len() != n || word.len() != n {
            return Err(FitError::InvalidDesign("dimension mismatch"));
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(FitError::InvalidDesign("outcomes must be 0 or 1"));
        }
        let n_children = child.iter().max().map_or(0, |m| m + 1);
        let n_words = word.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            age_months: 0,
            term_names,
            x,
            y,
            child,
            word,
            child_ids: (0..n_children).map(|i| Arc::from(format!("{i}").as_str())).collect(),
            word_lexicon: (0..n_words).collect(),
            dropped_rows: 0,
            centers: Vec::new(),
            scales: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_fixed(&self) -> usize {
        self.term_names.len()
    }

    pub fn n_children(&self) -> usize {
        self.child_ids.len()
    }

    pub fn n_words(&self) -> usize {
        self.word_lexicon.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_fixed();
        &self.x[i * p..(i + 1) * p]
    }

    /// X·beta for every row.
    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.row(i).iter().zip(beta).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Join production records at the model's age with the predictor table.
///
/// Records whose word lacks any selected predictor are dropped; the retained
/// predictor columns are standardized over rows (sample sd).
pub fn build_design(
    records: &[ProductionRecord],
    table: &PredictorTable,
    spec: &ModelSpec,
) -> Result<DesignMatrix, FitError> {
    if spec.predictors.is_empty() {
        return Err(FitError::EmptyModel);
    }
    let age = spec.age_months;
    let rows = table.at_age(age).ok_or(FitError::AgeNotInTable(age))?;

    let mut raw: Vec<Vec<f64>> = alloc::vec![Vec::new(); spec.predictors.len()];
    let mut kept: Vec<&ProductionRecord> = Vec::new();
    let mut dropped_rows = 0;
    for rec in records.iter().filter(|r| r.age_months == age) {
        let Some(row) = rows.get(rec.word_index) else {
            return Err(FitError::InvalidDesign("record word index outside predictor table"));
        };
        let values: Option<Vec<f64>> = spec.predictors.iter().map(|&p| row.value(p)).collect();
        match values {
            Some(vals) => {
                for (col, v) in raw.iter_mut().zip(vals) {
                    col.push(v);
                }
                kept.push(rec);
            }
            None => dropped_rows += 1,
        }
    }
    if kept.is_empty() {
        return Err(FitError::NoRows(age));
    }

    let mut centers = Vec::with_capacity(raw.len());
    let mut scales = Vec::with_capacity(raw.len());
    for (col, p) in raw.iter().zip(&spec.predictors) {
        let m = mean(col);
        let sd = if col.len() > 1 { sample_sd(col) } else { 0.0 };
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(FitError::ConstantPredictor(p.as_str().to_string()));
        }
        centers.push(m);
        scales.push(sd);
    }

    let child_index: BTreeMap<&Arc<str>, usize> = {
        let mut ids: Vec<&Arc<str>> = kept.iter().map(|r| &r.child_id).collect();
        ids.sort();
        ids.dedup();
        ids.into_iter().enumerate().map(|(i, id)| (id, i)).collect()
    };
    let word_index: BTreeMap<usize, usize> = {
        let mut ws: Vec<usize> = kept.iter().map(|r| r.word_index).collect();
        ws.sort_unstable();
        ws.dedup();
        ws.into_iter().enumerate().map(|(i, w)| (w, i)).collect()
    };

    let p = spec.predictors.len() + 1;
    let mut x = Vec::with_capacity(kept.len() * p);
    for i in 0..kept.len() {
        x.push(1.0);
        for (k, col) in raw.iter().enumerate() {
            x.push((col[i] - centers[k]) / scales[k]);
        }
    }
    let mut term_names = alloc::vec![INTERCEPT.to_string()];
    term_names.extend(spec.predictors.iter().map(|p| p.as_str().to_string()));

    Ok(DesignMatrix {
        age_months: age,
        term_names,
        x,
        y: kept.iter().map(|r| if r.produced { 1.0 } else { 0.0 }).collect(),
        child: kept.iter().map(|r| child_index[&r.child_id]).collect(),
        word: kept.iter().map(|r| word_index[&r.word_index]).collect(),
        child_ids: child_index.keys().map(|id| Arc::clone(id)).collect(),
        word_lexicon: word_index.keys().copied().collect(),
        dropped_rows,
        centers,
        scales,
    })
}
