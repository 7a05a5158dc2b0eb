//! Qualitative agreement with the reference full-data pattern.
//!
//! Exact coefficients depend on optimizer details that are not reported, so only the
//! shape of the results is compared: which predictor tracks MCDIp best, the
//! sign, significance and growth of the Pro-KWo effect, and the signs of the
//! predictor intercorrelations.

use std::path::Path;

use crate::error::Result;
use crate::formats::CsvTable;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub grouping: String,
    pub age_months: u32,
    pub var_a: String,
    pub var_b: String,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub age_months: u32,
    pub model_id: String,
    pub term: String,
    pub estimate: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const PREDICTORS: [&str; 4] = ["frequency", "lexical_diversity", "document_diversity", "pro_kwo"];

/// Expected sign of each predictor intercorrelation.
const SIGNS: [(&str, &str, f64); 6] = [
    ("frequency", "lexical_diversity", 1.0),
    ("frequency", "document_diversity", 1.0),
    ("lexical_diversity", "document_diversity", 1.0),
    ("frequency", "pro_kwo", -1.0),
    ("lexical_diversity", "pro_kwo", -1.0),
    ("document_diversity", "pro_kwo", -1.0),
];

pub fn read_correlations(path: &Path) -> Result<Vec<CorrelationRow>> {
    let t = CsvTable::read(path)?;
    let (g, a, va, vb, r) = (
        t.column("grouping")?,
        t.column("age_months")?,
        t.column("var_a")?,
        t.column("var_b")?,
        t.column("r")?,
    );
    t.rows()
        .map(|row| {
            Ok(CorrelationRow {
                grouping: row.str(g).to_string(),
                age_months: row.parse(a, "age_months")?,
                var_a: row.str(va).to_string(),
                var_b: row.str(vb).to_string(),
                r: row.opt_f64(r, "r")?,
            })
        })
        .collect()
}

pub fn read_fits(path: &Path) -> Result<Vec<FitRow>> {
    let t = CsvTable::read(path)?;
    let (a, m, term, e, p) = (
        t.column("age_months")?,
        t.column("model_id")?,
        t.column("term")?,
        t.column("estimate")?,
        t.column("p")?,
    );
    t.rows()
        .map(|row| {
            Ok(FitRow {
                age_months: row.parse(a, "age_months")?,
                model_id: row.str(m).to_string(),
                term: row.str(term).to_string(),
                estimate: row.parse(e, "estimate")?,
                p: row.parse(p, "p")?,
            })
        })
        .collect()
}

fn ages(rows: &[CorrelationRow]) -> Vec<u32> {
    let mut a: Vec<u32> = rows.iter().map(|r| r.age_months).collect();
    a.sort_unstable();
    a.dedup();
    a
}

fn outcome_r(rows: &[CorrelationRow], age: u32, predictor: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.grouping == "all" && r.age_months == age && r.var_a == predictor && r.var_b == "mcdip")
        .and_then(|r| r.r)
}

fn pair_r(rows: &[CorrelationRow], age: u32, a: &str, b: &str) -> Option<f64> {
    rows.iter()
        .find(|r| {
            r.grouping == "all"
                && r.age_months == age
                && ((r.var_a == a && r.var_b == b) || (r.var_a == b && r.var_b == a))
        })
        .and_then(|r| r.r)
}

/// Pro-KWo has the largest correlation with MCDIp at every age.
pub fn pro_kwo_strongest(rows: &[CorrelationRow]) -> CheckOutcome {
    let mut failures = Vec::new();
    let all_ages = ages(rows);
    for &age in &all_ages {
        match outcome_r(rows, age, "pro_kwo") {
            None => failures.push(format!("{age}: no pro_kwo correlation")),
            Some(pk) => {
                for other in &PREDICTORS[..3] {
                    if let Some(r) = outcome_r(rows, age, other) {
                        if r >= pk {
                            failures.push(format!("{age}: {other} {r:.3} >= pro_kwo {pk:.3}"));
                        }
                    }
                }
            }
        }
    }
    outcome("pro_kwo_strongest_with_mcdip", &all_ages, failures)
}

/// Single-predictor Pro-KWo effects are positive, p < 0.001, and larger at
/// the oldest age than at the youngest.
pub fn pro_kwo_effects(fits: &[FitRow]) -> CheckOutcome {
    let mut effects: Vec<&FitRow> = fits
        .iter()
        .filter(|f| f.model_id == "single:pro_kwo" && f.term == "pro_kwo")
        .collect();
    effects.sort_by_key(|f| f.age_months);
    let all_ages: Vec<u32> = effects.iter().map(|f| f.age_months).collect();
    let mut failures = Vec::new();
    if effects.len() < 2 {
        failures.push("need single:pro_kwo fits at two or more ages".to_string());
    }
    for f in &effects {
        if !(f.estimate > 0.0) {
            failures.push(format!("{}: estimate {:.3} not positive", f.age_months, f.estimate));
        }
        if !(f.p < 0.001) {
            failures.push(format!("{}: p {:.2e} not below 0.001", f.age_months, f.p));
        }
    }
    if let (Some(first), Some(last)) = (effects.first(), effects.last()) {
        if effects.len() >= 2 && !(last.estimate > first.estimate) {
            failures.push(format!(
                "estimate does not grow: {} at {} vs {} at {}",
                first.estimate, first.age_months, last.estimate, last.age_months
            ));
        }
    }
    outcome("pro_kwo_effect_positive_significant_growing", &all_ages, failures)
}

/// Diversity measures and frequency correlate positively with each other and
/// negatively with Pro-KWo.
pub fn intercorrelation_signs(rows: &[CorrelationRow]) -> CheckOutcome {
    let all_ages = ages(rows);
    let mut failures = Vec::new();
    for &age in &all_ages {
        for (a, b, sign) in SIGNS {
            match pair_r(rows, age, a, b) {
                Some(r) if r * sign > 0.0 => {}
                Some(r) => failures.push(format!("{age}: {a}~{b} = {r:.3}")),
                None => failures.push(format!("{age}: {a}~{b} unavailable")),
            }
        }
    }
    outcome("intercorrelation_signs", &all_ages, failures)
}

fn outcome(name: &'static str, ages: &[u32], failures: Vec<String>) -> CheckOutcome {
    let passed = failures.is_empty() && !ages.is_empty();
    let detail = if passed {
        let a: Vec<String> = ages.iter().map(u32::to_string).collect();
        format!("ages {}", a.join(","))
    } else if failures.is_empty() {
        "no ages to check".to_string()
    } else {
        failures.join("; ")
    };
    CheckOutcome { name, passed, detail }
}

pub fn run_checks(correlations: &[CorrelationRow], fits: &[FitRow]) -> Vec<CheckOutcome> {
    vec![
        pro_kwo_strongest(correlations),
        pro_kwo_effects(fits),
        intercorrelation_signs(correlations),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(age: u32, a: &str, b: &str, r: f64) -> CorrelationRow {
        CorrelationRow {
            grouping: "all".into(),
            age_months: age,
            var_a: a.into(),
            var_b: b.into(),
            r: Some(r),
        }
    }

    fn fit(age: u32, estimate: f64, p: f64) -> FitRow {
        FitRow {
            age_months: age,
            model_id: "single:pro_kwo".into(),
            term: "pro_kwo".into(),
            estimate,
            p,
        }
    }

    fn agreeing() -> (Vec<CorrelationRow>, Vec<FitRow>) {
        let mut c = Vec::new();
        for age in [18, 24, 30] {
            for (a, b, s) in SIGNS {
                c.push(corr(age, a, b, 0.3 * s));
            }
            for (k, p) in PREDICTORS.iter().enumerate() {
                c.push(corr(age, p, "mcdip", 0.1 * k as f64));
            }
        }
        (c, vec![fit(18, 5.9, 1e-30), fit(24, 6.1, 1e-40), fit(30, 9.3, 1e-50)])
    }

    #[test]
    fn agreeing_reports_pass() {
        let (c, f) = agreeing();
        assert!(run_checks(&c, &f).iter().all(|o| o.passed));
    }

    #[test]
    fn each_violation_is_caught() {
        let (mut c, f) = agreeing();
        c.iter_mut()
            .find(|r| r.age_months == 24 && r.var_a == "frequency" && r.var_b == "mcdip")
            .unwrap()
            .r = Some(0.9);
        assert!(!pro_kwo_strongest(&c).passed);

        let (c, mut f2) = agreeing();
        f2[2].estimate = 5.0;
        assert!(!pro_kwo_effects(&f2).passed);
        f2 = f.clone();
        f2[1].p = 0.01;
        assert!(!pro_kwo_effects(&f2).passed);

        let mut c2 = c.clone();
        c2.iter_mut().find(|r| r.var_b == "pro_kwo").unwrap().r = Some(0.05);
        assert!(!intercorrelation_signs(&c2).passed);
    }

    #[test]
    fn empty_inputs_fail() {
        assert!(run_checks(&[], &[]).iter().all(|o| !o.passed));
    }
}
