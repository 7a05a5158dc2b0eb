//! The checklist word list and survey-derived production data.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::normalize_tokens;
use crate::{age_in_range, MAX_AGE_MONTHS, MIN_AGE_MONTHS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("word {0:?} appears more than once among non-excluded entries")]
    DuplicateWord(String),
    #[error("word {word:?}: unknown grammatical class {label:?}")]
    UnknownClass { word: String, label: String },
    #[error("word {0:?} is not a single normalized token")]
    NotNormalForm(String),
    #[error("administration {child_id}@{age}: age outside {MIN_AGE_MONTHS}..={MAX_AGE_MONTHS} months")]
    AgeOutOfRange { child_id: String, age: u32 },
    #[error("administration {child_id}@{age}: word index {index} outside lexicon of {len}")]
    IndexOutOfRange {
        child_id: String,
        age: u32,
        index: usize,
        len: usize,
    },
    #[error("administration {child_id}@{age} given twice")]
    DuplicateAdministration { child_id: String, age: u32 },
    #[error("MCDIp table age {0} outside {MIN_AGE_MONTHS}..={MAX_AGE_MONTHS} months")]
    TableAgeOutOfRange(u32),
    #[error("MCDIp counts for age {0} are inconsistent")]
    InconsistentCounts(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GrammaticalClass {
    Noun,
    Verb,
    Adjective,
    FunctionWord,
    Other,
}

impl GrammaticalClass {
    pub const ALL: [GrammaticalClass; 5] = [
        Self::Noun,
        Self::Verb,
        Self::Adjective,
        Self::FunctionWord,
        Self::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Noun => "noun",
            Self::Verb => "verb",
            Self::Adjective => "adjective",
            Self::FunctionWord => "function_word",
            Self::Other => "other",
        }
    }
}

impl fmt::Display for GrammaticalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GrammaticalClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

/// A lexicon file row before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconRow {
    pub word: String,
    pub mcdi_category: String,
    pub grammatical_class: String,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub word: String,
    pub mcdi_category: String,
    pub grammatical_class: GrammaticalClass,
    pub excluded: bool,
}

/// Checklist words in file order. Non-excluded entries get dense indices
/// `0..len()`, which are the row/column indices of every per-word vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    active: Vec<usize>,
    index: BTreeMap<String, usize>,
}

impl Lexicon {
    /// Validate rows and flag entries whose word is in `exclusions`.
    pub fn load(rows: Vec<LexiconRow>, exclusions: &BTreeSet<String>) -> Result<Self, LexiconError> {
        let mut entries = Vec::with_capacity(rows.len());
        let mut active = Vec::new();
        let mut index = BTreeMap::new();
        for row in rows {
            let word = row.word.trim().to_lowercase();
            let grammatical_class = row
                .grammatical_class
                .trim()
                .parse()
                .map_err(|()| LexiconError::UnknownClass {
                    word: word.clone(),
                    label: row.grammatical_class.clone(),
                })?;
            let excluded = row.excluded || exclusions.contains(&word);
            if !excluded {
                if normalize_tokens(&word) != [word.as_str()] {
                    return Err(LexiconError::NotNormalForm(word));
                }
                if index.insert(word.clone(), active.len()).is_some() {
                    return Err(LexiconError::DuplicateWord(word));
                }
                active.push(entries.len());
            }
            entries.push(LexiconEntry {
                word,
                mcdi_category: row.mcdi_category,
                grammatical_class,
                excluded,
            });
        }
        Ok(Self {
            entries,
            active,
            index,
        })
    }

    /// Number of non-excluded words.
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Every row, excluded ones included.
    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Entry for dense index `i`.
    pub fn entry(&self, i: usize) -> &LexiconEntry {
        &self.entries[self.active[i]]
    }

    pub fn word(&self, i: usize) -> &str {
        &self.entry(i).word
    }

    pub fn class(&self, i: usize) -> GrammaticalClass {
        self.entry(i).grammatical_class
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// `true` when `word` is listed but excluded.
    pub fn is_excluded(&self, word: &str) -> bool {
        self.index_of(word).is_none() && self.entries.iter().any(|e| e.excluded && e.word == word)
    }
}

/// One child's checklist at one age.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Administration {
    pub child_id: Arc<str>,
    pub age_months: u32,
    /// Dense lexicon indices of words the child produces.
    pub produced: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgeMcdip {
    pub n_administrations: usize,
    /// Producer counts per word.
    pub counts: Vec<u64>,
    /// `counts[w] / n_administrations`.
    pub values: Vec<f64>,
}

/// Per-age proportion of children producing each word.
#[derive(Debug, Clone, PartialEq)]
pub struct McdipTable {
    by_age: BTreeMap<u32, AgeMcdip>,
    len: usize,
}

impl McdipTable {
    pub fn age(&self, age: u32) -> Option<&AgeMcdip> {
        self.by_age.get(&age)
    }

    /// MCDIp vector at `age`, or `None` when nobody was surveyed at that age.
    pub fn row(&self, age: u32) -> Option<&[f64]> {
        self.by_age.get(&age).map(|a| a.values.as_slice())
    }

    pub fn is_available(&self, age: u32) -> bool {
        self.by_age.contains_key(&age)
    }

    /// Ages with at least one administration, ascending.
    pub fn ages(&self) -> impl Iterator<Item = u32> + '_ {
        self.by_age.keys().copied()
    }

    pub fn word_count(&self) -> usize {
        self.len
    }

    /// Rebuild a table from per-age `(age, n_administrations, producer counts)`.
    pub fn from_counts<I>(words: usize, ages: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (u32, usize, Vec<u64>)>,
    {
        let mut by_age = BTreeMap::new();
        for (age, n, counts) in ages {
            if !age_in_range(age) {
                return Err(LexiconError::TableAgeOutOfRange(age));
            }
            if n == 0 || counts.len() != words || counts.iter().any(|&c| c > n as u64) {
                return Err(LexiconError::InconsistentCounts(age));
            }
            let values = counts.iter().map(|&c| c as f64 / n as f64).collect();
            let slot = AgeMcdip {
                n_administrations: n,
                counts,
                values,
            };
            if by_age.insert(age, slot).is_some() {
                return Err(LexiconError::InconsistentCounts(age));
            }
        }
        Ok(Self { by_age, len: words })
    }
}

fn validate(admins: &[Administration], lexicon: &Lexicon) -> Result<(), LexiconError> {
    let mut seen = BTreeSet::new();
    for a in admins {
        if !age_in_range(a.age_months) {
            return Err(LexiconError::AgeOutOfRange {
                child_id: a.child_id.to_string(),
                age: a.age_months,
            });
        }
        if let Some(&index) = a.produced.iter().next_back() {
            if index >= lexicon.len() {
                return Err(LexiconError::IndexOutOfRange {
                    child_id: a.child_id.to_string(),
                    age: a.age_months,
                    index,
                    len: lexicon.len(),
                });
            }
        }
        if !seen.insert((a.child_id.clone(), a.age_months)) {
            return Err(LexiconError::DuplicateAdministration {
                child_id: a.child_id.to_string(),
                age: a.age_months,
            });
        }
    }
    Ok(())
}

/// Group administrations by exact month and tally producers per word.
pub fn compute_mcdip(admins: &[Administration], lexicon: &Lexicon) -> Result<McdipTable, LexiconError> {
    validate(admins, lexicon)?;
    let v = lexicon.len();
    let mut by_age: BTreeMap<u32, AgeMcdip> = BTreeMap::new();
    for a in admins {
        let slot = by_age.entry(a.age_months).or_insert_with(|| AgeMcdip {
            n_administrations: 0,
            counts: vec![0; v],
            values: Vec::new(),
        });
        slot.n_administrations += 1;
        for &w in &a.produced {
            slot.counts[w] += 1;
        }
    }
    for slot in by_age.values_mut() {
        let n = slot.n_administrations as f64;
        slot.values = slot.counts.iter().map(|&c| c as f64 / n).collect();
    }
    Ok(McdipTable { by_age, len: v })
}

/// One binary outcome: did this child produce this word at this age.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductionRecord {
    pub child_id: Arc<str>,
    pub age_months: u32,
    pub word_index: usize,
    pub produced: bool,
}

/// Expand administrations into one record per (administration, word).
pub fn production_records(
    admins: &[Administration],
    lexicon: &Lexicon,
) -> Result<Vec<ProductionRecord>, LexiconError> {
    validate(admins, lexicon)?;
    let v = lexicon.len();
    let mut out = Vec::with_capacity(admins.len() * v);
    for a in admins {
        out.extend((0..v).map(|w| ProductionRecord {
            child_id: a.child_id.clone(),
            age_months: a.age_months,
            word_index: w,
            produced: a.produced.contains(&w),
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(word: &str, class: &str) -> LexiconRow {
        LexiconRow {
            word: word.into(),
            mcdi_category: "cat".into(),
            grammatical_class: class.into(),
            excluded: false,
        }
    }

    fn lex(words: &[&str]) -> Lexicon {
        Lexicon::load(words.iter().map(|w| row(w, "noun")).collect(), &BTreeSet::new()).unwrap()
    }

    fn admin(child: &str, age: u32, produced: &[usize]) -> Administration {
        Administration {
            child_id: child.into(),
            age_months: age,
            produced: produced.iter().copied().collect(),
        }
    }

    #[test]
    fn dense_indices_follow_file_order() {
        let l = lex(&["dog", "ball", "cup"]);
        assert_eq!(l.len(), 3);
        assert_eq!(l.index_of("ball"), Some(1));
        assert_eq!(l.word(2), "cup");
    }

    #[test]
    fn exclusions_drop_out_of_the_index() {
        let rows = vec![row("can", "verb"), row("can", "noun"), row("dog", "noun"), row("eat", "verb")];
        let excl: BTreeSet<String> = ["can".to_string()].into_iter().collect();
        let l = Lexicon::load(rows, &excl).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.entries().len(), 4);
        assert_eq!(l.index_of("dog"), Some(0));
        assert_eq!(l.index_of("can"), None);
        assert!(l.is_excluded("can"));
        assert!(!l.is_excluded("zebra"));
    }

    #[test]
    fn excluded_column_is_honoured() {
        let mut r = row("teddy bear", "noun");
        r.excluded = true;
        let l = Lexicon::load(vec![r, row("dog", "noun")], &BTreeSet::new()).unwrap();
        assert_eq!(l.len(), 1);
    }

    #[test]
    fn duplicate_and_bad_class_errors() {
        let dup = Lexicon::load(vec![row("dog", "noun"), row("dog", "noun")], &BTreeSet::new());
        assert_eq!(dup.unwrap_err(), LexiconError::DuplicateWord("dog".into()));
        let bad = Lexicon::load(vec![row("dog", "animal")], &BTreeSet::new());
        assert!(matches!(bad, Err(LexiconError::UnknownClass { .. })));
        let compound = Lexicon::load(vec![row("french fries", "noun")], &BTreeSet::new());
        assert!(matches!(compound, Err(LexiconError::NotNormalForm(_))));
    }

    #[test]
    fn words_are_lowercased() {
        let l = lex(&["Dog"]);
        assert_eq!(l.word(0), "dog");
    }

    #[test]
    fn mcdip_is_a_per_month_proportion() {
        let l = lex(&["dog", "cat", "cup"]);
        let admins = [
            admin("a", 24, &[0, 2]),
            admin("b", 24, &[0, 2]),
            admin("c", 24, &[0, 2]),
            admin("d", 24, &[2]),
            admin("a", 18, &[]),
        ];
        let t = compute_mcdip(&admins, &l).unwrap();
        assert_eq!(t.row(24).unwrap(), &[0.75, 0.0, 1.0]);
        assert_eq!(t.age(24).unwrap().n_administrations, 4);
        assert_eq!(t.row(18).unwrap(), &[0.0, 0.0, 0.0]);
        assert!(!t.is_available(20));
        assert_eq!(t.ages().collect::<Vec<_>>(), [18, 24]);
    }

    #[test]
    fn invalid_administrations() {
        let l = lex(&["dog"]);
        assert!(matches!(
            compute_mcdip(&[admin("a", 31, &[])], &l),
            Err(LexiconError::AgeOutOfRange { .. })
        ));
        assert!(matches!(
            compute_mcdip(&[admin("a", 20, &[1])], &l),
            Err(LexiconError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            compute_mcdip(&[admin("a", 20, &[]), admin("a", 20, &[0])], &l),
            Err(LexiconError::DuplicateAdministration { .. })
        ));
    }

    #[test]
    fn records_cover_every_word() {
        let l = lex(&["dog", "cat", "cup"]);
        let recs = production_records(&[admin("a", 20, &[1]), admin("b", 20, &[])], &l).unwrap();
        assert_eq!(recs.len(), 6);
        assert_eq!(recs.iter().filter(|r| r.produced).count(), 1);
        assert!(recs[1].produced);
        assert!(recs[3..].iter().all(|r| !r.produced));
    }

    #[test]
    fn table_round_trips_through_counts() {
        let l = lex(&["dog", "cat", "cup"]);
        let t = compute_mcdip(&[admin("a", 20, &[1, 2]), admin("b", 20, &[1]), admin("c", 22, &[0])], &l).unwrap();
        let rebuilt = McdipTable::from_counts(
            3,
            t.ages().map(|a| {
                let s = t.age(a).unwrap();
                (a, s.n_administrations, s.counts.clone())
            }),
        )
        .unwrap();
        assert_eq!(rebuilt, t);
        assert!(McdipTable::from_counts(3, [(20, 1, alloc::vec![2, 0, 0])]).is_err());
        assert!(McdipTable::from_counts(3, [(40, 1, alloc::vec![0, 0, 0])]).is_err());
    }
}
