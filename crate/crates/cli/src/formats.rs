//! Reading and writing the interchange files.
//!
//! Every CSV is written with `\n` line endings and floats in Rust's shortest
//! round-trip form, so values read back are bit-identical to those written.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use prokwo_core::corpus::{
    parse_chat, parse_normalized, Corpus, Document, DocumentRecord, IngestWarning, UtteranceRecord,
};
use prokwo_core::distributional::{MissingReason, Predictor, PredictorRow, PredictorTable};
use prokwo_core::lexicon::{Administration, Lexicon, LexiconRow, McdipTable};
use prokwo_core::MAX_AGE_MONTHS;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_predictor, predictor_column, CorpusFormat, CorpusSource};
use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Float in shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Serialize a header and rows as CSV.
pub fn csv_bytes<I>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// A CSV file loaded in full, with columns looked up by name.
pub struct CsvTable {
    pub path: PathBuf,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::data(path, e))?;
        let headers = reader
            .headers()
            .map_err(|e| CliError::data(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| CliError::data(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Self {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(&self.path, format!("missing column {name:?}")))
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, rec)| Row {
            table: self,
            line: *line,
            rec,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub struct Row<'a> {
    table: &'a CsvTable,
    pub line: u64,
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    pub fn error(&self, field: &str, message: impl std::fmt::Display) -> CliError {
        CliError::data(&self.table.path, format!("line {}, field {field}: {message}", self.line))
    }

    pub fn str(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    pub fn parse<T: std::str::FromStr>(&self, col: usize, field: &str) -> Result<T> {
        let s = self.str(col);
        s.parse().map_err(|_| self.error(field, format!("cannot parse {s:?}")))
    }

    pub fn opt_f64(&self, col: usize, field: &str) -> Result<Option<f64>> {
        match self.str(col) {
            "" => Ok(None),
            s => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| self.error(field, format!("not a finite number: {s:?}"))),
        }
    }

    pub fn bit(&self, col: usize, field: &str) -> Result<bool> {
        match self.str(col) {
            "0" => Ok(false),
            "1" => Ok(true),
            s => Err(self.error(field, format!("expected 0 or 1, got {s:?}"))),
        }
    }
}

// ---------------------------------------------------------------- corpus

#[derive(Debug, Serialize, Deserialize)]
struct JsonDocument {
    doc_id: Option<String>,
    child_age_months: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default)]
    utterances: Vec<JsonUtterance>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonUtterance {
    speaker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

impl From<JsonDocument> for DocumentRecord {
    fn from(d: JsonDocument) -> Self {
        Self {
            doc_id: d.doc_id,
            child_age_months: d.child_age_months,
            source: d.source,
            utterances: d
                .utterances
                .into_iter()
                .map(|u| UtteranceRecord {
                    speaker: u.speaker,
                    tokens: u.tokens,
                    text: u.text,
                })
                .collect(),
        }
    }
}

/// A skipped-document report line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Skipped {
    pub doc_id: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub skipped: Vec<Skipped>,
    pub files: Vec<PathBuf>,
}

fn list_files(root: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    if root.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = std::fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == extension) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `a/b/c.cha` under `root` -> `a/b/c`.
fn doc_id_for(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let rel = if rel.as_os_str().is_empty() {
        Path::new(path.file_name().unwrap_or_default())
    } else {
        rel
    };
    let parts: Vec<String> = rel
        .with_extension("")
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    parts.join("/")
}

pub fn load_corpus(source: &CorpusSource) -> Result<LoadedCorpus> {
    let root = &source.path;
    match source.format {
        CorpusFormat::Chat => {
            let files = list_files(root, "cha")?;
            if files.is_empty() {
                return Err(CliError::data(root, "no .cha files found"));
            }
            let parsed: Vec<(Document, Vec<IngestWarning>)> = files
                .par_iter()
                .map(|path| {
                    let text = read_text(path)?;
                    let id = doc_id_for(root, path);
                    let mut p = parse_chat(&text, &id).map_err(|e| CliError::data(path, e))?;
                    p.document.source = id;
                    Ok((p.document, p.warnings))
                })
                .collect::<Result<_>>()?;
            let mut skipped = Vec::new();
            let mut docs = Vec::with_capacity(parsed.len());
            for (doc, warnings) in parsed {
                skipped.extend(warnings.iter().map(|w| Skipped {
                    doc_id: w.doc_id().to_string(),
                    reason: w.reason().to_string(),
                }));
                docs.push(doc);
            }
            let corpus = Corpus::new(docs).map_err(|e| CliError::data(root, e))?;
            skipped.extend(out_of_range(&corpus));
            Ok(LoadedCorpus {
                corpus,
                skipped,
                files,
            })
        }
        CorpusFormat::Normalized => {
            let files = list_files(root, "jsonl")?;
            if files.is_empty() {
                return Err(CliError::data(root, "no .jsonl files found"));
            }
            let mut records = Vec::new();
            for path in &files {
                for (i, line) in read_text(path)?.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let doc: JsonDocument = serde_json::from_str(line)
                        .map_err(|e| CliError::data(path, format!("line {}: {e}", i + 1)))?;
                    records.push(DocumentRecord::from(doc));
                }
            }
            let corpus = parse_normalized(records).map_err(|e| CliError::data(root, e))?;
            let mut skipped: Vec<Skipped> = corpus
                .documents()
                .iter()
                .filter(|d| d.child_age_months.is_none())
                .map(|d| Skipped {
                    doc_id: d.doc_id.clone(),
                    reason: "missing-age".into(),
                })
                .collect();
            skipped.extend(out_of_range(&corpus));
            Ok(LoadedCorpus {
                corpus,
                skipped,
                files,
            })
        }
    }
}

fn out_of_range(corpus: &Corpus) -> Vec<Skipped> {
    corpus
        .documents()
        .iter()
        .filter(|d| d.child_age_months.is_some_and(|a| a > MAX_AGE_MONTHS))
        .map(|d| Skipped {
            doc_id: d.doc_id.clone(),
            reason: "age-above-range".into(),
        })
        .collect()
}

/// One JSON object per line, in corpus order.
pub fn corpus_jsonl(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    for doc in corpus.documents() {
        let rec = JsonDocument {
            doc_id: Some(doc.doc_id.clone()),
            child_age_months: doc.child_age_months.map(i64::from),
            source: Some(doc.source.clone()),
            utterances: doc
                .utterances
                .iter()
                .map(|u| JsonUtterance {
                    speaker: u.speaker.clone(),
                    tokens: Some(u.tokens.clone()),
                    text: None,
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &rec).expect("writing to memory");
        out.push(b'\n');
    }
    out
}

pub fn skipped_csv(skipped: &[Skipped]) -> Vec<u8> {
    let mut rows = skipped.to_vec();
    rows.sort();
    csv_bytes(&["doc_id", "reason"], rows.into_iter().map(|s| vec![s.doc_id, s.reason]))
}

// ---------------------------------------------------------------- lexicon and surveys

pub fn read_exclusions(path: &Path) -> Result<BTreeSet<String>> {
    Ok(read_text(path)?
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

pub fn read_lexicon(path: &Path, exclusions: Option<&Path>) -> Result<Lexicon> {
    let t = CsvTable::read(path)?;
    let (w, cat, class, ex) = (
        t.column("word")?,
        t.column("mcdi_category")?,
        t.column("grammatical_class")?,
        t.column("excluded")?,
    );
    let mut rows = Vec::with_capacity(t.len());
    for r in t.rows() {
        rows.push(LexiconRow {
            word: r.str(w).to_string(),
            mcdi_category: r.str(cat).to_string(),
            grammatical_class: r.str(class).to_string(),
            excluded: r.bit(ex, "excluded")?,
        });
    }
    let extra = match exclusions {
        Some(p) => read_exclusions(p)?,
        None => BTreeSet::new(),
    };
    let lexicon = Lexicon::load(rows, &extra).map_err(|e| CliError::data(path, e))?;
    if lexicon.is_empty() {
        return Err(CliError::data(path, "no non-excluded words"));
    }
    Ok(lexicon)
}

/// Collect long-format rows into administrations, ordered by (child, age).
///
/// Rows for excluded words are ignored; words absent from the lexicon are an error.
pub fn read_administrations(path: &Path, lexicon: &Lexicon) -> Result<Vec<Administration>> {
    let t = CsvTable::read(path)?;
    let (c, a, w, p) = (
        t.column("child_id")?,
        t.column("age_months")?,
        t.column("word")?,
        t.column("produced")?,
    );
    let mut seen: BTreeMap<(String, u32), BTreeMap<usize, bool>> = BTreeMap::new();
    for r in t.rows() {
        let child = r.str(c);
        if child.is_empty() {
            return Err(r.error("child_id", "empty"));
        }
        let age: u32 = r.parse(a, "age_months")?;
        let word = r.str(w).to_lowercase();
        let produced = r.bit(p, "produced")?;
        let index = match lexicon.index_of(&word) {
            Some(i) => i,
            None if lexicon.is_excluded(&word) => continue,
            None => return Err(r.error("word", format!("{word:?} is not in the lexicon"))),
        };
        let words = seen.entry((child.to_string(), age)).or_default();
        if words.insert(index, produced).is_some() {
            return Err(r.error("word", format!("{word:?} repeated for {child}@{age}")));
        }
    }
    Ok(seen
        .into_iter()
        .map(|((child, age), words)| Administration {
            child_id: Arc::from(child.as_str()),
            age_months: age,
            produced: words.into_iter().filter(|&(_, p)| p).map(|(w, _)| w).collect(),
        })
        .collect())
}

pub fn mcdip_csv(table: &McdipTable, lexicon: &Lexicon) -> Vec<u8> {
    let mut rows = Vec::new();
    for age in table.ages() {
        let slot = table.age(age).expect("listed age");
        for (w, v) in slot.values.iter().enumerate() {
            rows.push(vec![
                age.to_string(),
                lexicon.word(w).to_string(),
                num(*v),
                slot.n_administrations.to_string(),
            ]);
        }
    }
    csv_bytes(&["age_months", "word", "mcdip", "n_administrations"], rows)
}

/// Rebuild the table from mcdip.csv. Producer counts are recovered as
/// `round(mcdip · n)`, so the values match those originally written.
pub fn read_mcdip(path: &Path, lexicon: &Lexicon) -> Result<McdipTable> {
    let t = CsvTable::read(path)?;
    let (a, w, m, n) = (
        t.column("age_months")?,
        t.column("word")?,
        t.column("mcdip")?,
        t.column("n_administrations")?,
    );
    let v = lexicon.len();
    let mut ages: BTreeMap<u32, (usize, Vec<Option<u64>>)> = BTreeMap::new();
    for r in t.rows() {
        let age: u32 = r.parse(a, "age_months")?;
        let word = r.str(w);
        let Some(index) = lexicon.index_of(word) else {
            return Err(r.error("word", format!("{word:?} is not in the lexicon")));
        };
        let value: f64 = r.parse(m, "mcdip")?;
        if !(0.0..=1.0).contains(&value) {
            return Err(r.error("mcdip", format!("{value} outside [0, 1]")));
        }
        let count: usize = r.parse(n, "n_administrations")?;
        let slot = ages.entry(age).or_insert_with(|| (count, vec![None; v]));
        if slot.0 != count {
            return Err(r.error("n_administrations", "differs between rows of the same age"));
        }
        let produced = (value * count as f64).round() as u64;
        if slot.1[index].replace(produced).is_some() {
            return Err(r.error("word", format!("{word:?} repeated at age {age}")));
        }
    }
    let mut complete = Vec::with_capacity(ages.len());
    for (age, (n, counts)) in ages {
        let counts: Option<Vec<u64>> = counts.iter().copied().collect();
        let counts = counts.ok_or_else(|| CliError::data(path, format!("age {age} does not list every lexicon word")))?;
        complete.push((age, n, counts));
    }
    McdipTable::from_counts(v, complete).map_err(|e| CliError::data(path, e))
}

// ---------------------------------------------------------------- predictors

fn missing_text(missing: &[(Predictor, MissingReason)]) -> String {
    let parts: Vec<String> = missing
        .iter()
        .map(|(p, r)| format!("{}:{r}", predictor_column(*p)))
        .collect();
    parts.join(";")
}

pub fn predictors_csv(table: &PredictorTable, lexicon: &Lexicon) -> Vec<u8> {
    let rows = table.rows().iter().map(|r| {
        vec![
            r.age_months.to_string(),
            lexicon.word(r.word_index).to_string(),
            lexicon.class(r.word_index).to_string(),
            opt_num(r.frequency_log10),
            opt_num(r.lexical_diversity),
            opt_num(r.document_diversity),
            opt_num(r.pro_kwo),
            missing_text(&r.missing),
        ]
    });
    csv_bytes(
        &[
            "age_months",
            "word",
            "grammatical_class",
            "frequency_log10",
            "lexical_diversity",
            "document_diversity",
            "pro_kwo",
            "missing_reason",
        ],
        rows,
    )
}

/// A predictor table read back from predictors.csv, with the predictor
/// columns the file actually carries.
pub struct LoadedPredictors {
    pub table: PredictorTable,
    pub columns: Vec<Predictor>,
    pub path: Option<PathBuf>,
}

impl LoadedPredictors {
    /// Error naming the file when `p` is not one of its columns.
    pub fn require(&self, p: Predictor) -> Result<()> {
        if self.columns.contains(&p) {
            return Ok(());
        }
        let file = self.path.clone().unwrap_or_else(|| PathBuf::from("predictors.csv"));
        Err(CliError::data(
            &file,
            format!("unknown predictor {:?}: no column {:?}", p.as_str(), predictor_column(p)),
        ))
    }
}

pub fn read_predictors(path: &Path, lexicon: &Lexicon) -> Result<LoadedPredictors> {
    let t = CsvTable::read(path)?;
    let (a, w) = (t.column("age_months")?, t.column("word")?);
    let columns: Vec<Predictor> = Predictor::ALL
        .into_iter()
        .filter(|&p| t.has(predictor_column(p)))
        .collect();
    let idx: Vec<Option<usize>> = Predictor::ALL
        .iter()
        .map(|&p| t.column(predictor_column(p)).ok())
        .collect();
    let reason_col = t.column("missing_reason").ok();
    let mut rows = Vec::with_capacity(t.len());
    for r in t.rows() {
        let age: u32 = r.parse(a, "age_months")?;
        let word = r.str(w);
        let Some(index) = lexicon.index_of(word) else {
            return Err(r.error("word", format!("{word:?} is not in the lexicon")));
        };
        let mut values = [None; 4];
        for (k, &p) in Predictor::ALL.iter().enumerate() {
            if let Some(col) = idx[k] {
                let v = r.opt_f64(col, predictor_column(p))?;
                if p != Predictor::Frequency && v.is_some_and(|v| !(0.0..=1.0).contains(&v)) {
                    return Err(r.error(predictor_column(p), "outside [0, 1]"));
                }
                values[k] = v;
            }
        }
        let mut missing = Vec::new();
        if let Some(col) = reason_col {
            for part in r.str(col).split(';').filter(|s| !s.is_empty()) {
                let parsed = part.split_once(':').and_then(|(name, reason)| {
                    Some((parse_predictor(name)?, reason.parse::<MissingReason>().ok()?))
                });
                missing.push(parsed.ok_or_else(|| r.error("missing_reason", format!("cannot parse {part:?}")))?);
            }
        }
        rows.push(PredictorRow {
            age_months: age,
            word_index: index,
            frequency_log10: values[0],
            lexical_diversity: values[1],
            document_diversity: values[2],
            pro_kwo: values[3],
            missing,
        });
    }
    let table = PredictorTable::new(lexicon.len(), rows).map_err(|e| CliError::data(path, e))?;
    Ok(LoadedPredictors {
        table,
        columns,
        path: Some(path.to_path_buf()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 63.0 / 220.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn csv_quoting_and_line_endings() {
        let bytes = csv_bytes(&["a", "b"], [vec!["x,y".to_string(), "z".to_string()]]);
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n\"x,y\",z\n");
    }

    #[test]
    fn doc_ids_use_relative_paths() {
        let root = Path::new("/data/corpus");
        assert_eq!(doc_id_for(root, Path::new("/data/corpus/brown/adam01.cha")), "brown/adam01");
        assert_eq!(doc_id_for(Path::new("/x/a.cha"), Path::new("/x/a.cha")), "a");
    }

    #[test]
    fn missing_reasons_format() {
        let m = [
            (Predictor::Frequency, MissingReason::ZeroFrequency),
            (Predictor::ProKwo, MissingReason::NoCooccurrence),
        ];
        assert_eq!(missing_text(&m), "frequency_log10:zero-frequency;pro_kwo:no-cooccurrence");
    }
}
