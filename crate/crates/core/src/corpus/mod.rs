//! Transcript ingestion: documents, utterances, and cumulative age slices.

mod chat;
mod tokens;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use chat::{parse_age, parse_chat, ParsedChat};
pub use tokens::normalize_tokens;

use crate::{age_in_range, MAX_AGE_MONTHS, MIN_AGE_MONTHS};

/// Speaker code CHAT uses for the target child.
pub const TARGET_CHILD: &str = "CHI";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("{doc_id}: line {line}: utterance tier has no speaker code terminated by ':'")]
    MalformedUtterance { doc_id: String, line: usize },
    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),
    #[error("record {record}: missing doc_id")]
    MissingDocId { record: usize },
    #[error("{doc_id}: negative child_age_months {age}")]
    NegativeAge { doc_id: String, age: i64 },
    #[error("{doc_id}: utterance {utterance} has neither tokens nor text")]
    EmptyUtteranceRecord { doc_id: String, utterance: usize },
    #[error("age cutoff {0} outside {MIN_AGE_MONTHS}..={MAX_AGE_MONTHS} months")]
    CutoffOutOfRange(u32),
}

/// Non-fatal problems found while reading a transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    MissingTargetChild { doc_id: String },
    UnreadableAge { doc_id: String },
}

impl IngestWarning {
    pub fn doc_id(&self) -> &str {
        match self {
            Self::MissingTargetChild { doc_id } | Self::UnreadableAge { doc_id } => doc_id,
        }
    }

    pub fn reason(&self) -> &'static str {
        match self {
            Self::MissingTargetChild { .. } => "missing-target-child-id",
            Self::UnreadableAge { .. } => "unreadable-age",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub speaker: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub child_age_months: Option<u32>,
    pub utterances: Vec<Utterance>,
    /// Where the document came from (file path, `chat`, ...).
    pub source: String,
}

/// A set of documents with unique ids, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self, IngestError> {
        let mut seen = BTreeSet::new();
        for doc in &documents {
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(IngestError::DuplicateDocId(doc.doc_id.clone()));
            }
        }
        Ok(Self { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Append the documents of `other`, rejecting any id already present.
    pub fn merge(mut self, other: Corpus) -> Result<Self, IngestError> {
        self.documents.extend(other.documents);
        Self::new(self.documents)
    }

    /// Documents usable at the oldest cutoff: age known and within range.
    ///
    /// This is the fixed denominator of document diversity.
    pub fn eligible_document_count(&self) -> usize {
        self.documents
            .iter()
            .filter(|d| matches!(d.child_age_months, Some(a) if a <= MAX_AGE_MONTHS))
            .count()
    }
}

/// Which utterances count toward corpus statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeakerFilter {
    /// Everything except the target child's own speech.
    #[default]
    ExcludeTargetChild,
    AllSpeakers,
}

impl SpeakerFilter {
    pub fn admits(self, speaker: &str) -> bool {
        match self {
            Self::ExcludeTargetChild => speaker != TARGET_CHILD,
            Self::AllSpeakers => true,
        }
    }
}

impl fmt::Display for SpeakerFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExcludeTargetChild => "exclude-target-child",
            Self::AllSpeakers => "all-speakers",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedDocument {
    pub doc_id: String,
    pub reason: &'static str,
}

/// Documents recorded for children no older than `age_cutoff_months`.
#[derive(Debug, Clone)]
pub struct CorpusSlice<'a> {
    pub age_cutoff_months: u32,
    pub documents: Vec<&'a Document>,
    pub speaker_filter: SpeakerFilter,
    /// Documents left out because their age is unknown.
    pub skipped: Vec<SkippedDocument>,
}

impl<'a> CorpusSlice<'a> {
    /// Utterances of the slice that pass the speaker filter.
    pub fn utterances(&self) -> impl Iterator<Item = &'a Utterance> + '_ {
        let filter = self.speaker_filter;
        self.documents
            .iter()
            .flat_map(|d| d.utterances.iter())
            .filter(move |u| filter.admits(&u.speaker))
    }
}

pub fn cumulative_slice(
    corpus: &Corpus,
    age_cutoff_months: u32,
    speaker_filter: SpeakerFilter,
) -> Result<CorpusSlice<'_>, IngestError> {
    if !age_in_range(age_cutoff_months) {
        return Err(IngestError::CutoffOutOfRange(age_cutoff_months));
    }
    let mut documents = Vec::new();
    let mut skipped = Vec::new();
    for doc in corpus.documents() {
        match doc.child_age_months {
            Some(age) if age <= age_cutoff_months => documents.push(doc),
            Some(_) => {}
            None => skipped.push(SkippedDocument {
                doc_id: doc.doc_id.clone(),
                reason: "missing-age",
            }),
        }
    }
    Ok(CorpusSlice {
        age_cutoff_months,
        documents,
        speaker_filter,
        skipped,
    })
}

/// One document of the line-delimited normalized format.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentRecord {
    pub doc_id: Option<String>,
    pub child_age_months: Option<i64>,
    pub source: Option<String>,
    pub utterances: Vec<UtteranceRecord>,
}

/// An utterance given either pre-tokenized or as raw text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UtteranceRecord {
    pub speaker: String,
    pub tokens: Option<Vec<String>>,
    pub text: Option<String>,
}

impl From<&Document> for DocumentRecord {
    fn from(doc: &Document) -> Self {
        Self {
            doc_id: Some(doc.doc_id.clone()),
            child_age_months: doc.child_age_months.map(i64::from),
            source: Some(doc.source.clone()),
            utterances: doc
                .utterances
                .iter()
                .map(|u| UtteranceRecord {
                    speaker: u.speaker.clone(),
                    tokens: Some(u.tokens.clone()),
                    text: None,
                })
                .collect(),
        }
    }
}

/// Build a corpus from normalized records.
///
/// Token lists are only lowercased; raw text goes through [`normalize_tokens`].
pub fn parse_normalized<I>(records: I) -> Result<Corpus, IngestError>
where
    I: IntoIterator<Item = DocumentRecord>,
{
    let mut documents = Vec::new();
    for (idx, record) in records.into_iter().enumerate() {
        let doc_id = record.doc_id.ok_or(IngestError::MissingDocId { record: idx + 1 })?;
        let child_age_months = match record.child_age_months {
            Some(age) if age < 0 => return Err(IngestError::NegativeAge { doc_id, age }),
            Some(age) => Some(u32::try_from(age).unwrap_or(u32::MAX)),
            None => None,
        };
        let mut utterances = Vec::with_capacity(record.utterances.len());
        for (u_idx, u) in record.utterances.into_iter().enumerate() {
            let tokens = match (u.tokens, u.text) {
                (Some(tokens), _) => tokens.iter().map(|t| t.to_lowercase()).collect(),
                (None, Some(text)) => normalize_tokens(&text),
                (None, None) => {
                    return Err(IngestError::EmptyUtteranceRecord {
                        doc_id,
                        utterance: u_idx + 1,
                    })
                }
            };
            utterances.push(Utterance {
                speaker: u.speaker,
                tokens,
            });
        }
        documents.push(Document {
            doc_id,
            child_age_months,
            utterances,
            source: record.source.unwrap_or_else(|| "normalized".to_string()),
        });
    }
    Corpus::new(documents)
}
