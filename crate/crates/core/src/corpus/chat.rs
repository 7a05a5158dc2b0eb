//! Minimal reader for CHAT transcripts.
//!
//! Only three things are read: `@ID` headers (to find the target child's age),
//! `*SPK:` main tiers (the utterances) and tab-indented continuation lines.
//! Dependent `%` tiers and all other headers are skipped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{normalize_tokens, Document, IngestError, IngestWarning, Utterance, TARGET_CHILD};

/// A parsed transcript plus anything worth telling the user about it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedChat {
    pub document: Document,
    pub warnings: Vec<IngestWarning>,
}

enum Tier {
    Main { line: usize, text: String },
    Header { text: String },
    Other,
}

/// Parse one CHAT file into a [`Document`] named `doc_id`.
pub fn parse_chat(raw_text: &str, doc_id: &str) -> Result<ParsedChat, IngestError> {
    let mut tiers: Vec<Tier> = Vec::new();
    for (idx, line) in raw_text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.starts_with([' ', '\t']) {
            match tiers.last_mut() {
                Some(Tier::Main { text, .. }) | Some(Tier::Header { text }) => {
                    text.push(' ');
                    text.push_str(line.trim());
                }
                _ => {}
            }
            continue;
        }
        if line.starts_with('*') {
            tiers.push(Tier::Main {
                line: line_no,
                text: line.to_string(),
            });
        } else if line.starts_with('@') {
            tiers.push(Tier::Header {
                text: line.to_string(),
            });
        } else {
            tiers.push(Tier::Other);
        }
    }

    let mut utterances = Vec::new();
    let mut age: Option<Option<u32>> = None;
    let mut fallback_age: Option<Option<u32>> = None;
    for tier in &tiers {
        match tier {
            Tier::Main { line, text } => {
                let colon = text.find(':').ok_or(IngestError::MalformedUtterance {
                    doc_id: doc_id.to_string(),
                    line: *line,
                })?;
                let speaker = text[1..colon].trim();
                if speaker.is_empty() {
                    return Err(IngestError::MalformedUtterance {
                        doc_id: doc_id.to_string(),
                        line: *line,
                    });
                }
                utterances.push(Utterance {
                    speaker: speaker.to_string(),
                    tokens: normalize_tokens(&text[colon + 1..]),
                });
            }
            Tier::Header { text } => {
                if let Some(id) = parse_id_header(text) {
                    if id.role == "Target_Child" && age.is_none() {
                        age = Some(id.age_months);
                    } else if id.code == TARGET_CHILD && fallback_age.is_none() {
                        fallback_age = Some(id.age_months);
                    }
                }
            }
            Tier::Other => {}
        }
    }

    let mut warnings = Vec::new();
    let child_age_months = match age.or(fallback_age) {
        Some(Some(months)) => Some(months),
        Some(None) => {
            warnings.push(IngestWarning::UnreadableAge {
                doc_id: doc_id.to_string(),
            });
            None
        }
        None => {
            warnings.push(IngestWarning::MissingTargetChild {
                doc_id: doc_id.to_string(),
            });
            None
        }
    };

    Ok(ParsedChat {
        document: Document {
            doc_id: doc_id.to_string(),
            child_age_months,
            utterances,
            source: String::from("chat"),
        },
        warnings,
    })
}

struct IdHeader<'a> {
    code: &'a str,
    role: &'a str,
    age_months: Option<u32>,
}

fn parse_id_header(line: &str) -> Option<IdHeader<'_>> {
    let rest = line.strip_prefix("@ID:")?;
    let fields: Vec<&str> = rest.trim().split('|').collect();
    if fields.len() < 4 {
        return None;
    }
    Some(IdHeader {
        code: fields[2].trim(),
        role: fields.get(7).map_or("", |r| r.trim()),
        age_months: parse_age(fields[3].trim()),
    })
}

/// `years;months.days` to whole months, truncating days. `1;06.15` -> 18.
pub fn parse_age(text: &str) -> Option<u32> {
    let (years, rest) = text.split_once(';')?;
    let years: u32 = years.trim().parse().ok()?;
    let months = rest.split('.').next().unwrap_or("").trim();
    let months: u32 = if months.is_empty() {
        0
    } else {
        months.parse().ok()?
    };
    if months >= 12 {
        return None;
    }
    years.checked_mul(12)?.checked_add(months)
}
