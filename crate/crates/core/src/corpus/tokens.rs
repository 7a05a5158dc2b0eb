//! Utterance tokenization for CHAT-style transcripts.

use alloc::string::String;
use alloc::vec::Vec;

/// Untranscribed or unintelligible placeholders.
const PLACEHOLDERS: [&str; 3] = ["xxx", "yyy", "www"];

/// Split an utterance into lowercase word tokens, dropping CHAT markup.
///
/// Removed: anything inside `[...]` or `<...>`, tokens starting with `&`
/// (fillers, events) or `@`, omitted-word codes (`0is`), the placeholders
/// `xxx`/`yyy`/`www`, and tokens made only of punctuation. Inside a word,
/// a trailing `@` form marker is cut (`doggie@f` -> `doggie`), parentheses are
/// dropped (`(be)cause` -> `because`) and characters other than letters, digits,
/// `'`, `-`, `_` and `+` are removed. Repetitions outside brackets are kept.
pub fn normalize_tokens(raw: &str) -> Vec<String> {
    let stripped = strip_bracketed(raw);
    stripped.split_whitespace().filter_map(clean_token).collect()
}

fn strip_bracketed(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut square = 0usize;
    let mut angle = 0usize;
    for ch in raw.chars() {
        match ch {
            '[' => {
                square += 1;
                out.push(' ');
            }
            ']' => {
                square = square.saturating_sub(1);
                out.push(' ');
            }
            '<' => {
                angle += 1;
                out.push(' ');
            }
            '>' => {
                angle = angle.saturating_sub(1);
                out.push(' ');
            }
            _ if square > 0 || angle > 0 => {}
            _ => out.push(ch),
        }
    }
    out
}

fn clean_token(piece: &str) -> Option<String> {
    if piece.starts_with('&') || piece.starts_with('@') {
        return None;
    }
    let piece = match piece.find('@') {
        Some(at) => &piece[..at],
        None => piece,
    };
    let lowered = piece.to_lowercase();
    let kept: String = lowered
        .chars()
        .filter(|c| c.is_alphanumeric() || matches!(c, '\'' | '-' | '_' | '+'))
        .collect();
    let word = kept.trim_matches(|c: char| !c.is_alphanumeric());
    if word.is_empty() || PLACEHOLDERS.contains(&word) {
        return None;
    }
    let mut chars = word.chars();
    if let (Some('0'), Some(next)) = (chars.next(), chars.next()) {
        if next.is_alphabetic() {
            return None;
        }
    }
    Some(String::from(word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<String> {
        normalize_tokens(s)
    }

    #[test]
    fn plain_sentence() {
        assert_eq!(toks("Look at the doggie ."), vec!["look", "at", "the", "doggie"]);
    }

    #[test]
    fn fillers_and_bracket_codes() {
        assert_eq!(toks("the &-um dog [!]"), vec!["the", "dog"]);
        assert_eq!(toks("&=laughs want [/] want more ?"), vec!["want", "want", "more"]);
        assert_eq!(toks("<I want> [//] I need that [: this] ."), vec!["i", "need", "that"]);
    }

    #[test]
    fn word_internal_markup() {
        assert_eq!(toks("doggie@f (be)cause no: ."), vec!["doggie", "because", "no"]);
        assert_eq!(toks("don't ice+cream ,"), vec!["don't", "ice+cream"]);
    }

    #[test]
    fn dropped_codes() {
        assert_eq!(toks("xxx 0is it +... @g"), vec!["it"]);
        assert!(toks(". ? ! +/. „").is_empty());
        assert!(toks("").is_empty());
    }

    #[test]
    fn repetitions_outside_brackets_are_kept() {
        assert_eq!(toks("ball ball ball !"), vec!["ball", "ball", "ball"]);
    }

    #[test]
    fn unbalanced_closers_act_as_spaces() {
        assert_eq!(toks("a]b c>d"), vec!["a", "b", "c", "d"]);
    }
}
