//! Heuristic sentence segmentation and word tokenization.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Byte range `[start, end)` into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// NFC-normalized surface form.
    pub surface: String,
    /// Byte offset of the first character, relative to the text that was tokenized.
    pub start: usize,
    pub end: usize,
    pub capitalized: bool,
    pub sentence_initial: bool,
}

impl Token {
    /// Lowercased surface with typographic apostrophes folded to `'`.
    pub fn key(&self) -> String {
        self.surface.to_lowercase().replace('\u{2019}', "'")
    }

    pub fn has_letters(&self) -> bool {
        self.surface.chars().any(char::is_alphabetic)
    }
}

const TERMINATORS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 8] = ['"', '\'', ')', ']', '}', '\u{201D}', '\u{2019}', '\u{00BB}'];
const OPENERS: [char; 8] = ['"', '\'', '(', '[', '{', '\u{201C}', '\u{2018}', '\u{00AB}'];

/// Splits `text` into sentence spans.
///
/// A boundary is a run of `.`, `!`, `?` (plus any closing quotes or
/// brackets) followed by end of text, or by whitespace and then an uppercase
/// letter (optionally behind opening quotes or brackets). A lone `.` ending a
/// listed abbreviation is never a boundary. Spans are trimmed of surrounding
/// whitespace and jointly cover every non-whitespace character.
pub fn segment_sentences(text: &str, abbreviations: &HashSet<String>) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);

    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_content_end = 0;
    let mut i = 0;
    while i < chars.len() {
        let (b, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if start.is_none() {
            start = Some(b);
        }
        if !TERMINATORS.contains(&c) {
            last_content_end = b + c.len_utf8();
            i += 1;
            continue;
        }

        let mut j = i;
        while j < chars.len() && TERMINATORS.contains(&chars[j].1) {
            j += 1;
        }
        let lone_period = j == i + 1 && c == '.';
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let run_end = byte_at(j);
        last_content_end = run_end;

        let boundary = is_boundary(&chars, j)
            && !(lone_period && ends_with_abbreviation(text, b, abbreviations));
        if boundary {
            spans.push(Span {
                start: start.take().unwrap_or(b),
                end: run_end,
            });
        }
        i = j;
    }
    if let Some(s) = start {
        spans.push(Span {
            start: s,
            end: last_content_end,
        });
    }
    spans
}

fn is_boundary(chars: &[(usize, char)], after: usize) -> bool {
    if after >= chars.len() {
        return true;
    }
    if !chars[after].1.is_whitespace() {
        return false;
    }
    let mut k = after;
    while k < chars.len() && chars[k].1.is_whitespace() {
        k += 1;
    }
    while k < chars.len() && OPENERS.contains(&chars[k].1) {
        k += 1;
    }
    match chars.get(k) {
        None => true,
        Some(&(_, c)) => c.is_uppercase(),
    }
}

fn ends_with_abbreviation(text: &str, period: usize, abbreviations: &HashSet<String>) -> bool {
    let before = &text[..period];
    let word_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_whitespace())
        .map_or(0, |(b, c)| b + c.len_utf8());
    let word = before[word_start..].trim_start_matches(|c: char| OPENERS.contains(&c));
    if word.is_empty() {
        return false;
    }
    let candidate = format!("{}.", word.to_lowercase());
    abbreviations.contains(&candidate)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}' || is_combining_mark(c)
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits one sentence into tokens: maximal runs of letters, digits and
/// apostrophes, with leading and trailing apostrophes trimmed. The first token
/// is flagged sentence-initial.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run_start: Option<usize> = None;
    let push = |s: usize, e: usize, tokens: &mut Vec<Token>| {
        let raw = &sentence[s..e];
        let lead = raw.len() - raw.trim_start_matches(is_apostrophe).len();
        let trimmed = raw.trim_matches(is_apostrophe);
        if trimmed.is_empty() {
            return;
        }
        let start = s + lead;
        let surface: String = trimmed.nfc().collect();
        let capitalized = surface.chars().next().is_some_and(char::is_uppercase);
        tokens.push(Token {
            sentence_initial: tokens.is_empty(),
            surface,
            start,
            end: start + trimmed.len(),
            capitalized,
        });
    };
    for (b, c) in sentence.char_indices() {
        match (is_word_char(c), run_start) {
            (true, None) => run_start = Some(b),
            (false, Some(s)) => {
                push(s, b, &mut tokens);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        push(s, sentence.len(), &mut tokens);
    }
    tokens
}
