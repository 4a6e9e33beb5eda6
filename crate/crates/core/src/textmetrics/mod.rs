//! Text to descriptor vector: readability scores plus lexical, syntactic and
//! discourse features computed with deterministic heuristics.

mod catalog;
mod lexicon;
mod readability;
mod segment;
mod syllables;

use serde::{Deserialize, Serialize};

pub use catalog::*;
pub use lexicon::{parse_word_list, Lexicons, DALE_CHALL_FILE, LEXICON_DIR};
pub use readability::{dale_chall, flesch_kincaid, gunning_fog};
pub use segment::{segment_sentences, tokenize, Span, Token};
pub use syllables::count_syllables;

use crate::{Error, Result};

/// A segmented and tokenized text. Token offsets are absolute byte offsets
/// into `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub text: String,
    pub sentences: Vec<Span>,
    pub tokens: Vec<Vec<Token>>,
}

impl Document {
    pub fn new(text: impl Into<String>, lexicons: &Lexicons) -> Document {
        let text = text.into();
        let sentences = segment_sentences(&text, &lexicons.abbreviations);
        let tokens = sentences
            .iter()
            .map(|span| {
                let mut toks = tokenize(span.slice(&text));
                for t in &mut toks {
                    t.start += span.start;
                    t.end += span.start;
                }
                toks
            })
            .collect();
        Document {
            text,
            sentences,
            tokens,
        }
    }

    /// Segments with the bundled abbreviation list.
    pub fn parse(text: impl Into<String>) -> Document {
        Document::new(text, Lexicons::bundled())
    }

    pub fn token_count(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    /// Sentences holding at least one token.
    pub fn sentence_count(&self) -> usize {
        self.tokens.iter().filter(|s| !s.is_empty()).count()
    }

    pub fn iter_tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().flatten()
    }
}

/// Dense descriptor values aligned with a [`FeatureCatalog`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for FeatureVector {
    fn from(v: Vec<f64>) -> Self {
        FeatureVector(v)
    }
}

/// Raw counts feeding the readability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TextCounts {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    /// ≥ 3 syllables and not a proper noun.
    pub complex_words: usize,
    /// Not a Dale-Chall familiar word.
    pub difficult_words: usize,
}

/// Capitalized token that is not sentence-initial. The pronoun `I` and its
/// contractions are excluded.
pub fn is_proper_noun(token: &Token) -> bool {
    if !token.capitalized || token.sentence_initial {
        return false;
    }
    let key = token.key();
    !(key == "i" || key.starts_with("i'"))
}

pub fn text_counts(doc: &Document, lexicons: &Lexicons) -> TextCounts {
    let mut counts = TextCounts {
        sentences: doc.sentence_count(),
        ..TextCounts::default()
    };
    for token in doc.iter_tokens() {
        let syl = count_syllables(&token.surface) as usize;
        counts.words += 1;
        counts.syllables += syl;
        if syl >= 3 && !is_proper_noun(token) {
            counts.complex_words += 1;
        }
        if !lexicons.is_familiar(&token.key()) {
            counts.difficult_words += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinguisticDescriptors {
    pub named_entity_count: f64,
    pub avg_word_length: f64,
    pub avg_sentence_length: f64,
    pub coordination_count: f64,
    pub subordination_count: f64,
    pub pronoun_density: f64,
    /// 1.0 when some sentence has a reporting verb later followed by `that`.
    pub indirect_speech: f64,
}

pub fn linguistic_descriptors(doc: &Document, lexicons: &Lexicons) -> Result<LinguisticDescriptors> {
    let n_tokens = doc.token_count();
    if n_tokens == 0 {
        return Err(Error::DegenerateInput("text has no tokens".into()));
    }
    let mut out = LinguisticDescriptors::default();
    let mut letters = 0usize;
    let mut pronouns = 0usize;
    for sentence in &doc.tokens {
        let mut saw_reporting_verb = false;
        for token in sentence {
            let key = token.key();
            letters += token.surface.chars().filter(|c| c.is_alphabetic()).count();
            if is_proper_noun(token) {
                out.named_entity_count += 1.0;
            }
            if lexicons.coordinators.contains(&key) {
                out.coordination_count += 1.0;
            }
            if lexicons.subordinators.contains(&key) {
                out.subordination_count += 1.0;
            }
            if lexicons.pronouns.contains(&key) {
                pronouns += 1;
            }
            if saw_reporting_verb && key == "that" {
                out.indirect_speech = 1.0;
            }
            if lexicons.reporting_verbs.contains(&key) {
                saw_reporting_verb = true;
            }
        }
    }
    let n = n_tokens as f64;
    out.avg_word_length = letters as f64 / n;
    out.avg_sentence_length = n / doc.sentence_count() as f64;
    out.pronoun_density = pronouns as f64 / n;
    Ok(out)
}

/// Computes one value per catalog descriptor, in catalog order.
pub fn extract_features(
    doc: &Document,
    catalog: &FeatureCatalog,
    lexicons: &Lexicons,
) -> Result<FeatureVector> {
    let ling = linguistic_descriptors(doc, lexicons)?;
    let counts = text_counts(doc, lexicons);
    catalog
        .iter()
        .map(|d| {
            Ok(match d.id.as_str() {
                FLESCH_KINCAID => flesch_kincaid(counts.words, counts.sentences, counts.syllables)?,
                GUNNING_FOG => gunning_fog(counts.words, counts.sentences, counts.complex_words)?,
                DALE_CHALL => dale_chall(counts.words, counts.sentences, counts.difficult_words)?,
                NAMED_ENTITY_COUNT => ling.named_entity_count,
                AVG_WORD_LENGTH => ling.avg_word_length,
                AVG_SENTENCE_LENGTH => ling.avg_sentence_length,
                COORDINATION_COUNT => ling.coordination_count,
                SUBORDINATION_COUNT => ling.subordination_count,
                PRONOUN_DENSITY => ling.pronoun_density,
                INDIRECT_SPEECH => ling.indirect_speech,
                other => return Err(Error::UnknownDescriptor(other.to_string())),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(FeatureVector)
}

/// Parses `text` and extracts its features in one step.
pub fn features_for_text(
    text: &str,
    catalog: &FeatureCatalog,
    lexicons: &Lexicons,
) -> Result<FeatureVector> {
    extract_features(&Document::new(text, lexicons), catalog, lexicons)
}
