//! Seeded synthetic corpus whose difficulty grows with level.
//!
//! Each text has six sentences. Per level ordinal `k` (A1 = 0 … C2 = 5):
//!
//! | property            | value                                        |
//! |---------------------|----------------------------------------------|
//! | words per sentence  | uniform in `[3 + 3k, 8 + 3k]`                |
//! | rare-word rate      | `0.02 + 0.07k` per content word              |
//! | subordination rate  | `0.15k` per sentence (capped at 0.9)         |
//!
//! Common words come from the Dale–Chall familiar list (3–6 letters, with
//! pronouns, connectives and reporting verbs removed so those descriptors stay
//! flat). Rare words are long polysyllabic words absent from that list. A
//! subordinate clause is spliced in as `because …` and counts toward the
//! sentence length. Only the first word of a sentence is capitalised, so the
//! texts carry no proper nouns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusItem, LabeledCorpus, LevelLabel};
use crate::textmetrics::Lexicons;

pub const DEFAULT_SEED: u64 = 20_240_501;
pub const DEFAULT_PER_LEVEL: usize = 200;
pub const SENTENCES_PER_TEXT: usize = 6;

const RARE_WORDS: &[&str] = &[
    "administration", "approximately", "bureaucratic", "characteristic", "circumstantial",
    "collaboration", "comprehensive", "consequential", "consideration", "contemporary",
    "controversial", "deliberation", "demonstration", "determination", "differentiation",
    "disproportionate", "documentation", "extraordinary", "fundamentally", "hypothetical",
    "implementation", "inconsistency", "infrastructure", "institutional", "interpretation",
    "investigation", "jurisdiction", "manifestation", "methodology", "negotiation",
    "observational", "organizational", "particularly", "philosophical", "predominantly",
    "preliminary", "proliferation", "questionable", "reconciliation", "recommendation",
    "representative", "responsibility", "simultaneously", "sophisticated", "specification",
    "substantially", "susceptibility", "technological", "theoretically", "transformation",
    "unprecedented", "vulnerability",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelProfile {
    pub min_words: usize,
    pub max_words: usize,
    pub rare_rate: f64,
    pub subordination_rate: f64,
}

pub fn level_profile(label: LevelLabel) -> LevelProfile {
    let k = label.ordinal();
    LevelProfile {
        min_words: 3 + 3 * k,
        max_words: 8 + 3 * k,
        rare_rate: 0.02 + 0.07 * k as f64,
        subordination_rate: (0.15 * k as f64).min(0.9),
    }
}

struct Vocabulary {
    common: Vec<String>,
    rare: Vec<&'static str>,
}

impl Vocabulary {
    fn new(lex: &Lexicons) -> Vocabulary {
        let excluded = |w: &str| {
            lex.pronouns.contains(w)
                || lex.coordinators.contains(w)
                || lex.subordinators.contains(w)
                || lex.reporting_verbs.contains(w)
        };
        let mut common: Vec<String> = lex
            .familiar_words
            .iter()
            .filter(|w| (3..=6).contains(&w.len()) && w.chars().all(|c| c.is_ascii_lowercase()))
            .filter(|w| !excluded(w))
            .cloned()
            .collect();
        common.sort_unstable();
        let rare = RARE_WORDS
            .iter()
            .copied()
            .filter(|w| !lex.is_familiar(w))
            .collect();
        Vocabulary { common, rare }
    }

    fn word(&self, rng: &mut ChaCha8Rng, rare_rate: f64) -> &str {
        if rng.gen_bool(rare_rate) {
            self.rare.choose(rng).expect("rare pool")
        } else {
            self.common.choose(rng).expect("common pool")
        }
    }
}

fn sentence(vocab: &Vocabulary, profile: &LevelProfile, rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(profile.min_words..=profile.max_words);
    let clause = len >= 4 && rng.gen_bool(profile.subordination_rate);
    let mut words: Vec<&str> = Vec::with_capacity(len);
    // "because" sits inside the sentence, after at least two words
    let because_at = clause.then(|| rng.gen_range(2..len - 1));
    for i in 0..len {
        if Some(i) == because_at {
            words.push("because");
        } else {
            words.push(vocab.word(rng, profile.rare_rate));
        }
    }
    let mut s = String::new();
    for (i, w) in words.iter().enumerate() {
        if i == 0 {
            let mut chars = w.chars();
            if let Some(c) = chars.next() {
                s.extend(c.to_uppercase());
                s.push_str(chars.as_str());
            }
        } else {
            s.push(' ');
            s.push_str(w);
        }
    }
    s.push('.');
    s
}

/// `per_level` texts per level, in level order, deterministic in `seed`.
pub fn generate(per_level: usize, seed: u64, lex: &Lexicons) -> LabeledCorpus {
    let vocab = Vocabulary::new(lex);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(per_level * LevelLabel::ALL.len());
    for label in LevelLabel::ALL {
        let profile = level_profile(label);
        for _ in 0..per_level {
            let text = (0..SENTENCES_PER_TEXT)
                .map(|_| sentence(&vocab, &profile, &mut rng))
                .collect::<Vec<_>>()
                .join(" ");
            items.push(CorpusItem {
                text,
                label,
                label2: None,
            });
        }
    }
    LabeledCorpus {
        items,
        source_id: format!("fixture-{seed}"),
    }
}
