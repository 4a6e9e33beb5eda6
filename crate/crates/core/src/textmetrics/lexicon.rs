//! Word lists used by the heuristic descriptors.
//!
//! Every list is UTF-8 text with one lowercase entry per line; blank lines and
//! lines starting with `#` are ignored. The bundled copies live under `data/`
//! and are compiled into the crate; [`Lexicons::from_dir`] loads an on-disk
//! replacement with the same layout.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

use crate::{Error, Result};

pub const DALE_CHALL_FILE: &str = "dale_chall_3000.txt";
pub const LEXICON_DIR: &str = "lexicons";

const BUNDLED_DALE_CHALL: &str = include_str!("../../data/dale_chall_3000.txt");
const BUNDLED_PRONOUNS: &str = include_str!("../../data/lexicons/pronouns.txt");
const BUNDLED_COORDINATORS: &str = include_str!("../../data/lexicons/coordinators.txt");
const BUNDLED_SUBORDINATORS: &str = include_str!("../../data/lexicons/subordinators.txt");
const BUNDLED_REPORTING_VERBS: &str = include_str!("../../data/lexicons/reporting_verbs.txt");
const BUNDLED_ABBREVIATIONS: &str = include_str!("../../data/lexicons/abbreviations.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub familiar_words: HashSet<String>,
    pub pronouns: HashSet<String>,
    pub coordinators: HashSet<String>,
    pub subordinators: HashSet<String>,
    pub reporting_verbs: HashSet<String>,
    pub abbreviations: HashSet<String>,
}

pub fn parse_word_list(content: &str) -> HashSet<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.nfc().collect::<String>().to_lowercase())
        .collect()
}

fn read_list(path: &Path) -> Result<HashSet<String>> {
    if !path.exists() {
        return Err(Error::MissingWordList(path.to_path_buf()));
    }
    std::fs::read_to_string(path)
        .map(|s| parse_word_list(&s))
        .map_err(|e| Error::io(path, e))
}

impl Lexicons {
    pub fn bundled() -> &'static Lexicons {
        static BUNDLED: OnceLock<Lexicons> = OnceLock::new();
        BUNDLED.get_or_init(|| Lexicons {
            familiar_words: parse_word_list(BUNDLED_DALE_CHALL),
            pronouns: parse_word_list(BUNDLED_PRONOUNS),
            coordinators: parse_word_list(BUNDLED_COORDINATORS),
            subordinators: parse_word_list(BUNDLED_SUBORDINATORS),
            reporting_verbs: parse_word_list(BUNDLED_REPORTING_VERBS),
            abbreviations: parse_word_list(BUNDLED_ABBREVIATIONS),
        })
    }

    /// Loads `<dir>/dale_chall_3000.txt` and `<dir>/lexicons/*.txt`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Lexicons> {
        let dir = dir.as_ref();
        let lex = dir.join(LEXICON_DIR);
        Ok(Lexicons {
            familiar_words: read_list(&dir.join(DALE_CHALL_FILE))?,
            pronouns: read_list(&lex.join("pronouns.txt"))?,
            coordinators: read_list(&lex.join("coordinators.txt"))?,
            subordinators: read_list(&lex.join("subordinators.txt"))?,
            reporting_verbs: read_list(&lex.join("reporting_verbs.txt"))?,
            abbreviations: read_list(&lex.join("abbreviations.txt"))?,
        })
    }

    /// Dale-Chall familiarity of a lowercased word. A word is familiar if it
    /// is on the list as is, or after stripping one of `-ing`, `-ed`, `-es`,
    /// `-s`. Tokens without letters (numbers) are treated as familiar.
    pub fn is_familiar(&self, lower: &str) -> bool {
        if !lower.chars().any(char::is_alphabetic) || self.familiar_words.contains(lower) {
            return true;
        }
        ["ing", "ed", "es", "s"].iter().any(|suffix| {
            lower
                .strip_suffix(suffix)
                .is_some_and(|stem| !stem.is_empty() && self.familiar_words.contains(stem))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lists_are_populated() {
        let lx = Lexicons::bundled();
        assert!(lx.familiar_words.len() > 2900);
        assert!(lx.pronouns.contains("she"));
        assert!(!lx.pronouns.contains("that"));
        assert!(lx.subordinators.contains("that"));
        assert!(lx.abbreviations.contains("e.g."));
    }

    #[test]
    fn familiarity_with_suffix_stripping() {
        let lx = Lexicons::bundled();
        assert!(lx.is_familiar("cat"));
        assert!(lx.is_familiar("cats"));
        assert!(lx.is_familiar("jumping"));
        assert!(lx.is_familiar("jumped"));
        assert!(lx.is_familiar("boxes"));
        assert!(lx.is_familiar("1999"));
        assert!(!lx.is_familiar("epistemology"));
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let set = parse_word_list("# header\n\nAlpha\n  beta  \n#gamma\n");
        assert_eq!(set.len(), 2);
        assert!(set.contains("alpha") && set.contains("beta"));
    }

    #[test]
    fn missing_list_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let err = Lexicons::from_dir(dir.path()).unwrap_err();
        assert!(matches!(err, Error::MissingWordList(p) if p.ends_with(DALE_CHALL_FILE)));
    }

    #[test]
    fn bundled_data_dir_loads_identically() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        assert_eq!(&Lexicons::from_dir(dir).unwrap(), Lexicons::bundled());
    }
}
