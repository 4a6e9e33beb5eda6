//! Classic readability formulas over pre-computed counts.

use crate::{Error, Result};

fn check_counts(words: usize, sentences: usize) -> Result<()> {
    if words == 0 {
        return Err(Error::DegenerateInput("zero words".into()));
    }
    if sentences == 0 {
        return Err(Error::DegenerateInput("zero sentences".into()));
    }
    Ok(())
}

/// Flesch-Kincaid grade level: `0.39·W/S + 11.8·Syl/W − 15.59`.
pub fn flesch_kincaid(words: usize, sentences: usize, syllables: usize) -> Result<f64> {
    check_counts(words, sentences)?;
    let w = words as f64;
    Ok(0.39 * (w / sentences as f64) + 11.8 * (syllables as f64 / w) - 15.59)
}

/// Gunning fog index: `0.4·(W/S + 100·Complex/W)`.
pub fn gunning_fog(words: usize, sentences: usize, complex_words: usize) -> Result<f64> {
    check_counts(words, sentences)?;
    let w = words as f64;
    Ok(0.4 * (w / sentences as f64 + 100.0 * complex_words as f64 / w))
}

/// Percentage of difficult words above which the Dale-Chall adjustment applies.
pub const DALE_CHALL_PDW_CUTOFF: f64 = 5.0;
pub const DALE_CHALL_ADJUSTMENT: f64 = 3.6365;

/// New Dale-Chall score: `0.1579·PDW + 0.0496·ASL`, plus 3.6365 when PDW > 5.
pub fn dale_chall(words: usize, sentences: usize, difficult_words: usize) -> Result<f64> {
    check_counts(words, sentences)?;
    let w = words as f64;
    let pdw = 100.0 * difficult_words as f64 / w;
    let asl = w / sentences as f64;
    let mut score = 0.1579 * pdw + 0.0496 * asl;
    if pdw > DALE_CHALL_PDW_CUTOFF {
        score += DALE_CHALL_ADJUSTMENT;
    }
    Ok(score)
}
