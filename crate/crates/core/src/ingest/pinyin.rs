use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

const INVENTORY: &str = include_str!("../../data/pinyin_bases.txt");
const MAX_BASE_LEN: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PinyinError {
    #[error("empty syllable")]
    Empty,
    #[error("missing tone digit")]
    MissingTone,
    #[error("more than one trailing tone digit")]
    ExtraDigit,
    #[error("tone digit {0} out of range")]
    ToneOutOfRange(u8),
    #[error("invalid character {0:?}")]
    InvalidCharacter(char),
    #[error("base syllable longer than {MAX_BASE_LEN} letters")]
    TooLong,
    #[error("unknown base syllable {0:?}")]
    UnknownBase(String),
}

/// A toned syllable such as `hao3`. The base uses `v` for u-umlaut.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PinyinSyllable {
    pub base: String,
    pub tone: u8,
}

impl fmt::Display for PinyinSyllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.tone)
    }
}

fn inventory() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        INVENTORY
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Bundled base-syllable inventory used by strict validation.
pub fn base_inventory() -> impl Iterator<Item = &'static str> {
    let mut v: Vec<_> = inventory().iter().copied().collect();
    v.sort_unstable();
    v.into_iter()
}

/// Validates a toned pinyin token.
///
/// `u:` and `ü` are accepted for u-umlaut and canonicalized to `v`. Tones 1-4
/// are always accepted; neutral tone (0 or 5) only when `strict` is off.
/// Strict mode also requires the base to be in the bundled inventory.
pub fn validate_pinyin(token: &str, strict: bool) -> Result<PinyinSyllable, PinyinError> {
    if token.is_empty() {
        return Err(PinyinError::Empty);
    }
    let body = token.trim_end_matches(|c: char| c.is_ascii_digit());
    let digits = &token[body.len()..];

    let base = body.replace("u:", "v").replace('ü', "v");
    if let Some(c) = base.chars().find(|c| !c.is_ascii_lowercase()) {
        return Err(PinyinError::InvalidCharacter(c));
    }
    let tone = match digits.len() {
        0 => return Err(PinyinError::MissingTone),
        1 => digits.as_bytes()[0] - b'0',
        _ => return Err(PinyinError::ExtraDigit),
    };
    if base.is_empty() {
        return Err(PinyinError::Empty);
    }
    if base.len() > MAX_BASE_LEN {
        return Err(PinyinError::TooLong);
    }
    let tone_ok = matches!(tone, 1..=4) || (!strict && matches!(tone, 0 | 5));
    if !tone_ok {
        return Err(PinyinError::ToneOutOfRange(tone));
    }
    if strict && !inventory().contains(base.as_str()) {
        return Err(PinyinError::UnknownBase(base));
    }
    Ok(PinyinSyllable { base, tone })
}
