//! Input files, pinyin validation and synthetic datasets.
//!
//! Two text formats are read, both UTF-8 with LF or CRLF line ends, `#`
//! comment lines and blank lines ignored:
//!
//! - counts CSV: `label,count` per line, optional `syllable,count` header;
//! - pairs TSV: `character<TAB>toned_pinyin` per line, one pronunciation per
//!   line, aggregated into per-syllable character counts.

mod fixture;
mod pinyin;

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fit::ModelParams;
use crate::resample::poisson_sample;
use crate::Scalar;

pub use fixture::{generate_fixture, FixtureSpec, REFERENCE_TOP15};
pub use pinyin::{base_inventory, validate_pinyin, PinyinError, PinyinSyllable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("line {line}: malformed line: {reason}")]
    Malformed { line: usize, reason: &'static str },
    #[error("line {line}: count {value:?} is not an integer")]
    NonIntegerCount { line: usize, value: String },
    #[error("line {line}: duplicate label {label:?}")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: invalid pinyin {token:?}: {source}")]
    Pinyin { line: usize, token: String, source: PinyinError },
    #[error("infeasible fixture: {0}")]
    InfeasibleFixture(String),
    #[error("model is not positive and finite at rank {0}")]
    NonPositiveModel(usize),
    #[error("need at least {needed} ranks, got {got}")]
    TooFewRanks { needed: usize, got: usize },
}

/// Data lines as `(1-based line number, trimmed text)`.
fn data_lines(content: &[u8]) -> Result<impl Iterator<Item = (usize, &str)>, IngestError> {
    let text = std::str::from_utf8(content).map_err(|_| IngestError::Utf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    Ok(text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')))
}

/// Parses a counts CSV into `(label, count)` pairs in file order.
///
/// Counts are returned as signed integers; positivity is checked when the
/// pairs are ranked.
pub fn parse_counts_file(content: &[u8]) -> Result<Vec<(String, i64)>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, (line, text)) in data_lines(content)?.enumerate() {
        let (label, count) = text
            .split_once(',')
            .ok_or(IngestError::Malformed { line, reason: "expected label,count" })?;
        let (label, count) = (label.trim(), count.trim());
        if idx == 0 && label.eq_ignore_ascii_case("syllable") && count.eq_ignore_ascii_case("count") {
            continue;
        }
        if label.is_empty() {
            return Err(IngestError::Malformed { line, reason: "empty label" });
        }
        if count.contains(',') {
            return Err(IngestError::Malformed { line, reason: "too many fields" });
        }
        let value = count
            .parse::<i64>()
            .map_err(|_| IngestError::NonIntegerCount { line, value: count.to_string() })?;
        if !seen.insert(label.to_string()) {
            return Err(IngestError::DuplicateLabel { line, label: label.to_string() });
        }
        out.push((label.to_string(), value));
    }
    Ok(out)
}

/// Writes the counts CSV format (header plus LF-terminated lines).
pub fn write_counts_file<S: AsRef<str>>(pairs: &[(S, i64)]) -> String {
    let mut out = String::from("syllable,count\n");
    for (label, count) in pairs {
        out.push_str(label.as_ref());
        out.push(',');
        out.push_str(&count.to_string());
        out.push('\n');
    }
    out
}

/// Aggregates a character/pinyin TSV into per-syllable counts.
///
/// Each distinct `(character, syllable)` pair counts once; syllables are
/// listed in order of first appearance under their canonical spelling.
pub fn parse_pairs_file(content: &[u8], strict: bool) -> Result<Vec<(String, i64)>, IngestError> {
    let mut seen_pairs = HashSet::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<(String, i64)> = Vec::new();
    for (line, text) in data_lines(content)? {
        let mut fields = text.split('\t');
        let (Some(ch), Some(token), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(IngestError::Malformed { line, reason: "expected character<TAB>pinyin" });
        };
        let (ch, token) = (ch.trim(), token.trim());
        if ch.is_empty() {
            return Err(IngestError::Malformed { line, reason: "empty character" });
        }
        let syllable = validate_pinyin(token, strict)
            .map_err(|source| IngestError::Pinyin { line, token: token.to_string(), source })?
            .to_string();
        if !seen_pairs.insert((ch.to_string(), syllable.clone())) {
            continue;
        }
        match index.get(&syllable) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(syllable.clone(), out.len());
                out.push((syllable, 1));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// Round the scaled model values (minimum 1).
    #[default]
    None,
    /// Draw `Pois(scaled value)` per rank; zero draws are dropped.
    Poisson,
}

/// Counts following a fitted model: the model is evaluated at ranks `1..=n`,
/// scaled to sum to `total`, then rounded or Poisson-sampled.
pub fn generate_from_model<T: Scalar>(
    params: &ModelParams<T>,
    n: usize,
    total: u64,
    noise: NoiseModel,
    seed: u64,
) -> Result<Vec<(String, i64)>, IngestError> {
    if n < 4 {
        return Err(IngestError::TooFewRanks { needed: 4, got: n });
    }
    let mut values = Vec::with_capacity(n);
    for r in 1..=n {
        let v = params.eval(r, n).as_f64();
        if !(v > 0.0 && v.is_finite()) {
            return Err(IngestError::NonPositiveModel(r));
        }
        values.push(v);
    }
    let sum: f64 = values.iter().sum();
    let width = n.to_string().len().max(4);
    let label = |r: usize| format!("r{r:0width$}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for (i, v) in values.into_iter().enumerate() {
        let scaled = v * total as f64 / sum;
        let count = match noise {
            NoiseModel::None => (scaled.round() as i64).max(1),
            NoiseModel::Poisson => poisson_sample(scaled, &mut rng).expect("scaled value is a valid mean") as i64,
        };
        if count > 0 {
            out.push((label(i + 1), count));
        }
    }
    Ok(out)
}
