//! AIC/BIC model selection over fitted models.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::fit::{ModelFamily, ModelFit};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    /// SSE of exactly zero: the criterion would be negative infinity.
    #[error("perfect fit (SSE = 0): information criterion is unbounded")]
    PerfectFit,
    #[error("invalid criterion input: {0}")]
    InvalidInput(&'static str),
    #[error("fits are on different sample sizes ({0} vs {1})")]
    SampleSizeMismatch(usize, usize),
    #[error("need at least two fits to rank, got {0}")]
    TooFewFits(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

fn log_term<T: Scalar>(sse: T, n: usize) -> Result<T, SelectError> {
    if n == 0 {
        return Err(SelectError::InvalidInput("n must be positive"));
    }
    if sse == T::zero() {
        return Err(SelectError::PerfectFit);
    }
    if !(sse > T::zero() && sse.is_finite()) {
        return Err(SelectError::InvalidInput("SSE must be positive and finite"));
    }
    let nt = T::from_index(n);
    Ok(nt * (sse / nt).ln())
}

/// `n ln(SSE / n) + 2k`.
pub fn aic<T: Scalar>(sse: T, n: usize, k: usize) -> Result<T, SelectError> {
    Ok(log_term(sse, n)? + T::lit(2.0) * T::from_index(k))
}

/// `n ln(SSE / n) + k ln n`.
pub fn bic<T: Scalar>(sse: T, n: usize, k: usize) -> Result<T, SelectError> {
    Ok(log_term(sse, n)? + T::from_index(k) * T::from_index(n).ln())
}

pub fn score<T: Scalar>(criterion: Criterion, fit: &ModelFit<T>) -> Result<T, SelectError> {
    match criterion {
        Criterion::Aic => aic(fit.sse, fit.n, fit.k),
        Criterion::Bic => bic(fit.sse, fit.n, fit.k),
    }
}

/// `AIC_2 - AIC_1 = n ln(SSE_2 / SSE_1) + 2 (K_2 - K_1)`.
pub fn delta_aic<T: Scalar>(second: &ModelFit<T>, first: &ModelFit<T>) -> Result<T, SelectError> {
    if second.n != first.n {
        return Err(SelectError::SampleSizeMismatch(second.n, first.n));
    }
    for sse in [second.sse, first.sse] {
        log_term(sse, first.n)?;
    }
    let n = T::from_index(first.n);
    let dk = T::from_index(second.k) - T::from_index(first.k);
    Ok(n * (second.sse / first.sse).ln() + T::lit(2.0) * dk)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionEntry<T> {
    pub family: ModelFamily,
    pub k: usize,
    pub sse: T,
    pub aic: T,
    pub bic: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport<T> {
    pub criterion: Criterion,
    pub n: usize,
    /// Ascending by the chosen criterion.
    pub entries: Vec<SelectionEntry<T>>,
    pub best_by_aic: ModelFamily,
    pub best_by_bic: ModelFamily,
    /// `deltas[i][j] = aic(entries[i]) - aic(entries[j])`.
    pub deltas: Vec<Vec<T>>,
}

fn order<T: Scalar>(x: &SelectionEntry<T>, y: &SelectionEntry<T>, key: impl Fn(&SelectionEntry<T>) -> T) -> Ordering {
    key(x)
        .partial_cmp(&key(y))
        .unwrap_or(Ordering::Equal)
        .then(x.family.cmp(&y.family))
        .then(x.k.cmp(&y.k))
        .then(x.sse.partial_cmp(&y.sse).unwrap_or(Ordering::Equal))
}

/// Scores every fit under both criteria and sorts by `criterion`.
///
/// Equal scores are ordered by family enumeration order (then `k`, then SSE),
/// so the report does not depend on input order.
pub fn rank_models<T: Scalar>(fits: &[ModelFit<T>], criterion: Criterion) -> Result<SelectionReport<T>, SelectError> {
    if fits.len() < 2 {
        return Err(SelectError::TooFewFits(fits.len()));
    }
    let n = fits[0].n;
    let mut entries = Vec::with_capacity(fits.len());
    for f in fits {
        if f.n != n {
            return Err(SelectError::SampleSizeMismatch(n, f.n));
        }
        entries.push(SelectionEntry {
            family: f.family,
            k: f.k,
            sse: f.sse,
            aic: aic(f.sse, f.n, f.k)?,
            bic: bic(f.sse, f.n, f.k)?,
        });
    }
    let best = |key: fn(&SelectionEntry<T>) -> T| {
        entries.iter().min_by(|x, y| order(x, y, key)).expect("non-empty").family
    };
    let best_by_aic = best(|e| e.aic);
    let best_by_bic = best(|e| e.bic);
    match criterion {
        Criterion::Aic => entries.sort_by(|x, y| order(x, y, |e| e.aic)),
        Criterion::Bic => entries.sort_by(|x, y| order(x, y, |e| e.bic)),
    }
    let deltas = entries
        .iter()
        .map(|ei| entries.iter().map(|ej| ei.aic - ej.aic).collect())
        .collect();
    Ok(SelectionReport { criterion, n, entries, best_by_aic, best_by_bic, deltas })
}
