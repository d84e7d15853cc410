//! Rank-function families and their least-squares fits to a normalized spectrum.
//!
//! Three families are supported, all with natural logarithms:
//!
//! - `LOG`: `f(r) = C + a ln r`, with `C` pinned by `sum_r f(r) = 1`;
//! - `PIECEWISE_LOG`: two such lines split after rank `r0`, optionally meeting
//!   at a converge point;
//! - `BETA`: `f(r) = C (n + 1 - r)^b / r^a`.

mod beta;
mod linear;

use serde::Serialize;
use thiserror::Error;

use crate::spectrum::NormalizedSpectrum;
use crate::Scalar;

pub use beta::{beta_init, fit_beta, fit_beta_with, BetaFit, LmReport, LmSettings};
pub use linear::{default_scan_range, fit_log, log_intercept, fit_piecewise_log, scan_breakpoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("breakpoint {r0} invalid for n = {n}: both segments need at least two ranks")]
    BreakpointOutOfRange { r0: usize, n: usize },
    #[error("empty breakpoint range {min}..={max}")]
    EmptyRange { min: usize, max: usize },
    #[error("model fitted on n = {model} but data has n = {data}")]
    LengthMismatch { model: usize, data: usize },
    #[error("value at rank {0} is not positive")]
    NonPositiveValue(usize),
    #[error("degenerate design: {0}")]
    Degenerate(&'static str),
    #[error("objective is not finite")]
    NonFiniteObjective,
    #[error("invalid initial parameters: {0}")]
    InvalidInit(&'static str),
}

/// Model families in enumeration order (used for deterministic tie-breaks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelFamily {
    Log,
    PiecewiseLog,
    Beta,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Log, ModelFamily::PiecewiseLog, ModelFamily::Beta];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Log => "LOG",
            ModelFamily::PiecewiseLog => "PIECEWISE_LOG",
            ModelFamily::Beta => "BETA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitOrder {
    /// Fit ranks `1..=r0` first, then pin the low-ranking segment.
    #[default]
    HighFirst,
    /// Fit ranks `r0+1..=n` first, then pin the high-ranking segment.
    LowFirst,
}

/// `C + a ln r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogParams<T> {
    #[serde(rename = "C")]
    pub intercept: T,
    #[serde(rename = "a")]
    pub slope: T,
}

impl<T: Scalar> LogParams<T> {
    pub fn eval_ln(&self, ln_r: T) -> T {
        self.intercept + self.slope * ln_r
    }

    pub fn eval(&self, r: usize) -> T {
        self.eval_ln(T::from_index(r).ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiecewiseLogParams<T> {
    /// Segment for ranks `1..=r0`.
    #[serde(flatten)]
    pub high: LogParams<T>,
    /// Segment for ranks `r0+1..=n`.
    #[serde(flatten, serialize_with = "ser_prime")]
    pub low: LogParams<T>,
    pub r0: usize,
    pub continuous: bool,
    pub fit_order: FitOrder,
    pub converge_point: T,
}

fn ser_prime<T: Serialize, S: serde::Serializer>(p: &LogParams<T>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("LogParamsPrime", 2)?;
    st.serialize_field("C_prime", &p.intercept)?;
    st.serialize_field("a_prime", &p.slope)?;
    st.end()
}

impl<T: Scalar> PiecewiseLogParams<T> {
    pub fn eval(&self, r: usize) -> T {
        if r <= self.r0 {
            self.high.eval(r)
        } else {
            self.low.eval(r)
        }
    }
}

/// `C (n + 1 - r)^b / r^a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaParams<T> {
    #[serde(rename = "C")]
    pub scale: T,
    #[serde(rename = "a")]
    pub rank_exponent: T,
    #[serde(rename = "b")]
    pub tail_exponent: T,
}

impl<T: Scalar> BetaParams<T> {
    pub fn eval(&self, r: usize, n: usize) -> T {
        let tail = T::from_index(n + 1 - r);
        self.scale * tail.powf(self.tail_exponent) / T::from_index(r).powf(self.rank_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelParams<T> {
    Log(LogParams<T>),
    PiecewiseLog(PiecewiseLogParams<T>),
    Beta(BetaParams<T>),
}

impl<T: Scalar> ModelParams<T> {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelParams::Log(_) => ModelFamily::Log,
            ModelParams::PiecewiseLog(_) => ModelFamily::PiecewiseLog,
            ModelParams::Beta(_) => ModelFamily::Beta,
        }
    }

    /// Parameter count charged by the information criteria.
    pub fn parameter_count(&self) -> usize {
        match self {
            ModelParams::Log(_) => 2,
            ModelParams::PiecewiseLog(p) if p.continuous => 3,
            ModelParams::PiecewiseLog(_) => 4,
            ModelParams::Beta(_) => 3,
        }
    }

    /// Value at rank `r` of an `n`-rank spectrum; `r` is not range-checked.
    pub fn eval(&self, r: usize, n: usize) -> T {
        match self {
            ModelParams::Log(p) => p.eval(r),
            ModelParams::PiecewiseLog(p) => p.eval(r),
            ModelParams::Beta(p) => p.eval(r, n),
        }
    }

    /// Sum of squared errors against `values` (ranks `1..=values.len()`).
    pub fn sse_against(&self, values: &[T]) -> T {
        let n = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let d = self.eval(i + 1, n) - y;
                d * d
            })
            .sum()
    }
}

/// A fitted model together with its error and information-criterion size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit<T> {
    pub family: ModelFamily,
    pub params: ModelParams<T>,
    pub sse: T,
    pub k: usize,
    pub n: usize,
}

impl<T: Scalar> ModelFit<T> {
    pub fn new(params: ModelParams<T>, sse: T, n: usize) -> Self {
        Self { family: params.family(), k: params.parameter_count(), params, sse, n }
    }

    pub(crate) fn from_data(params: ModelParams<T>, y: &NormalizedSpectrum<T>) -> Self {
        let sse = params.sse_against(y.values());
        Self::new(params, sse, y.len())
    }

    /// Model value at rank `r`, `1 <= r <= n`.
    pub fn eval(&self, r: usize) -> Result<T, FitError> {
        if r == 0 || r > self.n {
            return Err(FitError::RankOutOfRange { rank: r, n: self.n });
        }
        Ok(self.params.eval(r, self.n))
    }

    /// `sum_r (f(r) - y_r)^2`, not divided by `n`.
    pub fn sse(&self, y: &NormalizedSpectrum<T>) -> Result<T, FitError> {
        if y.source_n() != self.n || y.len() != self.n {
            return Err(FitError::LengthMismatch { model: self.n, data: y.len() });
        }
        Ok(self.params.sse_against(y.values()))
    }
}

/// Options for the two-piece logarithmic fit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PiecewiseOptions<T> {
    pub continuous: bool,
    pub fit_order: FitOrder,
    /// Rank at which the continuous segments meet; defaults to `r0`.
    pub converge_point: Option<T>,
}

impl<T> PiecewiseOptions<T> {
    pub fn discontinuous() -> Self {
        Self { continuous: false, fit_order: FitOrder::HighFirst, converge_point: None }
    }

    pub fn continuous(fit_order: FitOrder) -> Self {
        Self { continuous: true, fit_order, converge_point: None }
    }
}
