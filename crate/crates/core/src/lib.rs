//! Characterization of ranked count spectra.
//!
//! A ranked count spectrum is a list of labelled positive counts sorted from
//! largest to smallest, for example the number of written characters that
//! share each toned pinyin syllable. This crate provides
//!
//! - descriptive and inequality statistics ([`spectrum`]),
//! - logarithmic, two-piece logarithmic and Beta rank-function fits ([`fit`]),
//! - AIC/BIC model selection ([`select`]),
//! - Poisson-replicate significance testing of model comparisons ([`resample`]),
//! - input parsing, pinyin validation and synthetic datasets ([`ingest`]).
//!
//! Numerical code is generic over the [`Scalar`] trait; the `*64` and `*32`
//! aliases below name the common concrete instantiations.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod fit;
pub mod ingest;
pub mod resample;
pub mod scalar;
pub mod select;
pub mod spectrum;

pub use fit::{
    BetaParams, FitError, FitOrder, LogParams, ModelFamily, ModelFit, ModelParams,
    PiecewiseLogParams, PiecewiseOptions,
};
pub use ingest::{FixtureSpec, IngestError, NoiseModel, PinyinError, PinyinSyllable};
pub use resample::{PValueReport, ReplicateReport, ResampleError};
pub use scalar::Scalar;
pub use select::{Criterion, SelectError, SelectionReport};
pub use spectrum::{
    HistogramBin, LorenzCurve, NormalizedSpectrum, RankSpectrum, SpectrumEntry, SpectrumError,
    SpectrumStats,
};

pub type NormalizedSpectrum64 = NormalizedSpectrum<f64>;
pub type SpectrumStats64 = SpectrumStats<f64>;
pub type LorenzCurve64 = LorenzCurve<f64>;
pub type ModelFit64 = ModelFit<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type BetaParams64 = BetaParams<f64>;
pub type LogParams64 = LogParams<f64>;
pub type PiecewiseLogParams64 = PiecewiseLogParams<f64>;
pub type SelectionReport64 = SelectionReport<f64>;
pub type ReplicateReport64 = ReplicateReport<f64>;
pub type PValueReport64 = PValueReport<f64>;

pub type NormalizedSpectrum32 = NormalizedSpectrum<f32>;
pub type SpectrumStats32 = SpectrumStats<f32>;
pub type ModelFit32 = ModelFit<f32>;
pub type SelectionReport32 = SelectionReport<f32>;
