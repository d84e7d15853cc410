//! Poisson replicates of a spectrum and the empirical p-value of
//! "two-piece logarithmic beats Beta".
//!
//! Each replicate replaces every count by a `Pois(count)` draw, drops zeros and
//! re-ranks. On each replicate both models are fitted and compared through
//! `n_eff ln(SSE_plog / SSE_beta)`; the p-value is the fraction of replicates
//! on which that statistic is positive.

mod poisson;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fit::{self, FitError, FitOrder, PiecewiseOptions};
use crate::spectrum::{RankSpectrum, SpectrumEntry};
use crate::Scalar;

pub use poisson::poisson_sample;

/// Replicates with fewer surviving entries are not fitted.
pub const MIN_REPLICATE_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResampleError {
    #[error("Poisson mean must be finite and non-negative, got {0}")]
    InvalidMean(f64),
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}

/// Why a replicate produced no statistic.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum ReplicateFailure {
    #[error("only {0} entries survived (need {MIN_REPLICATE_SIZE})")]
    TooSmall(usize),
    #[error("Beta fit failed: {0}")]
    BetaFit(String),
    #[error("Beta fit did not converge")]
    BetaNotConverged,
    #[error("piecewise fit failed: {0}")]
    PiecewiseFit(String),
    #[error("statistic is not finite")]
    NonFinite,
}

/// Generator for replicate `index` under master `seed`.
///
/// The seed keys a ChaCha stream and the index selects the stream number, so
/// replicate `i` sees the same numbers whichever worker evaluates it.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub spectrum: RankSpectrum,
    /// Attempts discarded because every draw was zero.
    pub redraws: usize,
}

/// Draws `Pois(count)` for each entry, drops zeros and re-ranks (labels kept).
/// An all-zero draw is discarded and redrawn from the advanced generator.
pub fn make_replicate<R: Rng + ?Sized>(s: &RankSpectrum, rng: &mut R) -> Replicate {
    let mut redraws = 0;
    loop {
        let entries: Vec<SpectrumEntry> = s
            .entries()
            .iter()
            .filter_map(|e| {
                let c = poisson_sample(e.count as f64, rng).expect("counts are valid means");
                (c > 0).then(|| SpectrumEntry { label: e.label.clone(), count: c })
            })
            .collect();
        if !entries.is_empty() {
            return Replicate { spectrum: RankSpectrum::from_entries_unchecked(entries), redraws };
        }
        redraws += 1;
    }
}

/// Expected number of entries surviving zero removal: `sum_r (1 - e^-count_r)`.
pub fn expected_n_effective(s: &RankSpectrum) -> f64 {
    s.counts().map(|c| 1.0 - (-(c as f64)).exp()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateReport<T> {
    pub replicate_index: usize,
    pub n_effective: usize,
    pub sse_beta: T,
    pub sse_plog: T,
    /// Breakpoint selected for the piecewise fit.
    pub r0: usize,
    /// `n_effective * ln(sse_plog / sse_beta)`; positive when Beta fits better.
    pub statistic: T,
}

/// `n ln(sse_plog / sse_beta)`.
pub fn comparison_statistic<T: Scalar>(n: usize, sse_plog: T, sse_beta: T) -> T {
    T::from_index(n) * (sse_plog / sse_beta).ln()
}

/// Fits Beta (log-linear start, then Levenberg-Marquardt) and the continuous,
/// high-ranks-first two-piece logarithm with breakpoint scanned over
/// `[2, floor(n / 5)]`, and compares their SSEs.
pub fn replicate_statistic<T: Scalar>(
    rep: &RankSpectrum,
    replicate_index: usize,
) -> Result<ReplicateReport<T>, ReplicateFailure> {
    let n = rep.len();
    if n < MIN_REPLICATE_SIZE {
        return Err(ReplicateFailure::TooSmall(n));
    }
    let y = rep.normalize::<T>();
    let init = fit::beta_init(&y).map_err(|e| ReplicateFailure::BetaFit(e.to_string()))?;
    let beta = fit::fit_beta_with(&y, init, &fit::LmSettings::default())
        .map_err(|e| ReplicateFailure::BetaFit(e.to_string()))?;
    if !beta.report.converged {
        return Err(ReplicateFailure::BetaNotConverged);
    }
    let plog = fit::scan_breakpoint(
        &y,
        fit::default_scan_range(n),
        &PiecewiseOptions::continuous(FitOrder::HighFirst),
    )
    .map_err(|e: FitError| ReplicateFailure::PiecewiseFit(e.to_string()))?;
    let r0 = match plog.params {
        fit::ModelParams::PiecewiseLog(p) => p.r0,
        _ => unreachable!("scan returns a piecewise fit"),
    };
    let statistic = comparison_statistic(n, plog.sse, beta.fit.sse);
    if !statistic.is_finite() {
        return Err(ReplicateFailure::NonFinite);
    }
    Ok(ReplicateReport {
        replicate_index,
        n_effective: n,
        sse_beta: beta.fit.sse,
        sse_plog: plog.sse,
        r0,
        statistic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedReplicate {
    pub replicate_index: usize,
    pub n_effective: usize,
    pub reason: ReplicateFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatBin<T> {
    pub lower: T,
    pub upper: T,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatHistogram<T> {
    pub bin_width: T,
    pub bins: Vec<StatBin<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueReport<T> {
    pub replicates: usize,
    pub seed: u64,
    /// `#{statistic > 0} / replicates`.
    pub p_value: T,
    pub positive: usize,
    /// Fraction of replicates with statistic above `-2` (the AIC penalty for one
    /// extra parameter).
    pub aic_margin_fraction: T,
    /// Fraction of replicates with statistic above `-ln n_eff` (BIC analogue).
    pub bic_margin_fraction: T,
    /// Statistics of the valid replicates, by replicate index.
    pub statistics: Vec<T>,
    pub reports: Vec<ReplicateReport<T>>,
    pub flagged: Vec<FlaggedReplicate>,
    pub redraws: usize,
    pub mean_n_effective: f64,
    /// Standard error of `mean_n_effective` across replicates.
    pub n_effective_se: f64,
    pub expected_n_effective: f64,
    pub histogram: StatHistogram<T>,
}

/// Runs `replicates` Poisson replicates on `workers` threads.
///
/// Replicate `i` draws from [`replicate_rng`]`(seed, i)` and results are
/// gathered by index, so the report is identical for every worker count.
pub fn empirical_pvalue<T: Scalar>(
    s: &RankSpectrum,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<PValueReport<T>, ResampleError> {
    if replicates == 0 {
        return Err(ResampleError::NoReplicates);
    }
    if workers == 0 {
        return Err(ResampleError::NoWorkers);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ResampleError::ThreadPool(e.to_string()))?;

    let outcomes: Vec<(usize, usize, Result<ReplicateReport<T>, ReplicateFailure>)> = pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mut rng = replicate_rng(seed, i as u64);
                let rep = make_replicate(s, &mut rng);
                let n_eff = rep.spectrum.len();
                (n_eff, rep.redraws, replicate_statistic::<T>(&rep.spectrum, i))
            })
            .collect()
    });

    let mut reports = Vec::new();
    let mut flagged = Vec::new();
    let mut redraws = 0;
    let mut n_effs = Vec::with_capacity(replicates);
    for (i, (n_eff, extra, outcome)) in outcomes.into_iter().enumerate() {
        n_effs.push(n_eff as f64);
        redraws += extra;
        match outcome {
            Ok(r) => reports.push(r),
            Err(reason) => flagged.push(FlaggedReplicate { replicate_index: i, n_effective: n_eff, reason }),
        }
    }

    let total = T::from_index(replicates);
    let count_where = |pred: &dyn Fn(&ReplicateReport<T>) -> bool| reports.iter().filter(|r| pred(r)).count();
    let positive = count_where(&|r| r.statistic > T::zero());
    let aic_margin = count_where(&|r| r.statistic > -T::lit(2.0));
    let bic_margin = count_where(&|r| r.statistic > -T::from_index(r.n_effective).ln());

    let mean_n = n_effs.iter().sum::<f64>() / replicates as f64;
    let n_effective_se = if replicates > 1 {
        let var = n_effs.iter().map(|x| (x - mean_n) * (x - mean_n)).sum::<f64>() / (replicates - 1) as f64;
        (var / replicates as f64).sqrt()
    } else {
        0.0
    };

    let statistics: Vec<T> = reports.iter().map(|r| r.statistic).collect();
    Ok(PValueReport {
        replicates,
        seed,
        p_value: T::from_index(positive) / total,
        positive,
        aic_margin_fraction: T::from_index(aic_margin) / total,
        bic_margin_fraction: T::from_index(bic_margin) / total,
        histogram: freedman_diaconis(&statistics),
        statistics,
        reports,
        flagged,
        redraws,
        mean_n_effective: mean_n,
        n_effective_se,
        expected_n_effective: expected_n_effective(s),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile<T: Scalar>(sorted: &[T], q: T) -> T {
    let h = (T::from_index(sorted.len() - 1)) * q;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0);
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

/// Histogram with Freedman-Diaconis width `2 IQR m^(-1/3)`; width 1 when the
/// IQR vanishes. Bins are aligned to multiples of the width.
pub fn freedman_diaconis<T: Scalar>(values: &[T]) -> StatHistogram<T> {
    if values.is_empty() {
        return StatHistogram { bin_width: T::one(), bins: Vec::new() };
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let iqr = quantile(&sorted, T::lit(0.75)) - quantile(&sorted, T::lit(0.25));
    let mut width = T::lit(2.0) * iqr / T::from_index(sorted.len()).cbrt();
    if !(width > T::zero() && width.is_finite()) {
        width = T::one();
    }
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let first = (min / width).floor();
    let nbins = ((max / width).floor() - first).to_usize().unwrap_or(0) + 1;
    let mut counts = vec![0usize; nbins];
    for &v in &sorted {
        let idx = ((v / width).floor() - first).to_usize().unwrap_or(0).min(nbins - 1);
        counts[idx] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let lower = (first + T::from_index(i)) * width;
            let upper = (first + T::from_index(i + 1)) * width;
            StatBin { lower, upper, count }
        })
        .collect();
    StatHistogram { bin_width: width, bins }
}
