//! Ranked count spectra and their descriptive and inequality statistics.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("spectrum has no entries")]
    Empty,
    #[error("label {label:?} has non-positive count {count}")]
    NonPositiveCount { label: String, count: i64 },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("fraction {0} outside (0, 1]")]
    FractionOutOfRange(f64),
    #[error("bin width must be at least 1")]
    ZeroBinWidth,
    #[error("normalized values must be finite, positive and non-increasing (index {0})")]
    InvalidValues(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SpectrumEntry {
    pub label: String,
    pub count: u64,
}

/// Labelled positive counts ordered by rank: rank 1 holds the largest count.
///
/// Ties are ordered by ascending label (byte order), so a spectrum is a pure
/// function of its multiset of `(label, count)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankSpectrum {
    entries: Vec<SpectrumEntry>,
}

impl RankSpectrum {
    /// Ranks `(label, count)` pairs. Counts must be positive and labels unique.
    pub fn build<I, S>(pairs: I) -> Result<Self, SpectrumError>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (label, count) in pairs {
            let label = label.into();
            if count <= 0 {
                return Err(SpectrumError::NonPositiveCount { label, count });
            }
            if !seen.insert(label.clone()) {
                return Err(SpectrumError::DuplicateLabel(label));
            }
            entries.push(SpectrumEntry { label, count: count as u64 });
        }
        if entries.is_empty() {
            return Err(SpectrumError::Empty);
        }
        Ok(Self::from_entries_unchecked(entries))
    }

    /// Re-ranks already validated entries (positive counts, unique labels).
    pub(crate) fn from_entries_unchecked(mut entries: Vec<SpectrumEntry>) -> Self {
        entries.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| x.label.cmp(&y.label)));
        Self { entries }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// Number of ranked entries, `n`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false: a spectrum holds at least one entry.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Counts in rank order (descending).
    pub fn counts(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.entries.iter().map(|e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.counts().sum()
    }

    /// `(label, count)` pairs in rank order, suitable for [`RankSpectrum::build`].
    pub fn to_pairs(&self) -> Vec<(String, i64)> {
        self.entries.iter().map(|e| (e.label.clone(), e.count as i64)).collect()
    }

    /// Probability-mass version `y_r = count(r) / total`.
    pub fn normalize<T: Scalar>(&self) -> NormalizedSpectrum<T> {
        let total = T::from_count(self.total());
        NormalizedSpectrum {
            values: self.counts().map(|c| T::from_count(c) / total).collect(),
            source_n: self.len(),
        }
    }

    pub fn descriptive_stats<T: Scalar>(&self) -> SpectrumStats<T> {
        let n = self.len();
        let total = self.total();
        let nt = T::from_index(n);
        let mean = T::from_count(total) / nt;
        let xs: Vec<T> = self.counts().map(T::from_count).collect();

        let sd = if n > 1 {
            let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
            (ss / T::from_index(n - 1)).sqrt()
        } else {
            T::zero()
        };

        let mut sorted = xs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite counts"));
        let median = median_of_sorted(&sorted);
        let mut dev: Vec<T> = sorted.iter().map(|&x| (x - median).abs()).collect();
        dev.sort_by(|a, b| a.partial_cmp(b).expect("finite deviations"));
        let mad = median_of_sorted(&dev);

        let fraction_within = |lo: T, hi: T| {
            let inside = xs.iter().filter(|&&x| x >= lo && x <= hi).count();
            T::from_index(inside) / nt
        };
        let coverage_mean_sd = fraction_within((mean - sd).max(T::zero()), mean + sd);
        let coverage_median_mad = fraction_within(median - mad, median + mad);

        SpectrumStats {
            total_characters: total,
            n_syllables: n,
            mean,
            median,
            sd,
            mad,
            coverage_mean_sd,
            coverage_median_mad,
            singleton_count: self.counts().filter(|&c| c == 1).count(),
        }
    }

    /// Share of total mass held by the top `round(n * fraction)` entries
    /// (at least one entry).
    pub fn top_share<T: Scalar>(&self, fraction: T) -> Result<T, SpectrumError> {
        if !(fraction > T::zero() && fraction <= T::one()) {
            return Err(SpectrumError::FractionOutOfRange(fraction.as_f64()));
        }
        let n = self.len();
        let k = (T::from_index(n) * fraction).round().to_usize().unwrap_or(n).clamp(1, n);
        let top: u64 = self.counts().take(k).sum();
        Ok(T::from_count(top) / T::from_count(self.total()))
    }

    /// Gini coefficient `n^-1 (n + 1 - 2 sum_r (n + 1 - r) x_r / sum_r x_r)`
    /// with `x` sorted ascending.
    ///
    /// Both sums are accumulated in integer arithmetic, so the result only
    /// depends on their ratio and is exactly invariant under integer scaling.
    pub fn gini<T: Scalar>(&self) -> T {
        let n = self.len() as u128;
        // Ascending rank r' = n + 1 - r, so weight (n + 1 - r') = r for the
        // r-th largest count.
        let weighted: u128 = self
            .counts()
            .enumerate()
            .map(|(i, c)| (i as u128 + 1) * c as u128)
            .sum();
        let total = self.total() as u128;
        let ratio = to_scalar::<T>(weighted) / to_scalar::<T>(total);
        let nt = to_scalar::<T>(n);
        (nt + T::one() - T::lit(2.0) * ratio) / nt
    }

    /// Lorenz curve with items accumulated from the smallest count upward.
    pub fn lorenz_curve<T: Scalar>(&self) -> LorenzCurve<T> {
        let n = self.len();
        let total = T::from_count(self.total());
        let mut points = Vec::with_capacity(n + 1);
        points.push((T::zero(), T::zero()));
        let mut acc = 0u64;
        for (i, c) in self.counts().rev().enumerate() {
            acc += c;
            let x = if i + 1 == n { T::one() } else { T::from_index(i + 1) / T::from_index(n) };
            let y = if i + 1 == n { T::one() } else { T::from_count(acc) / total };
            points.push((x, y));
        }
        LorenzCurve { points }
    }

    /// Histogram of counts in bins `[k*w + 1, (k + 1)*w]`, from the bin holding
    /// the smallest count through the bin holding the largest. Empty interior
    /// bins are kept so the output lays out a contiguous axis.
    pub fn histogram(&self, bin_width: u64) -> Result<Vec<HistogramBin>, SpectrumError> {
        if bin_width == 0 {
            return Err(SpectrumError::ZeroBinWidth);
        }
        let bin_of = |c: u64| (c - 1) / bin_width;
        let max = self.entries.first().map(|e| e.count).unwrap_or(1);
        let min = self.entries.last().map(|e| e.count).unwrap_or(1);
        let (lo, hi) = (bin_of(min), bin_of(max));
        let mut tally = vec![0usize; (hi - lo + 1) as usize];
        for c in self.counts() {
            tally[(bin_of(c) - lo) as usize] += 1;
        }
        Ok(tally
            .into_iter()
            .enumerate()
            .map(|(i, items)| HistogramBin {
                bin_start: (lo + i as u64) * bin_width + 1,
                items,
            })
            .collect())
    }
}

fn to_scalar<T: Scalar>(v: u128) -> T {
    T::from_u128(v).expect("sum converts to scalar")
}

fn median_of_sorted<T: Scalar>(sorted: &[T]) -> T {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0)
    }
}

/// Probability-mass values `y_r`, positive and non-increasing in rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedSpectrum<T> {
    values: Vec<T>,
    source_n: usize,
}

impl<T: Scalar> NormalizedSpectrum<T> {
    /// Divides positive, non-increasing weights by their sum.
    pub fn from_weights(weights: Vec<T>) -> Result<Self, SpectrumError> {
        if weights.is_empty() {
            return Err(SpectrumError::Empty);
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= T::zero() || (i > 0 && *w > weights[i - 1]) {
                return Err(SpectrumError::InvalidValues(i));
            }
        }
        let total: T = weights.iter().copied().sum();
        let source_n = weights.len();
        Ok(Self { values: weights.into_iter().map(|w| w / total).collect(), source_n })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumStats<T> {
    pub total_characters: u64,
    pub n_syllables: usize,
    pub mean: T,
    pub median: T,
    /// Sample standard deviation (denominator `n - 1`).
    pub sd: T,
    /// Unscaled median absolute deviation.
    pub mad: T,
    pub coverage_mean_sd: T,
    pub coverage_median_mad: T,
    pub singleton_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve<T> {
    /// `(cumulative share of items, cumulative share of mass)`, from (0,0) to (1,1).
    pub points: Vec<(T, T)>,
}

impl<T: Scalar> LorenzCurve<T> {
    /// Twice the area between the diagonal and the curve (trapezoid rule).
    pub fn area_gini(&self) -> T {
        let under: T = self
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1))
            .sum();
        T::one() - under
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistogramBin {
    pub bin_start: u64,
    pub items: usize,
}
