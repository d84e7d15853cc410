use std::ops::RangeInclusive;

use super::{FitError, FitOrder, LogParams, ModelFit, ModelParams, PiecewiseLogParams, PiecewiseOptions};
use crate::spectrum::NormalizedSpectrum;
use crate::Scalar;

fn ln_ranks<T: Scalar>(n: usize) -> Vec<T> {
    (1..=n).map(|r| T::from_index(r).ln()).collect()
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_index(xs.len())
}

/// Intercept `C = (1 - a sum_r ln r) / n` making `C + a ln r` sum to one over
/// ranks `1..=n`.
pub fn log_intercept<T: Scalar>(slope: T, n: usize) -> T {
    let s: T = ln_ranks::<T>(n).into_iter().sum();
    (T::one() - slope * s) / T::from_index(n)
}

/// Closed-form fit of `C + a ln r` under `sum_r f(r) = 1`.
///
/// Substituting the constraint gives `f(r) = 1/n + a (ln r - S/n)` with
/// `S = sum ln r`, a one-parameter least-squares problem.
pub fn fit_log<T: Scalar>(y: &NormalizedSpectrum<T>) -> Result<ModelFit<T>, FitError> {
    let n = y.len();
    if n < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: n });
    }
    let lr = ln_ranks::<T>(n);
    let s: T = lr.iter().copied().sum();
    let nt = T::from_index(n);
    let centre = s / nt;
    let base = T::one() / nt;
    let (mut num, mut den) = (T::zero(), T::zero());
    for (&x, &v) in lr.iter().zip(y.values()) {
        let dx = x - centre;
        num = num + (v - base) * dx;
        den = den + dx * dx;
    }
    let slope = num / den;
    let intercept = (T::one() - slope * s) / nt;
    Ok(ModelFit::from_data(ModelParams::Log(LogParams { intercept, slope }), y))
}

/// Ordinary least squares of `ys` on `xs` with free intercept.
fn ols_line<T: Scalar>(xs: &[T], ys: &[T]) -> LogParams<T> {
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &v) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (v - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    LogParams { intercept: my - slope * mx, slope }
}

/// Least-squares slope of a line forced through `(x0, v0)`.
fn pinned_line<T: Scalar>(x0: T, v0: T, xs: &[T], ys: &[T]) -> LogParams<T> {
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &v) in xs.iter().zip(ys) {
        let dx = x - x0;
        sxy = sxy + dx * (v - v0);
        sxx = sxx + dx * dx;
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    LogParams { intercept: v0 - slope * x0, slope }
}

fn check_breakpoint(r0: usize, n: usize) -> Result<(), FitError> {
    if r0 < 2 || r0 + 2 > n {
        return Err(FitError::BreakpointOutOfRange { r0, n });
    }
    Ok(())
}

fn piecewise_params<T: Scalar>(
    lr: &[T],
    ys: &[T],
    r0: usize,
    opts: &PiecewiseOptions<T>,
) -> PiecewiseLogParams<T> {
    let (hx, lx) = lr.split_at(r0);
    let (hy, ly) = ys.split_at(r0);
    let converge_point = opts.converge_point.unwrap_or_else(|| T::from_index(r0));
    let (high, low) = if !opts.continuous {
        (ols_line(hx, hy), ols_line(lx, ly))
    } else {
        let x0 = converge_point.ln();
        match opts.fit_order {
            FitOrder::HighFirst => {
                let high = ols_line(hx, hy);
                (high, pinned_line(x0, high.eval_ln(x0), lx, ly))
            }
            FitOrder::LowFirst => {
                let low = ols_line(lx, ly);
                (pinned_line(x0, low.eval_ln(x0), hx, hy), low)
            }
        }
    };
    PiecewiseLogParams {
        high,
        low,
        r0,
        continuous: opts.continuous,
        fit_order: opts.fit_order,
        converge_point,
    }
}

/// Two-piece logarithmic fit with breakpoint `r0` (ranks `1..=r0` and `r0+1..=n`).
///
/// Without continuity each segment is an independent OLS line in `ln r`. With
/// continuity the segment named by `fit_order` is fitted first, and the other
/// one is constrained to pass through it at the converge point, leaving only
/// its slope free.
pub fn fit_piecewise_log<T: Scalar>(
    y: &NormalizedSpectrum<T>,
    r0: usize,
    opts: &PiecewiseOptions<T>,
) -> Result<ModelFit<T>, FitError> {
    let n = y.len();
    check_breakpoint(r0, n)?;
    if let Some(cp) = opts.converge_point {
        if !(cp.is_finite() && cp >= T::one()) {
            return Err(FitError::InvalidInit("converge point must be a rank >= 1"));
        }
    }
    let lr = ln_ranks::<T>(n);
    let params = piecewise_params(&lr, y.values(), r0, opts);
    Ok(ModelFit::from_data(ModelParams::PiecewiseLog(params), y))
}

/// Default breakpoint scan `[2, floor(n / 5)]`.
pub fn default_scan_range(n: usize) -> RangeInclusive<usize> {
    2..=n / 5
}

/// Fits every integer breakpoint in `range` and keeps the smallest SSE.
///
/// SSEs within a few ulps of the running minimum (relative to `sum y^2`) are
/// treated as ties, and ties keep the smaller breakpoint.
pub fn scan_breakpoint<T: Scalar>(
    y: &NormalizedSpectrum<T>,
    range: RangeInclusive<usize>,
    opts: &PiecewiseOptions<T>,
) -> Result<ModelFit<T>, FitError> {
    let (min, max) = (*range.start(), *range.end());
    if min > max {
        return Err(FitError::EmptyRange { min, max });
    }
    let n = y.len();
    check_breakpoint(min, n)?;
    check_breakpoint(max, n)?;
    if opts.converge_point.is_some() {
        return Err(FitError::InvalidInit("a fixed converge point cannot be scanned"));
    }

    let lr = ln_ranks::<T>(n);
    let ys = y.values();
    let energy: T = ys.iter().map(|&v| v * v).sum();
    let tie = T::epsilon() * T::lit(16.0) * energy;

    let mut best: Option<(PiecewiseLogParams<T>, T)> = None;
    for r0 in range {
        let params = piecewise_params(&lr, ys, r0, opts);
        let sse = ModelParams::PiecewiseLog(params).sse_against(ys);
        match &best {
            Some((_, b)) if !(sse < *b - tie) => {}
            _ => best = Some((params, sse)),
        }
    }
    let (params, sse) = best.expect("non-empty range");
    Ok(ModelFit::new(ModelParams::PiecewiseLog(params), sse, n))
}
