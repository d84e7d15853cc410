use serde::Serialize;

use super::{BetaParams, FitError, ModelFit, ModelParams};
use crate::spectrum::NormalizedSpectrum;
use crate::Scalar;

/// Starting values for the Beta fit from the log-linear regression
/// `ln y_r = ln C + a (-ln r) + b ln(n + 1 - r)`.
pub fn beta_init<T: Scalar>(y: &NormalizedSpectrum<T>) -> Result<BetaParams<T>, FitError> {
    let n = y.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: n });
    }
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for (i, &v) in y.values().iter().enumerate() {
        if !(v > T::zero()) {
            return Err(FitError::NonPositiveValue(i + 1));
        }
        let r = i + 1;
        x1.push(-T::from_index(r).ln());
        x2.push(T::from_index(n + 1 - r).ln());
        z.push(v.ln());
    }
    let nt = T::from_index(n);
    let m1 = x1.iter().copied().sum::<T>() / nt;
    let m2 = x2.iter().copied().sum::<T>() / nt;
    let mz = z.iter().copied().sum::<T>() / nt;

    // Centred normal equations for (a, b); the intercept follows from the means.
    let (mut s11, mut s12, mut s22, mut s1z, mut s2z) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let (d1, d2, dz) = (x1[i] - m1, x2[i] - m2, z[i] - mz);
        s11 = s11 + d1 * d1;
        s12 = s12 + d1 * d2;
        s22 = s22 + d2 * d2;
        s1z = s1z + d1 * dz;
        s2z = s2z + d2 * dz;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > T::epsilon() * s11 * s22) {
        return Err(FitError::Degenerate("collinear log-rank regressors"));
    }
    let a = (s1z * s22 - s2z * s12) / det;
    let b = (s2z * s11 - s1z * s12) / det;
    let scale = (mz - a * m1 - b * m2).exp();
    Ok(BetaParams { scale, rank_exponent: a, tail_exponent: b })
}

/// Damping schedule and stopping rule for [`fit_beta_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub initial_damping: f64,
    /// Factor applied to the damping after a rejected step (divided after an
    /// accepted one).
    pub damping_factor: f64,
    /// Stop once an accepted step lowers the SSE by less than this fraction.
    pub relative_tolerance: f64,
    pub max_iterations: usize,
    /// No step is considered possible once damping exceeds this.
    pub max_damping: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_factor: 10.0,
            relative_tolerance: 1e-10,
            max_iterations: 200,
            max_damping: 1e16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LmReport {
    /// Jacobian evaluations.
    pub iterations: usize,
    pub accepted_steps: usize,
    /// False when the iteration cap was reached before the stopping rule.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit<T> {
    pub fit: ModelFit<T>,
    pub report: LmReport,
}

/// Fits `C (n + 1 - r)^b / r^a` by Levenberg-Marquardt from `init`.
pub fn fit_beta<T: Scalar>(y: &NormalizedSpectrum<T>, init: BetaParams<T>) -> Result<ModelFit<T>, FitError> {
    fit_beta_with(y, init, &LmSettings::default()).map(|f| f.fit)
}

struct Problem<T> {
    ln_rank: Vec<T>,
    ln_tail: Vec<T>,
    y: Vec<T>,
}

impl<T: Scalar> Problem<T> {
    fn model(&self, p: &[T; 3], i: usize) -> T {
        p[0] * (p[2] * self.ln_tail[i] - p[1] * self.ln_rank[i]).exp()
    }

    fn sse(&self, p: &[T; 3]) -> T {
        (0..self.y.len())
            .map(|i| {
                let d = self.model(p, i) - self.y[i];
                d * d
            })
            .sum()
    }

    /// `J^T J` and `J^T r` with residual `r = f - y`.
    fn normal_equations(&self, p: &[T; 3]) -> ([[T; 3]; 3], [T; 3]) {
        let mut jtj = [[T::zero(); 3]; 3];
        let mut jtr = [T::zero(); 3];
        for i in 0..self.y.len() {
            let f = self.model(p, i);
            let res = f - self.y[i];
            let g = [f / p[0], -f * self.ln_rank[i], f * self.ln_tail[i]];
            for r in 0..3 {
                jtr[r] = jtr[r] + g[r] * res;
                for c in r..3 {
                    jtj[r][c] = jtj[r][c] + g[r] * g[c];
                }
            }
        }
        for r in 0..3 {
            for c in 0..r {
                jtj[r][c] = jtj[c][r];
            }
        }
        (jtj, jtr)
    }
}

/// Solves `(D^-1 A D^-1 + damping I) u = -D^-1 g`, returning `D^-1 u`, where
/// `D = sqrt(diag A)`. Equivalent to Marquardt's `(A + damping diag A)`.
fn damped_step<T: Scalar>(a: &[[T; 3]; 3], g: &[T; 3], damping: T) -> Option<[T; 3]> {
    let mut d = [T::zero(); 3];
    for i in 0..3 {
        if !(a[i][i] > T::zero()) {
            return None;
        }
        d[i] = a[i][i].sqrt();
    }
    let mut m = [[T::zero(); 4]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = a[r][c] / (d[r] * d[c]);
        }
        m[r][r] = m[r][r] + damping;
        m[r][3] = -g[r] / d[r];
    }
    let u = solve3(m)?;
    Some([u[0] / d[0], u[1] / d[1], u[2] / d[2]])
}

/// Gaussian elimination with partial pivoting on an augmented 3x4 system.
fn solve3<T: Scalar>(mut m: [[T; 4]; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(m[pivot][col].abs() > T::zero()) {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = m[row][3];
        for k in row + 1..3 {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// [`fit_beta`] with explicit settings and an iteration report.
///
/// Steps that drive `C` to zero or below, or produce a non-finite SSE, are
/// rejected like uphill steps. The returned SSE never exceeds the SSE at `init`.
pub fn fit_beta_with<T: Scalar>(
    y: &NormalizedSpectrum<T>,
    init: BetaParams<T>,
    settings: &LmSettings,
) -> Result<BetaFit<T>, FitError> {
    let n = y.len();
    if n < 4 {
        return Err(FitError::TooFewPoints { needed: 4, got: n });
    }
    if !(init.scale > T::zero()) || !init.rank_exponent.is_finite() || !init.tail_exponent.is_finite() {
        return Err(FitError::InvalidInit("C must be positive and exponents finite"));
    }
    let problem = Problem {
        ln_rank: (1..=n).map(|r| T::from_index(r).ln()).collect(),
        ln_tail: (1..=n).map(|r| T::from_index(n + 1 - r).ln()).collect(),
        y: y.values().to_vec(),
    };
    let mut p = [init.scale, init.rank_exponent, init.tail_exponent];
    let mut sse = problem.sse(&p);
    if !sse.is_finite() {
        return Err(FitError::NonFiniteObjective);
    }

    let factor = T::lit(settings.damping_factor);
    let max_damping = T::lit(settings.max_damping);
    let tol = T::lit(settings.relative_tolerance);
    let mut damping = T::lit(settings.initial_damping);
    let mut report = LmReport { iterations: 0, accepted_steps: 0, converged: sse == T::zero() };

    while !report.converged && report.iterations < settings.max_iterations {
        report.iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&p);
        loop {
            let trial = damped_step(&jtj, &jtr, damping).map(|d| [p[0] + d[0], p[1] + d[1], p[2] + d[2]]);
            let trial_sse = match trial {
                Some(q) if q[0] > T::zero() => Some((q, problem.sse(&q))),
                _ => None,
            };
            match trial_sse {
                Some((q, s)) if s.is_finite() && s <= sse => {
                    let decrease = (sse - s) / sse;
                    p = q;
                    sse = s;
                    report.accepted_steps += 1;
                    damping = damping / factor;
                    if !(decrease >= tol) || sse == T::zero() {
                        report.converged = true;
                    }
                    break;
                }
                _ => {
                    damping = damping * factor;
                    if damping > max_damping {
                        // Stationary: no damped step improves the objective.
                        report.converged = true;
                        break;
                    }
                }
            }
        }
    }

    let params = BetaParams { scale: p[0], rank_exponent: p[1], tail_exponent: p[2] };
    Ok(BetaFit { fit: ModelFit::new(ModelParams::Beta(params), sse, n), report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_data(n: usize, a: f64, b: f64) -> NormalizedSpectrum<f64> {
        let p = BetaParams { scale: 1.0, rank_exponent: a, tail_exponent: b };
        NormalizedSpectrum::from_weights((1..=n).map(|r| p.eval(r, n)).collect()).unwrap()
    }

    #[test]
    fn init_recovers_exact_beta() {
        let y = beta_data(10, 0.5, 1.0);
        let p = beta_init(&y).unwrap();
        assert!((p.rank_exponent - 0.5).abs() < 1e-9);
        assert!((p.tail_exponent - 1.0).abs() < 1e-9);
        let total: f64 = (1..=10).map(|r| p.eval(r, 10)).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn init_on_power_law_gives_zero_tail() {
        let y = NormalizedSpectrum::from_weights((1..=50).map(|r| (r as f64).powf(-1.1)).collect()).unwrap();
        let p = beta_init(&y).unwrap();
        assert!(p.tail_exponent.abs() < 1e-9);
        assert!((p.rank_exponent - 1.1).abs() < 1e-9);
    }

    #[test]
    fn init_survives_perturbation() {
        let mut w: Vec<f64> = (1..=10).map(|r| BetaParams { scale: 1.0, rank_exponent: 0.5, tail_exponent: 1.0 }.eval(r, 10)).collect();
        w[4] *= 1.1;
        w[4] = w[4].min(w[3]);
        let y = NormalizedSpectrum::from_weights(w).unwrap();
        let p = beta_init(&y).unwrap();
        assert!(p.scale.is_finite() && p.rank_exponent.is_finite() && p.tail_exponent.is_finite());
        let fit = fit_beta(&y, p).unwrap();
        assert!(fit.sse.is_finite());
    }

    #[test]
    fn init_needs_three_points() {
        let y = NormalizedSpectrum::from_weights(vec![2.0f64, 1.0]).unwrap();
        assert!(matches!(beta_init(&y), Err(FitError::TooFewPoints { .. })));
    }

    #[test]
    fn lm_recovers_reference_shape() {
        let y = beta_data(1280, 0.324, 1.025);
        let init = BetaParams { scale: 1e-5, rank_exponent: 0.2, tail_exponent: 0.8 };
        let fit = fit_beta(&y, init).unwrap();
        let ModelParams::Beta(p) = fit.params else { panic!() };
        assert!((p.rank_exponent - 0.324).abs() < 1e-4, "{p:?}");
        assert!((p.tail_exponent - 1.025).abs() < 1e-4, "{p:?}");
        assert!(fit.sse < 1e-18);
        assert_eq!(fit.k, 3);
    }

    #[test]
    fn lm_at_optimum_is_a_fixed_point() {
        // Non-zero residual optimum: fit once, refit from the answer.
        let mut w: Vec<f64> = (1..=60).map(|r| 60.0 / r as f64 + (61 - r) as f64 * 0.1).collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let y = NormalizedSpectrum::from_weights(w).unwrap();
        let first = fit_beta(&y, beta_init(&y).unwrap()).unwrap();
        let ModelParams::Beta(opt) = first.params else { panic!() };
        let again = fit_beta_with(&y, opt, &LmSettings::default()).unwrap();
        let ModelParams::Beta(q) = again.fit.params else { panic!() };
        assert!((q.scale - opt.scale).abs() <= 1e-5 * opt.scale);
        assert!((q.rank_exponent - opt.rank_exponent).abs() < 1e-5);
        assert!((q.tail_exponent - opt.tail_exponent).abs() < 1e-5);
        assert!(again.fit.sse <= first.sse);
        assert!(first.sse - again.fit.sse <= 1e-9 * first.sse);
        assert!(again.report.converged);
    }

    #[test]
    fn lm_never_worse_than_init() {
        let mut w: Vec<f64> = (1..=80).map(|r| (81 - r) as f64 / (r as f64).sqrt() + ((r * 7) % 5) as f64).collect();
        w.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let y = NormalizedSpectrum::from_weights(w).unwrap();
        for init in [
            beta_init(&y).unwrap(),
            BetaParams { scale: 1e-3, rank_exponent: 0.0, tail_exponent: 0.0 },
            BetaParams { scale: 10.0, rank_exponent: 3.0, tail_exponent: -1.0 },
        ] {
            let init_sse = ModelParams::Beta(init).sse_against(y.values());
            let fit = fit_beta(&y, init).unwrap();
            assert!(fit.sse <= init_sse);
        }
    }

    #[test]
    fn lm_rejects_bad_init() {
        let y = beta_data(10, 0.5, 1.0);
        let bad = BetaParams { scale: 0.0, rank_exponent: 0.5, tail_exponent: 1.0 };
        assert!(matches!(fit_beta(&y, bad), Err(FitError::InvalidInit(_))));
        let huge = BetaParams { scale: 1.0, rank_exponent: -1e6, tail_exponent: 1e6 };
        assert_eq!(fit_beta(&y, huge), Err(FitError::NonFiniteObjective));
    }

    #[test]
    fn solve3_matches_known_system() {
        let m: [[f64; 4]; 3] = [[2.0, 1.0, 0.0, 3.0], [1.0, 3.0, 1.0, 5.0], [0.0, 1.0, 4.0, 5.0]];
        let x = solve3(m).unwrap();
        for (v, e) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(solve3([[0.0f64; 4]; 3]).is_none());
    }
}
