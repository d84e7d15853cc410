//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every verdict is printed; the process
//! exits non-zero when any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rankspec::fit::{beta_init, default_scan_range, fit_beta, log_intercept, scan_breakpoint};
use rankspec::ingest::generate_fixture;
use rankspec::resample::{empirical_pvalue, poisson_sample, replicate_rng};
use rankspec::select::{aic, delta_aic};
use rankspec::{
    BetaParams, FixtureSpec, LogParams, ModelFit, ModelParams, NormalizedSpectrum, PiecewiseOptions, RankSpectrum,
};
use serde_json::Value;

// Criterion 1
const C_REFERENCE: f64 = 5.78e-3;
const C_REL_TOL: f64 = 5e-3;
const C1_BUDGET: Duration = Duration::from_millis(1);
// Criterion 2
const AIC_RATIO_TARGET: f64 = -662.0;
const AIC_RATIO_TOL: f64 = 1.0;
const DELTA_PLOG_BETA: f64 = -660.0;
const DELTA_PLOG_BETA_TOL: f64 = 2.0;
const DELTA_LOG_BETA: f64 = 2629.0;
const DELTA_LOG_BETA_TOL: f64 = 5.0;
const C2_BUDGET: Duration = Duration::from_millis(1);
// Criterion 3
const EXPONENT_TOL: f64 = 1e-4;
const BETA_SSE_MAX: f64 = 1e-18;
const SLOPE_TOL: f64 = 1e-6;
const C3_BUDGET: Duration = Duration::from_secs(5);
// Criterion 4
const NESTED_CASES: u64 = 100;
const NESTED_SLACK: f64 = 1e-15;
// Criterion 5
const GINI_CASES: u64 = 100;
const GINI_TOL: f64 = 1e-9;
const GINI_EXACT_TOL: f64 = 1e-12;
const FIXTURE_GINI: (f64, f64) = (0.45, 0.53);
// Criterion 6
const MEAN_REFERENCE: f64 = 7.4258;
const MEAN_TOL: f64 = 5e-5;
const TOP1_REFERENCE: f64 = 0.0708;
const TOP1_TOL: f64 = 0.005;
// Criterion 7
const REPLICATES: usize = 1000;
const RESAMPLE_SEED: u64 = 7;
const P_RANGE: (f64, f64) = (0.08, 0.25);
const N_EFF_SIGMAS: f64 = 3.0;
const C7_BUDGET: Duration = Duration::from_secs(120);
// Criterion 8
const POISSON_DRAWS: usize = 1_000_000;
const POISSON_LAMBDA: f64 = 7.4;
const POISSON_MEAN_TOL: f64 = 0.01;
const POISSON_VAR_TOL: f64 = 0.05;
const ZERO_DRAWS: usize = 100_000;
const ZERO_TOL: f64 = 0.005;
// Criterion 9
const CLI_REPLICATES: &str = "200";
const C9_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took <= budget, || format!("took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

fn fixture() -> RankSpectrum {
    RankSpectrum::build(generate_fixture(&FixtureSpec::default()).expect("default fixture")).expect("valid fixture")
}

fn random_spectrum(rng: &mut impl Rng, n: usize) -> RankSpectrum {
    let scale = rng.random_range(50.0..5000.0);
    let exponent = rng.random_range(0.2..1.5);
    RankSpectrum::build((1..=n).map(|r| {
        let lambda = scale / (r as f64).powf(exponent);
        let c = poisson_sample(lambda, rng).expect("finite mean") + 1;
        (format!("w{r}"), c as i64)
    }))
    .expect("positive counts")
}

fn constraint_arithmetic() -> Outcome {
    let start = Instant::now();
    let c = log_intercept(-8.11e-4f64, 1280);
    let took = within_budget(start, C1_BUDGET)?;
    let rel = (c / C_REFERENCE - 1.0).abs();
    check(rel <= C_REL_TOL, || format!("C = {c:.6e}, relative error {rel:.2e}"))?;
    Ok(format!("C = {c:.6e} (rel. err. {rel:.2e}, {took:?})"))
}

fn aic_reproduction() -> Outcome {
    let start = Instant::now();
    let ratio = 1280.0 * (2.3554f64 / 3.9534).ln();
    let d1 = aic(2.3554e-6f64, 1280, 4).map_err(|e| e.to_string())? - aic(3.9534e-6f64, 1280, 3).map_err(|e| e.to_string())?;
    let log = ModelFit::new(ModelParams::Log(LogParams { intercept: 0.0, slope: 0.0 }), 3.09e-5f64, 1280);
    let beta = ModelFit::new(
        ModelParams::Beta(BetaParams { scale: 1.0, rank_exponent: 0.0, tail_exponent: 0.0 }),
        3.95e-6f64,
        1280,
    );
    let d2 = delta_aic(&log, &beta).map_err(|e| e.to_string())?;
    let took = within_budget(start, C2_BUDGET)?;
    check((ratio - AIC_RATIO_TARGET).abs() <= AIC_RATIO_TOL, || format!("n ln ratio = {ratio:.3}"))?;
    check((d1 - DELTA_PLOG_BETA).abs() <= DELTA_PLOG_BETA_TOL, || format!("dAIC(plog, beta) = {d1:.3}"))?;
    check((d2 - DELTA_LOG_BETA).abs() <= DELTA_LOG_BETA_TOL, || format!("dAIC(log, beta) = {d2:.3}"))?;
    Ok(format!("n ln ratio = {ratio:.2}, dAIC(plog, beta) = {d1:.2}, dAIC(log, beta) = {d2:.2} ({took:?})"))
}

fn parameter_recovery() -> Outcome {
    let start = Instant::now();
    let n = 1280;
    let truth = BetaParams { scale: 5.95e-6f64, rank_exponent: 0.324, tail_exponent: 1.025 };
    let y = NormalizedSpectrum::from_weights((1..=n).map(|r| truth.eval(r, n)).collect()).map_err(|e| e.to_string())?;
    let fit = fit_beta(&y, beta_init(&y).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let ModelParams::Beta(b) = fit.params else { return Err("Beta fit returned another family".into()) };
    let (ea, eb) = ((b.rank_exponent - 0.324).abs(), (b.tail_exponent - 1.025).abs());
    check(ea < EXPONENT_TOL && eb < EXPONENT_TOL, || format!("a = {}, b = {}", b.rank_exponent, b.tail_exponent))?;
    check(fit.sse < BETA_SSE_MAX, || format!("Beta SSE = {:.3e}", fit.sse))?;

    let (hi, lo) = ((0.00877, -0.00192), (0.00532, -0.000739));
    let w: Vec<f64> = (1..=n)
        .map(|r| {
            let l = (r as f64).ln();
            if r <= 15 {
                hi.0 + hi.1 * l
            } else {
                lo.0 + lo.1 * l
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    let y = NormalizedSpectrum::from_weights(w).map_err(|e| e.to_string())?;
    let plog = scan_breakpoint(&y, default_scan_range(n), &PiecewiseOptions::discontinuous()).map_err(|e| e.to_string())?;
    let ModelParams::PiecewiseLog(p) = plog.params else { return Err("scan returned another family".into()) };
    check(p.r0 == 15, || format!("r0 = {}", p.r0))?;
    let (s1, s2) = ((p.high.slope - hi.1 / total).abs(), (p.low.slope - lo.1 / total).abs());
    check(s1 < SLOPE_TOL && s2 < SLOPE_TOL, || format!("slope errors {s1:.2e}, {s2:.2e}"))?;
    let took = within_budget(start, C3_BUDGET)?;
    Ok(format!("a err {ea:.1e}, b err {eb:.1e}, SSE {:.1e}; r0 = 15, slope errs {s1:.1e}/{s2:.1e} ({took:?})", fit.sse))
}

fn nested_dominance() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for case in 0..NESTED_CASES {
        let mut rng = replicate_rng(4, case);
        let n = rng.random_range(20..=2000);
        let y = random_spectrum(&mut rng, n).normalize::<f64>();
        let one = rankspec::fit::fit_log(&y).map_err(|e| e.to_string())?;
        let two = scan_breakpoint(&y, default_scan_range(y.len()), &PiecewiseOptions::discontinuous())
            .map_err(|e| e.to_string())?;
        worst = worst.max(two.sse - one.sse);
        check(two.sse <= one.sse + NESTED_SLACK, || {
            format!("case {case} (n = {}): SSE plog {:.3e} > SSE log {:.3e}", y.len(), two.sse, one.sse)
        })?;
    }
    Ok(format!("{NESTED_CASES} spectra, max SSE(plog) - SSE(log) = {worst:.3e}"))
}

fn brute_gini(c: &[u64]) -> f64 {
    let n = c.len() as f64;
    let mean = c.iter().sum::<u64>() as f64 / n;
    let diff: f64 = c.iter().flat_map(|&x| c.iter().map(move |&y| (x as f64 - y as f64).abs())).sum();
    diff / (2.0 * n * n * mean)
}

fn gini_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for case in 0..GINI_CASES {
        let mut rng = replicate_rng(5, case);
        let n = rng.random_range(1..=200);
        let s = random_spectrum(&mut rng, n);
        let counts: Vec<u64> = s.counts().collect();
        let err = (s.gini::<f64>() - brute_gini(&counts)).abs();
        worst = worst.max(err);
        check(err <= GINI_TOL, || format!("case {case}: |formula - pairwise| = {err:.3e}"))?;
    }
    let small = RankSpectrum::build([("a", 1), ("b", 2), ("c", 3)]).map_err(|e| e.to_string())?;
    let g3 = small.gini::<f64>();
    check((g3 - 2.0 / 9.0).abs() <= GINI_EXACT_TOL, || format!("gini([1,2,3]) = {g3}"))?;
    let gf = fixture().gini::<f64>();
    check(gf >= FIXTURE_GINI.0 && gf <= FIXTURE_GINI.1, || format!("fixture Gini = {gf:.4}"))?;
    Ok(format!("max oracle gap {worst:.1e}, gini([1,2,3]) = {g3:.15}, fixture Gini = {gf:.4}"))
}

fn fixture_statistics() -> Outcome {
    let s = fixture();
    let st = s.descriptive_stats::<f64>();
    check(st.n_syllables == 1280, || format!("n = {}", st.n_syllables))?;
    check(st.total_characters == 9505, || format!("total = {}", st.total_characters))?;
    check(st.mean == 9505.0 / 1280.0 && (st.mean - MEAN_REFERENCE).abs() < MEAN_TOL, || format!("mean = {}", st.mean))?;
    check(st.singleton_count == 203, || format!("singletons = {}", st.singleton_count))?;
    let top1 = s.top_share(0.01f64).map_err(|e| e.to_string())?;
    check((top1 - TOP1_REFERENCE).abs() <= TOP1_TOL, || format!("top-1% share = {top1:.4}"))?;
    check(st.median == 5.0, || format!("median = {}", st.median))?;
    check(st.mad == 3.0, || format!("MAD = {}", st.mad))?;
    Ok(format!(
        "n = 1280, total = 9505, mean = {}, singletons = 203, top-1% = {top1:.4}, median = 5, MAD = 3",
        st.mean
    ))
}

fn resampling() -> Outcome {
    let start = Instant::now();
    let s = fixture();
    let one = empirical_pvalue::<f64>(&s, REPLICATES, RESAMPLE_SEED, 1).map_err(|e| e.to_string())?;
    let eight = empirical_pvalue::<f64>(&s, REPLICATES, RESAMPLE_SEED, 8).map_err(|e| e.to_string())?;
    let took = within_budget(start, C7_BUDGET)?;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    check(one == eight && bits(&one.statistics) == bits(&eight.statistics), || {
        "reports differ between 1 and 8 workers".into()
    })?;
    let p = one.p_value;
    check(p >= P_RANGE.0 && p <= P_RANGE.1, || format!("p = {p}"))?;
    let z = (one.mean_n_effective - one.expected_n_effective) / one.n_effective_se;
    check(z.abs() <= N_EFF_SIGMAS, || {
        format!("mean n_eff {} vs expected {} (z = {z:.2})", one.mean_n_effective, one.expected_n_effective)
    })?;
    Ok(format!(
        "p = {p}, {} excluded, mean n_eff {:.2} vs {:.2} (z = {z:.2}), workers 1 == 8 ({took:?})",
        one.flagged.len(),
        one.mean_n_effective,
        one.expected_n_effective
    ))
}

fn poisson_sampler() -> Outcome {
    let mut rng = replicate_rng(8, 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..POISSON_DRAWS {
        let k = poisson_sample(POISSON_LAMBDA, &mut rng).map_err(|e| e.to_string())? as f64;
        sum += k;
        sq += k * k;
    }
    let m = POISSON_DRAWS as f64;
    let mean = sum / m;
    let var = (sq - m * mean * mean) / (m - 1.0);
    check((mean - POISSON_LAMBDA).abs() <= POISSON_MEAN_TOL, || format!("mean = {mean:.5}"))?;
    check((var - POISSON_LAMBDA).abs() <= POISSON_VAR_TOL, || format!("variance = {var:.5}"))?;
    let mut rng = replicate_rng(8, 1);
    let mut zeros = 0usize;
    for _ in 0..ZERO_DRAWS {
        zeros += (poisson_sample(1.0, &mut rng).map_err(|e| e.to_string())? == 0) as usize;
    }
    let frac = zeros as f64 / ZERO_DRAWS as f64;
    check((frac - (-1f64).exp()).abs() <= ZERO_TOL, || format!("zero fraction = {frac:.5}"))?;
    Ok(format!("mean {mean:.4}, variance {var:.4}, P(0 | 1) = {frac:.4}"))
}

fn rankspec(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rankspec"))
        .args(args)
        .current_dir(dir)
        .env_remove("RANKSPEC_SEED")
        .output()
        .map_err(|e| format!("cannot run rankspec: {e}"))?;
    check(out.status.success(), || {
        format!("`rankspec {}` exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn json(bytes: &[u8]) -> Result<Value, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("invalid JSON: {e}"))
}

fn require(v: &Value, keys: &[&str], what: &str) -> Result<(), String> {
    for k in keys {
        check(v.get(k).is_some_and(|x| !x.is_null()), || format!("{what} JSON lacks {k:?}"))?;
    }
    Ok(())
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    rankspec(d, &["generate", "--paper-fixture", "--seed", "1", "-o", "f.csv"])?;

    let stats = json(&rankspec(d, &["stats", "f.csv"])?)?;
    require(&stats, &["n_syllables", "total_characters", "mean", "median", "sd", "mad", "gini", "top_shares"], "stats")?;
    check(stats["singleton_count"] == 203 && stats["n_syllables"] == 1280, || "stats disagree with the fixture".into())?;

    let sel = json(&rankspec(d, &["select", "f.csv", "--criterion", "aic"])?)?;
    require(&sel, &["criterion", "n", "entries", "best_by_aic", "best_by_bic", "deltas", "fits"], "select")?;
    let order: Vec<&str> = sel["entries"]
        .as_array()
        .ok_or("entries is not an array")?
        .iter()
        .map(|e| e["family"].as_str().unwrap_or("?"))
        .collect();
    check(order == ["PIECEWISE_LOG", "BETA", "LOG"], || format!("AIC order {order:?}"))?;

    let sim = json(&rankspec(d, &["simulate", "f.csv", "--replicates", CLI_REPLICATES, "--seed", "7"])?)?;
    require(&sim, &["p_value", "replicates", "statistics", "histogram", "expected_n_effective"], "simulate")?;
    let p = sim["p_value"].as_f64().ok_or("p_value is not a number")?;
    check((0.0..=1.0).contains(&p), || format!("p_value = {p}"))?;
    check(sim["replicates"] == 200, || "replicate count not echoed".into())?;

    let took = within_budget(start, C9_BUDGET)?;
    Ok(format!("generate/stats/select/simulate exit 0; AIC order {}; p = {p} ({took:?})", order.join(" < ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("constraint arithmetic", constraint_arithmetic),
        ("AIC reproduction", aic_reproduction),
        ("parameter recovery", parameter_recovery),
        ("nested-model dominance", nested_dominance),
        ("Gini oracle", gini_oracle),
        ("fixture statistics", fixture_statistics),
        ("resampling determinism and calibration", resampling),
        ("Poisson sampler", poisson_sampler),
        ("end-to-end CLI", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
