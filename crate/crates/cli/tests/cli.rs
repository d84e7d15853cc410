use std::path::{Path, PathBuf};
use std::process::Command;

use rankspec_cli::run_with;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn rankspec(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("rankspec").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run { code, stdout: out, stderr: String::from_utf8(err).unwrap() }
}

fn json(r: &Run) -> Value {
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_slice(&r.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(dir: &TempDir) -> PathBuf {
    let f = dir.path().join("f.csv");
    let r = rankspec(&["generate", "--paper-fixture", "--seed", "1", "-o", path(&f)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    f
}

#[test]
fn stats_on_fixture() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let v = json(&rankspec(&["stats", path(&f)]));
    assert_eq!(v["mean"].as_f64().unwrap(), 7.42578125);
    assert_eq!(v["singleton_count"], 203);
    assert_eq!(v["median"].as_f64().unwrap(), 5.0);
    assert_eq!(v["top_shares"].as_array().unwrap().len(), 5);
}

#[test]
fn log_fit_meets_constraint() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let v = json(&rankspec(&["fit", path(&f), "--model", "log"]));
    assert_eq!(v["family"], "LOG");
    assert_eq!(v["k"], 2);
    let (c, a) = (v["params"]["C"].as_f64().unwrap(), v["params"]["a"].as_f64().unwrap());
    let s: f64 = (1..=1280).map(|r| (r as f64).ln()).sum();
    assert!((c - (1.0 - a * s) / 1280.0).abs() < 1e-12);
}

#[test]
fn piecewise_flags() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let v = json(&rankspec(&["fit", path(&f), "--model", "plog", "--breakpoint", "15"]));
    assert_eq!(v["params"]["r0"], 15);
    assert_eq!(v["k"], 4);
    assert!(v["params"]["C_prime"].is_number());

    let v = json(&rankspec(&[
        "fit", path(&f), "--model", "plog", "--breakpoint", "15", "--continuous", "--fit-order", "low-first",
        "--converge-point", "15.5",
    ]));
    assert_eq!(v["k"], 3);
    assert_eq!(v["params"]["fit_order"], "LOW_FIRST");
    assert_eq!(v["params"]["converge_point"].as_f64().unwrap(), 15.5);
    let p = &v["params"];
    let x = 15.5f64.ln();
    let high = p["C"].as_f64().unwrap() + p["a"].as_f64().unwrap() * x;
    let low = p["C_prime"].as_f64().unwrap() + p["a_prime"].as_f64().unwrap() * x;
    assert!((high - low).abs() < 1e-10);

    let r = rankspec(&["fit", path(&f), "--model", "plog", "--converge-point", "15"]);
    assert_eq!(r.code, 1);
    let r = rankspec(&["fit", path(&f), "--model", "plog", "--breakpoint", "1279"]);
    assert_eq!(r.code, 3);
}

#[test]
fn beta_fit_reports_optimizer() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let v = json(&rankspec(&["fit", path(&f), "--model", "beta"]));
    assert_eq!(v["family"], "BETA");
    assert_eq!(v["optimizer"]["converged"], true);
    assert!(v["params"]["b"].as_f64().unwrap() > v["params"]["a"].as_f64().unwrap());
}

#[test]
fn select_orders_and_nests() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let v = json(&rankspec(&["select", path(&f)]));
    let fam: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["family"].as_str().unwrap()).collect();
    assert_eq!(fam, ["PIECEWISE_LOG", "BETA", "LOG"]);
    assert!(v["entries"][0]["sse"].as_f64().unwrap() <= v["entries"][2]["sse"].as_f64().unwrap());
    let d = v["deltas"][0][1].as_f64().unwrap();
    assert!(d < 0.0);

    let v = json(&rankspec(&["select", path(&f), "--criterion", "bic"]));
    assert_eq!(v["criterion"], "BIC");
    assert_eq!(v["best_by_bic"], "PIECEWISE_LOG");
}

#[test]
fn select_keeps_nesting_on_model_data() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("m.csv");
    let r = rankspec(&[
        "generate", "--model", "beta", "--params", "1,0.6,0.4", "--n", "300", "--total", "5000", "--noise", "poisson",
        "--seed", "4", "-o", path(&f),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&rankspec(&["select", path(&f)]));
    let sse = |fam: &str| {
        v["entries"].as_array().unwrap().iter().find(|e| e["family"] == fam).unwrap()["sse"].as_f64().unwrap()
    };
    assert!(sse("PIECEWISE_LOG") <= sse("LOG") + 1e-15);
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let a = rankspec(&["simulate", path(&f), "--replicates", "30", "--seed", "9", "--workers", "1"]);
    let b = rankspec(&["simulate", path(&f), "--replicates", "30", "--seed", "9", "--workers", "4"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let strip = |r: &Run| {
        let mut v: Value = serde_json::from_slice(&r.stdout).unwrap();
        v.as_object_mut().unwrap().remove("workers");
        v
    };
    assert_eq!(strip(&a), strip(&b));

    let g = dir.path().join("g.csv");
    rankspec(&["generate", "--paper-fixture", "--seed", "1", "-o", path(&g)]);
    assert_eq!(std::fs::read(&f).unwrap(), std::fs::read(&g).unwrap());
    assert_eq!(rankspec(&["select", path(&f)]).stdout, rankspec(&["select", path(&g)]).stdout);
}

#[test]
fn simulate_histogram_matches_report() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let svg = dir.path().join("hist.svg");
    let v = json(&rankspec(&[
        "simulate", path(&f), "--replicates", "40", "--seed", "2", "--workers", "2", "--histogram", path(&svg),
    ]));
    let tsv = std::fs::read_to_string(svg.with_extension("tsv")).unwrap();
    let binned: u64 = tsv.lines().skip(1).map(|l| l.split('\t').nth(2).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(binned as usize, v["statistics"].as_array().unwrap().len());
    assert_eq!(v["statistics"].as_array().unwrap().len() + v["flagged"].as_array().unwrap().len(), 40);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
    assert!(v["observed"]["statistic"].as_f64().unwrap() < 0.0);
}

#[test]
fn fit_overlay_sidecar() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    let out = dir.path().join("fits.svg");
    let r = rankspec(&["plot", path(&f), "--kind", "fits", "--view", "loglin", "-o", path(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let tsv = std::fs::read_to_string(out.with_extension("tsv")).unwrap();
    let mut lines = tsv.lines();
    assert_eq!(lines.next(), Some("rank\ty\tf_log\tf_plog\tf_beta"));
    assert_eq!(lines.count(), 1280);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.contains(">1000<"));
    assert_eq!(svg.matches("<path").count(), 3);
}

#[test]
fn spectrum_views_and_histogram() {
    let dir = TempDir::new().unwrap();
    let f = fixture(&dir);
    for view in ["linlin", "loglin", "linlog", "loglog"] {
        let out = dir.path().join(format!("s-{view}.svg"));
        let r = rankspec(&["plot", path(&f), "--kind", "spectrum", "--view", view, "-o", path(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let tsv = std::fs::read_to_string(out.with_extension("tsv")).unwrap();
        assert_eq!(tsv.lines().count(), 1281);
    }
    let out = dir.path().join("h.svg");
    assert_eq!(rankspec(&["plot", path(&f), "--kind", "histogram", "-o", path(&out)]).code, 0);
    let tsv = std::fs::read_to_string(out.with_extension("tsv")).unwrap();
    let items: usize = tsv.lines().skip(1).map(|l| l.split('\t').nth(2).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(items, 1280);
    assert!(tsv.lines().nth(1).unwrap().starts_with("1\t1\t203"));
}

#[test]
fn single_point_plot() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("one.csv");
    std::fs::write(&f, "a,3\n").unwrap();
    let out = dir.path().join("one.svg");
    assert_eq!(rankspec(&["plot", path(&f), "--view", "linlin", "-o", path(&out)]).code, 0);
    let svg = std::fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches(r#"r="2""#).count(), 1);
}

#[test]
fn pairs_input() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("p.tsv");
    std::fs::write(&f, "好\thao3\n好\thao4\n号\thao4\n能\tneng2\n好\thao3\n").unwrap();
    let v = json(&rankspec(&["stats", path(&f)]));
    assert_eq!(v["total_characters"], 4);
    assert_eq!(v["n_syllables"], 3);

    std::fs::write(&f, "好\thao9\n").unwrap();
    let r = rankspec(&["stats", path(&f)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1"), "{}", r.stderr);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.csv");
    let r = rankspec(&["fit", path(&missing), "--model", "log"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("missing.csv"));

    assert_eq!(rankspec(&["frobnicate"]).code, 1);
    assert_eq!(rankspec(&["fit"]).code, 1);
    assert_eq!(rankspec(&["generate"]).code, 1);
    assert_eq!(rankspec(&["--help"]).code, 0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,3\na,4\n").unwrap();
    let r = rankspec(&["stats", path(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"));

    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "a,2\nb,2\nc,2\nd,2\ne,2\n").unwrap();
    assert_eq!(rankspec(&["select", path(&flat), "--breakpoint", "2"]).code, 3);
}

#[test]
fn seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rankspec"));
        cmd.args(args).current_dir(dir.path()).env_remove("RANKSPEC_SEED");
        if let Some(s) = env {
            cmd.env("RANKSPEC_SEED", s);
        }
        cmd.output().unwrap()
    };
    let from_env = run(Some("5"), &["generate", "--paper-fixture"]);
    let explicit = run(None, &["generate", "--paper-fixture", "--seed", "5"]);
    let default = run(None, &["generate", "--paper-fixture"]);
    assert!(from_env.status.success());
    assert_eq!(from_env.stdout, explicit.stdout);
    assert_ne!(from_env.stdout, default.stdout);
    assert!(from_env.stderr.is_empty());

    let bad = run(Some("x"), &["generate", "--paper-fixture"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(bad.stdout.is_empty());
}
