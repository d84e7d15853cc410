//! Command-line front end for `rankspec`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 for usage errors, 2 for unreadable or malformed
//! input (and unwritable output), 3 for numerical failures.

mod plot;

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rankspec::fit::{self, LmReport, LmSettings};
use rankspec::ingest::{self, NoiseModel};
use rankspec::resample::{self, StatHistogram};
use rankspec::select::{self, SelectionEntry};
use rankspec::{
    BetaParams, Criterion, FitOrder, FixtureSpec, HistogramBin, LogParams, ModelFamily, ModelFit64, ModelParams,
    PValueReport64, PiecewiseLogParams, PiecewiseOptions, RankSpectrum, SpectrumStats64,
};

use plot::{Axis, Figure, Layer, Scale};

/// Environment variable consulted when `--seed` is not given.
pub const SEED_ENV: &str = "RANKSPEC_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "rankspec", version, about = "Ranked count spectra: statistics, fits, model selection and resampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Descriptive statistics, Gini coefficient and top shares.
    Stats(StatsArgs),
    /// Fit one model family.
    Fit(FitArgs),
    /// Fit all three families and rank them by AIC or BIC.
    Select(SelectArgs),
    /// Poisson replicates and the empirical p-value of the piecewise-vs-Beta comparison.
    Simulate(SimulateArgs),
    /// Count histogram, rank spectrum or fit overlay as SVG plus a TSV sidecar.
    Plot(PlotArgs),
    /// Write a counts file: the reconstructed dictionary fixture or a model sample.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// `label,count` lines.
    Counts,
    /// `character<TAB>syllable` lines, aggregated per syllable.
    Pairs,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input file.
    input: PathBuf,
    /// Input format; defaults to `pairs` for `.tsv` files and `counts` otherwise.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Require pinyin bases from the bundled inventory (pairs input only).
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Write JSON here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Breakpoint {
    Auto,
    At(usize),
}

fn parse_breakpoint(s: &str) -> Result<Breakpoint, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Breakpoint::Auto);
    }
    s.parse::<usize>().map(Breakpoint::At).map_err(|_| format!("expected an integer rank or `auto`, got {s:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    HighFirst,
    LowFirst,
}

#[derive(Debug, Args)]
struct PiecewiseArgs {
    /// Breakpoint rank r0, or `auto` to scan [2, n/5].
    #[arg(long, default_value = "auto", value_parser = parse_breakpoint)]
    breakpoint: Breakpoint,
    /// Force the two segments to meet at the converge point.
    #[arg(long)]
    continuous: bool,
    /// Which segment a continuous fit estimates first.
    #[arg(long, value_enum, default_value = "high-first")]
    fit_order: OrderArg,
    /// Rank where continuous segments meet (defaults to r0; needs a fixed breakpoint).
    #[arg(long)]
    converge_point: Option<f64>,
}

impl PiecewiseArgs {
    fn options(&self) -> Result<PiecewiseOptions<f64>, Failure> {
        if self.converge_point.is_some() && !self.continuous {
            return Err(Failure::Usage("--converge-point requires --continuous".into()));
        }
        if self.converge_point.is_some() && self.breakpoint == Breakpoint::Auto {
            return Err(Failure::Usage("--converge-point requires a fixed --breakpoint".into()));
        }
        let fit_order = match self.fit_order {
            OrderArg::HighFirst => FitOrder::HighFirst,
            OrderArg::LowFirst => FitOrder::LowFirst,
        };
        Ok(PiecewiseOptions { continuous: self.continuous, fit_order, converge_point: self.converge_point })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Log,
    #[value(alias = "piecewise")]
    Plog,
    Beta,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[command(flatten)]
    piecewise: PiecewiseArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "aic")]
    criterion: CriterionArg,
    #[command(flatten)]
    piecewise: PiecewiseArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    /// Master seed; falls back to $RANKSPEC_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a histogram of the statistics to this SVG (plus `.tsv`).
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Histogram,
    Spectrum,
    Fits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum View {
    Linlin,
    Loglin,
    Linlog,
    Loglog,
}

impl View {
    /// `(x, y)` scales; the first half of the name is the rank axis.
    fn scales(self) -> (Scale, Scale) {
        match self {
            View::Linlin => (Scale::Linear, Scale::Linear),
            View::Loglin => (Scale::Log, Scale::Linear),
            View::Linlog => (Scale::Linear, Scale::Log),
            View::Loglog => (Scale::Log, Scale::Log),
        }
    }
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "spectrum")]
    kind: PlotKind,
    /// Axis scales for spectrum and fit plots (x then y). Fit plots default to loglin.
    #[arg(long, value_enum)]
    view: Option<View>,
    /// Histogram bin width.
    #[arg(long, default_value_t = 1)]
    bin_width: u64,
    #[command(flatten)]
    piecewise: PiecewiseArgs,
    /// SVG path; the sidecar TSV is written next to it.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["paper_fixture", "model"]))]
struct GenerateArgs {
    /// The 1280-syllable, 9505-character reconstruction.
    #[arg(long)]
    paper_fixture: bool,
    /// Sample counts from a model instead.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Model coefficients, comma separated: log `C,a`; beta `C,a,b`; plog `C,a,C',a',r0`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Number of ranks for model output.
    #[arg(long, default_value_t = 1280)]
    n: usize,
    /// Total count for model output.
    #[arg(long, default_value_t = 9505)]
    total: u64,
    #[arg(long, value_enum, default_value = "none")]
    noise: NoiseArg,
    /// Seed; falls back to $RANKSPEC_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the counts file here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    None,
    Poisson,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

fn numeric_err(e: impl Display) -> Failure {
    Failure::Numerical(e.to_string())
}

/// Runs the command line `args` (program name first) against the process
/// standard streams and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output and diagnostic streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "rankspec: {}", f.message());
            f.code()
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Stats(a) => stats(a, out),
        Command::Fit(a) => fit_one(a, out),
        Command::Select(a) => select_models(a, out),
        Command::Simulate(a) => simulate(a, out, err),
        Command::Plot(a) => plot_cmd(a, err),
        Command::Generate(a) => generate(a, out, err),
    }
}

fn load(input: &InputArgs) -> Result<RankSpectrum, Failure> {
    let bytes = std::fs::read(&input.input)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", input.input.display())))?;
    let format = input.format.unwrap_or_else(|| {
        match input.input.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => InputFormat::Pairs,
            _ => InputFormat::Counts,
        }
    });
    let pairs = match format {
        InputFormat::Counts => ingest::parse_counts_file(&bytes),
        InputFormat::Pairs => ingest::parse_pairs_file(&bytes, input.strict),
    }
    .map_err(|e| Failure::Input(format!("{}: {e}", input.input.display())))?;
    RankSpectrum::build(pairs).map_err(|e| Failure::Input(format!("{}: {e}", input.input.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, contents: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, contents),
        None => out.write_all(contents).map_err(|e| Failure::Input(format!("cannot write output: {e}"))),
    }
}

fn emit_json<S: Serialize>(out: &mut dyn Write, path: Option<&Path>, value: &S) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(numeric_err)?;
    text.push('\n');
    emit(out, path, text.as_bytes())
}

fn resolve_seed(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Serialize)]
struct TopShare {
    fraction: f64,
    share: f64,
}

#[derive(Serialize)]
struct StatsOutput {
    #[serde(flatten)]
    stats: SpectrumStats64,
    gini: f64,
    top_shares: Vec<TopShare>,
}

const TOP_FRACTIONS: [f64; 5] = [0.01, 0.05, 0.1, 0.2, 0.5];

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let s = load(&a.input)?;
    let top_shares = TOP_FRACTIONS
        .iter()
        .map(|&fraction| Ok(TopShare { fraction, share: s.top_share(fraction).map_err(numeric_err)? }))
        .collect::<Result<_, Failure>>()?;
    let report = StatsOutput { stats: s.descriptive_stats(), gini: s.gini(), top_shares };
    emit_json(out, a.out.output.as_deref(), &report)
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    fit: ModelFit64,
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<BetaParams<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<LmReport>,
}

fn fit_piecewise(y: &rankspec::NormalizedSpectrum64, p: &PiecewiseArgs) -> Result<ModelFit64, Failure> {
    let opts = p.options()?;
    match p.breakpoint {
        Breakpoint::Auto => {
            let range = fit::default_scan_range(y.len());
            if range.is_empty() {
                return Err(Failure::Numerical(format!(
                    "too few ranks ({}) for an automatic breakpoint scan; pass --breakpoint",
                    y.len()
                )));
            }
            fit::scan_breakpoint(y, range, &opts).map_err(numeric_err)
        }
        Breakpoint::At(r0) => fit::fit_piecewise_log(y, r0, &opts).map_err(numeric_err),
    }
}

fn fit_beta(y: &rankspec::NormalizedSpectrum64) -> Result<(ModelFit64, BetaParams<f64>, LmReport), Failure> {
    let init = fit::beta_init(y).map_err(numeric_err)?;
    let b = fit::fit_beta_with(y, init, &LmSettings::default()).map_err(numeric_err)?;
    Ok((b.fit, init, b.report))
}

fn fit_one(a: FitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let s = load(&a.input)?;
    let y = s.normalize::<f64>();
    let output = match a.model {
        ModelArg::Log => FitOutput { fit: fit::fit_log(&y).map_err(numeric_err)?, init: None, optimizer: None },
        ModelArg::Plog => FitOutput { fit: fit_piecewise(&y, &a.piecewise)?, init: None, optimizer: None },
        ModelArg::Beta => {
            let (fit, init, report) = fit_beta(&y)?;
            FitOutput { fit, init: Some(init), optimizer: Some(report) }
        }
    };
    emit_json(out, a.out.output.as_deref(), &output)
}

#[derive(Serialize)]
struct SelectOutput {
    criterion: Criterion,
    n: usize,
    entries: Vec<SelectionEntry<f64>>,
    best_by_aic: ModelFamily,
    best_by_bic: ModelFamily,
    deltas: Vec<Vec<f64>>,
    fits: Vec<ModelFit64>,
}

fn all_fits(y: &rankspec::NormalizedSpectrum64, p: &PiecewiseArgs) -> Result<Vec<ModelFit64>, Failure> {
    let log = fit::fit_log(y).map_err(numeric_err)?;
    let plog = fit_piecewise(y, p)?;
    let (beta, _, _) = fit_beta(y)?;
    Ok(vec![log, plog, beta])
}

fn select_models(a: SelectArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let s = load(&a.input)?;
    let y = s.normalize::<f64>();
    let fits = all_fits(&y, &a.piecewise)?;
    let criterion = match a.criterion {
        CriterionArg::Aic => Criterion::Aic,
        CriterionArg::Bic => Criterion::Bic,
    };
    let r = select::rank_models(&fits, criterion).map_err(numeric_err)?;
    let mut ordered = Vec::with_capacity(fits.len());
    for e in &r.entries {
        ordered.push(fits.iter().find(|f| f.family == e.family).expect("one fit per family").clone());
    }
    let output = SelectOutput {
        criterion: r.criterion,
        n: r.n,
        entries: r.entries,
        best_by_aic: r.best_by_aic,
        best_by_bic: r.best_by_bic,
        deltas: r.deltas,
        fits: ordered,
    };
    emit_json(out, a.out.output.as_deref(), &output)
}

#[derive(Serialize)]
struct Observed {
    n_effective: usize,
    sse_beta: f64,
    sse_plog: f64,
    r0: usize,
    statistic: f64,
}

#[derive(Serialize)]
struct SimulateOutput {
    workers: usize,
    /// The comparison on the input itself, when both fits succeed.
    observed: Option<Observed>,
    #[serde(flatten)]
    report: PValueReport64,
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let seed = resolve_seed(a.seed)?;
    let workers = match a.workers {
        Some(0) => return Err(Failure::Usage("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    if a.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    let s = load(&a.input)?;
    let observed = match resample::replicate_statistic::<f64>(&s, 0) {
        Ok(r) => Some(Observed {
            n_effective: r.n_effective,
            sse_beta: r.sse_beta,
            sse_plog: r.sse_plog,
            r0: r.r0,
            statistic: r.statistic,
        }),
        Err(e) => {
            let _ = writeln!(err, "rankspec: observed comparison unavailable: {e}");
            None
        }
    };
    let report = resample::empirical_pvalue::<f64>(&s, a.replicates, seed, workers).map_err(numeric_err)?;
    if !report.flagged.is_empty() {
        let _ = writeln!(err, "rankspec: {} of {} replicates excluded", report.flagged.len(), report.replicates);
    }
    if let Some(path) = &a.histogram {
        let (svg, tsv) = statistic_histogram(&report.histogram, observed.as_ref().map(|o| o.statistic));
        write_file(path, svg.as_bytes())?;
        write_file(&path.with_extension("tsv"), tsv.as_bytes())?;
    }
    emit_json(out, a.out.output.as_deref(), &SimulateOutput { workers, observed, report })
}

fn statistic_histogram(h: &StatHistogram<f64>, observed: Option<f64>) -> (String, String) {
    let mut layers = vec![Layer::Bars {
        name: "replicates".into(),
        bars: h.bins.iter().map(|b| (b.lower, b.upper, b.count as f64)).collect(),
    }];
    layers.push(Layer::Rule { name: "0".into(), x: 0.0 });
    if let Some(t) = observed {
        layers.push(Layer::Rule { name: "observed".into(), x: t });
    }
    let fig = Figure {
        title: "n ln(SSE piecewise / SSE Beta) over Poisson replicates".into(),
        x: Axis { label: "n ln(SSE2/SSE1)".into(), scale: Scale::Linear },
        y: Axis { label: "replicates".into(), scale: Scale::Linear },
        layers,
        notes: vec![],
    };
    let rows: Vec<Vec<String>> =
        h.bins.iter().map(|b| vec![b.lower.to_string(), b.upper.to_string(), b.count.to_string()]).collect();
    (plot::render_svg(&fig), plot::tsv(&["lower", "upper", "count"], &rows))
}

fn plot_cmd(a: PlotArgs, _err: &mut dyn Write) -> Result<(), Failure> {
    let s = load(&a.input)?;
    let (svg, tsv) = match a.kind {
        PlotKind::Histogram => count_histogram(&s, a.bin_width)?,
        PlotKind::Spectrum => spectrum_plot(&s, a.view.unwrap_or(View::Linlin)),
        PlotKind::Fits => fits_plot(&s, a.view.unwrap_or(View::Loglin), &a.piecewise)?,
    };
    write_file(&a.output, svg.as_bytes())?;
    write_file(&a.output.with_extension("tsv"), tsv.as_bytes())
}

fn count_histogram(s: &RankSpectrum, width: u64) -> Result<(String, String), Failure> {
    let bins: Vec<HistogramBin> = s.histogram(width).map_err(|e| Failure::Usage(e.to_string()))?;
    let st = s.descriptive_stats::<f64>();
    let w = width as f64;
    let mut layers = vec![Layer::Bars {
        name: "syllables".into(),
        bars: bins.iter().map(|b| (b.bin_start as f64 - 0.5, b.bin_start as f64 + w - 0.5, b.items as f64)).collect(),
    }];
    for (name, x) in [
        ("mean-sd", st.mean - st.sd),
        ("mean", st.mean),
        ("mean+sd", st.mean + st.sd),
        ("median-MAD", st.median - st.mad),
        ("median", st.median),
        ("median+MAD", st.median + st.mad),
    ] {
        layers.push(Layer::Rule { name: name.into(), x });
    }
    let top: Vec<String> = s.entries().iter().take(15).map(|e| format!("{} ({})", e.label, e.count)).collect();
    let fig = Figure {
        title: "Items per label".into(),
        x: Axis { label: "count".into(), scale: Scale::Linear },
        y: Axis { label: "labels".into(), scale: Scale::Linear },
        layers,
        notes: top,
    };
    let rows: Vec<Vec<String>> =
        bins.iter().map(|b| vec![b.bin_start.to_string(), (b.bin_start + width - 1).to_string(), b.items.to_string()]).collect();
    Ok((plot::render_svg(&fig), plot::tsv(&["bin_start", "bin_end", "items"], &rows)))
}

fn spectrum_plot(s: &RankSpectrum, view: View) -> (String, String) {
    let y = s.normalize::<f64>();
    let points: Vec<(f64, f64)> = y.values().iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
    let (xs, ys) = view.scales();
    let fig = Figure {
        title: "Ranked spectrum".into(),
        x: Axis { label: "rank".into(), scale: xs },
        y: Axis { label: "share y_r".into(), scale: ys },
        layers: vec![Layer::Markers { name: "data".into(), points: points.clone() }],
        notes: vec![],
    };
    let rows: Vec<Vec<String>> = points.iter().map(|&(r, v)| vec![(r as usize).to_string(), v.to_string()]).collect();
    (plot::render_svg(&fig), plot::tsv(&["rank", "y"], &rows))
}

fn fits_plot(s: &RankSpectrum, view: View, p: &PiecewiseArgs) -> Result<(String, String), Failure> {
    let y = s.normalize::<f64>();
    let fits = all_fits(&y, p)?;
    let n = y.len();
    let curve = |f: &ModelFit64| -> Vec<(f64, f64)> { (1..=n).map(|r| (r as f64, f.params.eval(r, n))).collect() };
    let data: Vec<(f64, f64)> = y.values().iter().enumerate().map(|(i, &v)| ((i + 1) as f64, v)).collect();
    let label = |f: &ModelFit64| match &f.params {
        ModelParams::PiecewiseLog(PiecewiseLogParams { r0, .. }) => format!("piecewise log (r0 = {r0})"),
        ModelParams::Log(LogParams { .. }) => "log".to_string(),
        ModelParams::Beta(_) => "Beta".to_string(),
    };
    let (xs, ys) = view.scales();
    let mut layers = vec![Layer::Markers { name: "data".into(), points: data }];
    for (f, width) in fits.iter().zip([1.0, 1.5, 3.0]) {
        layers.push(Layer::Line { name: label(f), points: curve(f), width });
    }
    let fig = Figure {
        title: "Ranked spectrum with fitted rank functions".into(),
        x: Axis { label: "rank".into(), scale: xs },
        y: Axis { label: "share y_r".into(), scale: ys },
        layers,
        notes: vec![],
    };
    let rows: Vec<Vec<String>> = (1..=n)
        .map(|r| {
            let mut row = vec![r.to_string(), y.values()[r - 1].to_string()];
            row.extend(fits.iter().map(|f| f.params.eval(r, n).to_string()));
            row
        })
        .collect();
    Ok((plot::render_svg(&fig), plot::tsv(&["rank", "y", "f_log", "f_plog", "f_beta"], &rows)))
}

fn model_params(model: ModelArg, v: &[f64]) -> Result<ModelParams<f64>, Failure> {
    let want = match model {
        ModelArg::Log => 2,
        ModelArg::Beta => 3,
        ModelArg::Plog => 5,
    };
    if v.len() != want {
        return Err(Failure::Usage(format!("--params needs {want} values for this model, got {}", v.len())));
    }
    Ok(match model {
        ModelArg::Log => ModelParams::Log(LogParams { intercept: v[0], slope: v[1] }),
        ModelArg::Beta => ModelParams::Beta(BetaParams { scale: v[0], rank_exponent: v[1], tail_exponent: v[2] }),
        ModelArg::Plog => {
            if !(v[4] >= 1.0 && v[4].fract() == 0.0) {
                return Err(Failure::Usage("plog breakpoint must be a positive integer".into()));
            }
            let r0 = v[4] as usize;
            ModelParams::PiecewiseLog(PiecewiseLogParams {
                high: LogParams { intercept: v[0], slope: v[1] },
                low: LogParams { intercept: v[2], slope: v[3] },
                r0,
                continuous: false,
                fit_order: FitOrder::HighFirst,
                converge_point: r0 as f64,
            })
        }
    })
}

fn generate(a: GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let seed = resolve_seed(a.seed)?;
    let pairs = if a.paper_fixture {
        ingest::generate_fixture(&FixtureSpec::with_seed(seed)).map_err(numeric_err)?
    } else {
        let model = a.model.expect("clap enforces a source");
        let params = model_params(model, &a.params)?;
        let noise = match a.noise {
            NoiseArg::None => NoiseModel::None,
            NoiseArg::Poisson => NoiseModel::Poisson,
        };
        let pairs = ingest::generate_from_model(&params, a.n, a.total, noise, seed).map_err(numeric_err)?;
        if pairs.len() < a.n {
            let _ = writeln!(err, "rankspec: {} zero-count ranks dropped", a.n - pairs.len());
        }
        pairs
    };
    emit(out, a.output.as_deref(), ingest::write_counts_file(&pairs).as_bytes())
}
