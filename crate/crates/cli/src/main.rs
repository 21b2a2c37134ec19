//! `graphlet`: sampling, counting, enumeration, verification, order caching
//! and benchmarking from the command line.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use graphlet_core::apx::{self, ApxSampler, ApxUgsConfig};
use graphlet_core::count::{estimate_counts, CountParams};
use graphlet_core::dd_order::{compute_apx_dd, compute_dd, DdOrder, OrderMode, OrderSidecar};
use graphlet_core::oracle::{self, suites};
use graphlet_core::ugs::UgsSampler;
use graphlet_core::walk::{WalkConfig, WalkSampler};
use graphlet_core::{generators, Error, Graph, Graphlet, LedgerSnapshot, Result};

#[derive(Parser, Debug)]
#[command(name = "graphlet", version, about = "Graphlet sampling and counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw graphlet samples.
    Sample(SampleArgs),
    /// Estimate the graphlet count of every isomorphism class.
    Count(CountArgs),
    /// List every graphlet (small graphs only).
    Enumerate(EnumerateArgs),
    /// Run an invariant suite; exits 1 on a violation.
    Verify(VerifyArgs),
    /// Compute a vertex order and store it for reuse.
    Preprocess(PreprocessArgs),
    /// Time preprocessing and sampling and report query counts.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Edge-list file; standard input when neither this nor --gen is given.
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Built-in generator, e.g. `er:100,0.1,7`, `star:5`, `lollipop:3,2,3`.
    #[arg(long)]
    gen: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Algo {
    Ugs,
    ApxUgs,
    Rw,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Ids,
    Json,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "ugs")]
    algo: Algo,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target distance from uniform (apx-ugs), or walk accuracy used to pick
    /// the step count when --steps is absent (rw).
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = apx::DEFAULT_C1)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// Walk steps between extraction attempts; defaults to the exact mixing
    /// time on small graphs.
    #[arg(long)]
    steps: Option<u64>,
    /// Vertex order file: read when present, written otherwise.
    #[arg(long)]
    order_cache: Option<PathBuf>,
    /// Print query counts as JSON on standard error.
    #[arg(long)]
    ledger: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "ids")]
    format: Format,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long, default_value_t = 0.1)]
    eps1: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    order_cache: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    /// Print only the number of graphlets.
    #[arg(long)]
    count: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Spectral,
    Bounds,
    Walk,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum)]
    suite: Suite,
    /// Run over the built-in graph families instead of one input graph.
    #[arg(long, conflicts_with_all = ["graph", "gen"])]
    builtin: bool,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Apx,
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Sampling accuracy the approximate order is built for.
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BenchAlgo {
    Dd,
    ApxDd,
    Ugs,
    ApxUgs,
    Rw,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Edge-list file; used when no --gen is given (standard input otherwise).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator specs, one row each.
    #[arg(long = "gen")]
    gens: Vec<String>,
    #[arg(long, value_enum)]
    algo: BenchAlgo,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    steps: u64,
    /// Also print the log-log slope of preprocessing queries against n.
    #[arg(long)]
    fit: bool,
}

/// Errors that map to exit code 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(format!("json error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::SUCCESS,
        (Ok(false), Ok(())) => ExitCode::from(1),
        (Err(Failure(msg)), _) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        (_, Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` signals a verification violation.
fn run(cmd: Command, out: &mut impl Write) -> CliResult<bool> {
    match cmd {
        Command::Sample(a) => sample(a, out).map(|_| true),
        Command::Count(a) => count(a, out).map(|_| true),
        Command::Enumerate(a) => enumerate(a, out).map(|_| true),
        Command::Verify(a) => verify(a, out),
        Command::Preprocess(a) => preprocess(a, out).map(|_| true),
        Command::Bench(a) => bench(a, out).map(|_| true),
    }
}

fn load_graph(input: &Input) -> Result<Graph> {
    load_from(input.graph.as_deref(), input.gen.as_deref())
}

fn load_from(path: Option<&Path>, gen: Option<&str>) -> Result<Graph> {
    if let Some(spec) = gen {
        return generators::from_spec(spec);
    }
    match path {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Graph::load_edge_list(BufReader::new(f))
        }
        None => Graph::load_edge_list(io::stdin().lock()),
    }
}

fn read_cache(path: &Path) -> CliResult<Option<OrderSidecar>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Failure(format!("{}: not an order cache: {e}", path.display())))
}

fn write_cache(path: &Path, ord: &DdOrder) -> CliResult<()> {
    let text = serde_json::to_string(&ord.to_sidecar())?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Exact order, through the cache when one is given.
fn exact_order(g: &Graph, k: usize, cache: Option<&Path>) -> CliResult<DdOrder> {
    if let Some(path) = cache {
        if let Some(car) = read_cache(path)? {
            check_cached(&car, k, "exact", path)?;
            return Ok(DdOrder::from_sidecar(g, &car)?);
        }
    }
    let ord = compute_dd(g, k)?;
    if let Some(path) = cache {
        write_cache(path, &ord)?;
    }
    Ok(ord)
}

fn apx_order(g: &Graph, cfg: &ApxUgsConfig, seed: u64, cache: Option<&Path>) -> CliResult<DdOrder> {
    if let Some(path) = cache {
        if let Some(car) = read_cache(path)? {
            check_cached(&car, cfg.k, "approximate", path)?;
            if car.beta != Some(cfg.beta()) {
                return Err(Failure(format!(
                    "{}: order built for beta = {:?}, need {}",
                    path.display(),
                    car.beta,
                    cfg.beta()
                )));
            }
            return Ok(DdOrder::from_sidecar(g, &car)?);
        }
    }
    let ord = apx::preprocess(g.probe(), cfg, seed)?;
    if let Some(path) = cache {
        write_cache(path, &ord)?;
    }
    Ok(ord)
}

fn check_cached(car: &OrderSidecar, k: usize, mode: &str, path: &Path) -> CliResult<()> {
    if car.k != k || car.mode != mode {
        return Err(Failure(format!(
            "{}: cached order is {} for k = {}, need {mode} for k = {k}",
            path.display(),
            car.mode,
            car.k
        )));
    }
    Ok(())
}

fn ids(samples: &[Graphlet]) -> Vec<&[usize]> {
    samples.iter().map(|s| s.vertices()).collect()
}

fn sample(a: SampleArgs, out: &mut impl Write) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let start = g.ledger().snapshot();
    let (samples, stats, pre) = match a.algo {
        Algo::Ugs => {
            let ord = exact_order(&g, a.k, a.order_cache.as_deref())?;
            let pre = g.ledger().snapshot();
            let s = UgsSampler::new(&g, &ord)?;
            let (samples, stats) = s.sample_many(a.samples, a.seed, a.jobs)?;
            (samples, serde_json::to_value(stats)?, pre)
        }
        Algo::ApxUgs => {
            let cfg = ApxUgsConfig { c1: a.c1, c2: a.c2, ..ApxUgsConfig::new(a.k, a.eps) };
            cfg.validate()?;
            let ord = apx_order(&g, &cfg, a.seed, a.order_cache.as_deref())?;
            let pre = g.ledger().snapshot();
            let s = ApxSampler::new(&g, &ord, cfg)?;
            let (samples, stats) = s.sample_many(a.samples, a.seed, a.jobs)?;
            (samples, serde_json::to_value(stats)?, pre)
        }
        Algo::Rw => {
            let steps = match a.steps {
                Some(t) => t,
                None => oracle::walk_mixing_time(&g, a.k, a.eps)
                    .map_err(|e| Failure(format!("{e}; pass --steps explicitly")))?
                    .max(1),
            };
            let pre = g.ledger().snapshot();
            let s = WalkSampler::new(&g, WalkConfig { eps: a.eps, ..WalkConfig::new(a.k, steps) })?;
            if s.disconnected_warning() {
                eprintln!("warning: graph is disconnected; samples come from the start component only");
            }
            let (samples, stats) = s.sample_many(a.samples, a.seed)?;
            (samples, serde_json::to_value(stats)?, pre)
        }
    };
    let end = g.ledger().snapshot();
    match a.format {
        Format::Ids => {
            for s in &samples {
                writeln!(out, "{s}")?;
            }
        }
        Format::Json => {
            let report = json!({
                "command": "sample",
                "algo": a.algo,
                "k": a.k,
                "seed": a.seed,
                "eps": a.eps,
                "samples": ids(&samples),
                "stats": stats,
            });
            writeln!(out, "{report}")?;
        }
    }
    if a.ledger {
        eprintln!("{}", ledger_report(a.algo, a.k, a.seed, pre.since(&start), end.since(&pre)));
    }
    Ok(())
}

fn ledger_report(algo: Algo, k: usize, seed: u64, pre: LedgerSnapshot, sampling: LedgerSnapshot) -> serde_json::Value {
    json!({
        "ledger": true,
        "algo": algo,
        "k": k,
        "seed": seed,
        "preprocessing": pre,
        "sampling": sampling,
        "total": pre.total() + sampling.total(),
    })
}

fn count(a: CountArgs, out: &mut impl Write) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let ord = exact_order(&g, a.k, a.order_cache.as_deref())?;
    let s = UgsSampler::new(&g, &ord)?;
    let report = estimate_counts(&s, CountParams::new(a.eps0, a.eps1, a.delta), a.seed, a.jobs)?;
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    Ok(())
}

fn enumerate(a: EnumerateArgs, out: &mut impl Write) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let index = oracle::enumerate_graphlets(&g, a.k)?;
    if a.count {
        writeln!(out, "{}", index.len())?;
    } else {
        for s in &index.all {
            writeln!(out, "{s}")?;
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut impl Write) -> CliResult<bool> {
    let graphs = if a.builtin {
        suites::suite_graphs()
    } else {
        let g = load_graph(&a.input)?;
        let name = a.input.gen.clone().unwrap_or_else(|| match &a.input.graph {
            Some(p) => p.display().to_string(),
            None => "stdin".into(),
        });
        vec![(name, g)]
    };
    let mut reports = Vec::new();
    let mut pass = true;
    for (name, g) in &graphs {
        let (holds, value) = match a.suite {
            Suite::Spectral => {
                let r = suites::spectral_check(name, g)?;
                (r.holds, serde_json::to_value(r)?)
            }
            Suite::Bounds => {
                let r = suites::bounds_check(name, g, a.k)?;
                (r.holds, serde_json::to_value(r)?)
            }
            Suite::Walk => {
                let r = suites::walk_check(name, g, a.k, a.eps)?;
                (r.holds, serde_json::to_value(r)?)
            }
        };
        pass &= holds;
        reports.push(value);
    }
    let suite = match a.suite {
        Suite::Spectral => "spectral",
        Suite::Bounds => "bounds",
        Suite::Walk => "walk",
    };
    let report = json!({
        "command": "verify",
        "suite": suite,
        "k": a.k,
        "eps": a.eps,
        "graphs": graphs.len(),
        "pass": pass,
        "reports": reports,
    });
    writeln!(out, "{report}")?;
    Ok(pass)
}

fn preprocess(a: PreprocessArgs, out: &mut impl Write) -> CliResult<()> {
    let g = load_graph(&a.input)?;
    let clock = Instant::now();
    let ord = match a.mode {
        Mode::Exact => compute_dd(&g, a.k)?,
        Mode::Apx => {
            let cfg = ApxUgsConfig::new(a.k, a.eps);
            apx::preprocess(g.probe(), &cfg, a.seed)?
        }
    };
    let seconds = clock.elapsed().as_secs_f64();
    write_cache(&a.out, &ord)?;
    let beta = match ord.mode() {
        OrderMode::Exact => None,
        OrderMode::Approximate { beta, .. } => Some(beta),
    };
    let report = json!({
        "command": "preprocess",
        "mode": if ord.is_exact() { "exact" } else { "approximate" },
        "k": a.k,
        "seed": a.seed,
        "beta": beta,
        "n": g.n(),
        "m": g.m(),
        "z": ord.z(),
        "nonempty_buckets": ord.nonempty_buckets().count(),
        "ledger": g.ledger().snapshot(),
        "seconds": seconds,
        "out": a.out.display().to_string(),
    });
    writeln!(out, "{report}")?;
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    algo: BenchAlgo,
    graph: String,
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    preprocess_seconds: f64,
    preprocess_ledger: LedgerSnapshot,
    preprocess_queries: u64,
    samples: usize,
    seconds_per_sample: Option<f64>,
    sampling_ledger: LedgerSnapshot,
}

fn bench(a: BenchArgs, out: &mut impl Write) -> CliResult<()> {
    let inputs: Vec<(String, Graph)> = if a.gens.is_empty() {
        let name = a.graph.as_ref().map_or("stdin".into(), |p| p.display().to_string());
        vec![(name, load_from(a.graph.as_deref(), None)?)]
    } else {
        a.gens.iter().map(|s| Ok((s.clone(), generators::from_spec(s)?))).collect::<Result<_>>()?
    };
    let mut points = Vec::new();
    for (name, g) in &inputs {
        let row = bench_one(&a, name, g)?;
        points.push((row.n as f64, row.preprocess_queries as f64));
        writeln!(out, "{}", serde_json::to_string(&row)?)?;
    }
    if a.fit {
        let slope = log_log_slope(&points)
            .ok_or_else(|| Failure("a fit needs at least two graphs of different size".into()))?;
        writeln!(out, "{}", json!({ "fit": "preprocess_queries ~ n^x", "x": slope, "rows": points.len() }))?;
    }
    Ok(())
}

fn bench_one(a: &BenchArgs, name: &str, g: &Graph) -> CliResult<BenchRow> {
    let beta = a.eps / 2.0;
    let clock = Instant::now();
    let ord = match a.algo {
        BenchAlgo::Dd | BenchAlgo::Ugs => Some(compute_dd(g, a.k)?),
        BenchAlgo::ApxDd => Some(compute_apx_dd(g, a.k, beta, a.seed)?),
        BenchAlgo::ApxUgs => Some(apx::preprocess(g.probe(), &ApxUgsConfig::new(a.k, a.eps), a.seed)?),
        BenchAlgo::Rw => None,
    };
    let preprocess_seconds = clock.elapsed().as_secs_f64();
    let pre = g.ledger().snapshot();
    let clock = Instant::now();
    let drawn = match (a.algo, &ord) {
        (BenchAlgo::Ugs, Some(ord)) => {
            UgsSampler::new(g, ord)?.sample_many(a.samples, a.seed, 1)?;
            a.samples
        }
        (BenchAlgo::ApxUgs, Some(ord)) => {
            ApxSampler::new(g, ord, ApxUgsConfig::new(a.k, a.eps))?.sample_many(a.samples, a.seed, 1)?;
            a.samples
        }
        (BenchAlgo::Rw, _) => {
            WalkSampler::new(g, WalkConfig::new(a.k, a.steps))?.sample_many(a.samples, a.seed)?;
            a.samples
        }
        _ => 0,
    };
    let sampling_seconds = clock.elapsed().as_secs_f64();
    Ok(BenchRow {
        algo: a.algo,
        graph: name.to_string(),
        n: g.n(),
        m: g.m(),
        k: a.k,
        seed: a.seed,
        preprocess_seconds,
        preprocess_ledger: pre,
        preprocess_queries: pre.total(),
        samples: drawn,
        seconds_per_sample: (drawn > 0).then(|| sampling_seconds / drawn as f64),
        sampling_ledger: g.ledger().snapshot().since(&pre),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.5))).collect();
        assert!((log_log_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
