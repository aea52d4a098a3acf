use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use permsgd::harness::{ObjectiveSpec, PolicySpec};
use permsgd::objectives;
use permsgd::optimizer::Record;
use permsgd::oracle::{coupled_recursion_check, lemma_suite, LemmaReport};
use permsgd::{
    compare_policies, fit_rate, herd_greedy, herd_signwalk, prefix_norm_profile, run_epochs, run_sweep,
    weighted_average, AveragingScheme, PermutationPolicy, RunConfig, StepSizeSpec, SweepRow, SweepSpec, VectorBatch,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "permsgd", version, about = "Permutation-based SGD experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its end-of-epoch trace as CSV.
    Run {
        /// JSON run config.
        config: PathBuf,
        /// Trace CSV path (stdout if omitted).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Summary JSON path (stderr if omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run a sweep spec and write one CSV row per axis value.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a log-log rate to a sweep CSV; optionally require the exponent in a range.
    FitRate {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        min_exponent: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        max_exponent: Option<f64>,
        #[arg(long)]
        min_r2: Option<f64>,
    },
    /// Run the exact lemma scans and the coupled two-step check; JSON report.
    VerifyLemmas {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Random states per step size for the coupled check.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Herd a batch of vectors and write the prefix-norm profile as CSV.
    VerifyHerding {
        /// CSV of vectors, one per row, no header. Random unit vectors if omitted.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Variant::Greedy)]
        variant: Variant,
        /// Fail if the largest prefix norm exceeds this.
        #[arg(long)]
        max_h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two sweep specs that differ only in policy or step size.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Greedy,
    Signwalk,
    Random,
}

#[derive(Deserialize)]
struct RunSpec {
    objective: ObjectiveSpec,
    policy: PolicySpec,
    stepsize: StepSizeSpec,
    epochs: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "final_key")]
    averaging: String,
    #[serde(default)]
    inner: bool,
}

fn final_key() -> String {
    "final".into()
}

#[derive(Serialize)]
struct RunSummary {
    objective: String,
    eta: f64,
    epochs_run: usize,
    diverged: bool,
    seed: u64,
    gap: f64,
    x_hat: Vec<f64>,
    /// Gap of the final, uniform-average and tail-average iterates.
    gaps: BTreeMap<&'static str, f64>,
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(config: &Path, trace_path: Option<&Path>, summary_path: Option<&Path>) -> Result<bool> {
    let spec: RunSpec = serde_json::from_str(&read(config)?).context("parsing run config")?;
    let obj = objectives::from_key(&spec.objective.key, &spec.objective.params)?;
    let x0 = obj.default_x0();
    let eta = spec.stepsize.resolve(&obj, &x0, spec.epochs)?;
    let policy = PermutationPolicy::from_key(&spec.policy.key, spec.seed, spec.policy.herding, spec.policy.order)?;
    let record = if spec.inner { Record::Everything } else { Record::EndOfEpoch };
    let trace = run_epochs(RunConfig::new(&obj, policy, eta, spec.epochs).with_x0(x0).with_record(record))?;

    let mut w = csv::Writer::from_writer(writer(trace_path)?);
    w.write_record(["epoch", "step", "coord", "value"])?;
    for (k, p) in trace.end_points.iter().enumerate() {
        for (j, v) in p.iter().enumerate() {
            w.write_record([(k + 1).to_string(), "0".into(), j.to_string(), v.to_string()])?;
        }
    }
    let n = obj.n();
    for (t, p) in trace.iterates.iter().enumerate() {
        for (j, v) in p.iter().enumerate() {
            w.write_record([(t / n + 1).to_string(), (t % n + 1).to_string(), j.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;

    let mut gaps = BTreeMap::new();
    for key in ["final", "average", "tail"] {
        let g = if trace.diverged {
            f64::INFINITY
        } else {
            obj.gap(&weighted_average(&trace, &AveragingScheme::from_key(key, spec.epochs)?)?)
        };
        gaps.insert(key, g);
    }
    let x_hat = if trace.diverged {
        trace.final_point().to_vec()
    } else {
        weighted_average(&trace, &AveragingScheme::from_key(&spec.averaging, spec.epochs)?)?
    };
    let summary = RunSummary {
        objective: obj.name.clone(),
        eta,
        epochs_run: trace.epochs_run,
        diverged: trace.diverged,
        seed: trace.seed,
        gap: if trace.diverged { f64::INFINITY } else { obj.gap(&x_hat) },
        x_hat,
        gaps,
    };
    let text = serde_json::to_string_pretty(&summary)?;
    match summary_path {
        Some(p) => fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(!trace.diverged)
}

fn write_rows(rows: &[SweepRow], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer(out)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn fit(input: &Path, min_e: Option<f64>, max_e: Option<f64>, min_r2: Option<f64>) -> Result<bool> {
    let mut r = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
    let f = fit_rate(&rows)?;
    println!("{}", serde_json::to_string_pretty(&f)?);
    let ok = min_e.map_or(true, |m| f.exponent >= m)
        && max_e.map_or(true, |m| f.exponent <= m)
        && min_r2.map_or(true, |m| f.r_squared >= m);
    Ok(ok)
}

fn verify_lemmas(out: Option<&Path>, trials: usize) -> Result<bool> {
    let mut reports = lemma_suite()?;
    for (j, eta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
        let r = coupled_recursion_check(1.0, 1.0, eta, trials, j as u64)?;
        reports.push(LemmaReport {
            lemma_id: "coupled_two_step".into(),
            grid: format!("{trials} random states, eta = {eta}/L, 4 assignments each"),
            checked: r.checks,
            worst_margin: r.worst_margin,
            pass: r.pass,
        });
    }
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, &reports)?;
    writeln!(w)?;
    Ok(reports.iter().all(|r| r.pass))
}

fn load_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    r.records().map(|rec| rec?.iter().map(|s| s.trim().parse::<f64>().context("non-numeric entry")).collect()).collect()
}

#[derive(Serialize)]
struct HerdingSummary {
    variant: &'static str,
    n: usize,
    d: usize,
    scale: f64,
    achieved_h: f64,
}

#[allow(clippy::too_many_arguments)]
fn verify_herding(
    vectors: Option<&Path>,
    n: usize,
    d: usize,
    seed: u64,
    variant: Variant,
    max_h: Option<f64>,
    out: Option<&Path>,
) -> Result<bool> {
    let (batch, scale) = match vectors {
        Some(p) => VectorBatch::centered_normalized(&load_vectors(p)?)?,
        None => (VectorBatch::random_unit(n, d, seed)?, 1.0),
    };
    let (name, order) = match variant {
        Variant::Greedy => ("greedy", herd_greedy(&batch).order),
        Variant::Signwalk => ("signwalk", herd_signwalk(&batch, seed).order),
        Variant::Random => {
            let mut o: Vec<usize> = (0..batch.n()).collect();
            o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            ("random", o)
        }
    };
    let profile = prefix_norm_profile(&batch, &order)?;
    let mut w = csv::Writer::from_writer(writer(out)?);
    w.write_record(["k", "prefix_norm"])?;
    for (k, v) in profile.iter().enumerate() {
        w.write_record([(k + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    let achieved_h = profile.iter().copied().fold(0.0, f64::max);
    let summary = HerdingSummary { variant: name, n: batch.n(), d: batch.d(), scale, achieved_h };
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(max_h.map_or(true, |m| achieved_h <= m))
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, trace, summary } => run(&config, trace.as_deref(), summary.as_deref()),
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::from_json(&read(&spec)?)?;
            let rows = run_sweep(&spec)?;
            write_rows(&rows, out.as_deref())?;
            Ok(rows.iter().all(|r| r.diverged == 0))
        }
        Command::FitRate { input, min_exponent, max_exponent, min_r2 } => {
            fit(&input, min_exponent, max_exponent, min_r2)
        }
        Command::VerifyLemmas { out, trials } => verify_lemmas(out.as_deref(), trials),
        Command::VerifyHerding { vectors, n, d, seed, variant, max_h, out } => {
            verify_herding(vectors.as_deref(), n, d, seed, variant, max_h, out.as_deref())
        }
        Command::Compare { a, b, out } => {
            let a = SweepSpec::from_json(&read(&a)?)?;
            let b = SweepSpec::from_json(&read(&b)?)?;
            let report = compare_policies(&a, &b)?;
            let mut w = writer(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
