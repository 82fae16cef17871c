//! Command-line experiment runner: dataset simulation, metric and bound
//! audits, constrained-classifier optimization, trade-off sweeps, and
//! feature-ablation reports.
//!
//! Every command resolves its configuration (flags override a `--config`
//! file, which overrides defaults), writes the resolved configuration
//! next to its outputs, and exits 0 on success, 1 on runtime failure,
//! and 2 on configuration or validation errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use inframargin::dataset::{FairLabeling, LabeledDataset};
use inframargin::ingest::{load_csv, ColumnSchema};
use inframargin::metrics::{DecisionVector, MetricsReport};
use inframargin::model::{self, TrainConfig, UnfairnessMetric};
use inframargin::simgen::{self, DatasetMeta, PresetName};
use inframargin::{optimize, theory, Error};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "inframargin",
    about = "Quantify infra-marginality, verify its accuracy bounds, and run the trade-off experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a calibrated preset and write it as CSV
    /// with a metadata sidecar.
    Simulate(CommonArgs),
    /// Compute the metrics report and the accuracy/infra-marginality
    /// bound for a classifier on a dataset.
    Audit(AuditArgs),
    /// Maximize accuracy subject to an infra-marginality budget.
    Optimize(CommonArgs),
    /// Sweep the group-fairness trade-off weight and record the curve.
    Tradeoff(CommonArgs),
    /// Re-train on reduced feature sets and report infra-marginality
    /// against the full-feature benchmark.
    Ablate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input dataset CSV (alternative to --preset).
    #[arg(long, env = "INFRAMARGIN_INPUT")]
    input: Option<PathBuf>,
    /// Input schema: canonical, adult, meps, or a path to a schema JSON.
    #[arg(long, env = "INFRAMARGIN_SCHEMA")]
    schema: Option<String>,
    /// Preset name (S1..S5).
    #[arg(long, env = "INFRAMARGIN_PRESET")]
    preset: Option<String>,
    /// Sample size for --preset.
    #[arg(long, env = "INFRAMARGIN_N")]
    n: Option<usize>,
    /// Master seed for all randomness in the command.
    #[arg(long, env = "INFRAMARGIN_SEED")]
    seed: Option<u64>,
    /// Fairness threshold on outcome probabilities.
    #[arg(long, env = "INFRAMARGIN_TAU")]
    tau: Option<f64>,
    /// Infra-marginality budget for optimize.
    #[arg(long, env = "INFRAMARGIN_ETA")]
    eta: Option<f64>,
    /// Comma-separated, strictly increasing trade-off weights.
    #[arg(long, env = "INFRAMARGIN_GAMMAS")]
    gammas: Option<String>,
    /// Group-unfairness metric: di or fdr.
    #[arg(long, env = "INFRAMARGIN_METRIC")]
    metric: Option<String>,
    /// Thresholds per axis in the trade-off lattice.
    #[arg(long, env = "INFRAMARGIN_GRID")]
    grid: Option<usize>,
    /// Also report per-group bound checks (audit).
    #[arg(long, env = "INFRAMARGIN_GROUPWISE")]
    groupwise: bool,
    /// Proxy source for datasets without outcome probabilities:
    /// self or full.
    #[arg(long, env = "INFRAMARGIN_PROXY")]
    proxy: Option<String>,
    /// Feature set to drop for ablate; repeat the flag for more subsets,
    /// comma-separating names inside one subset.
    #[arg(long)]
    drop: Vec<String>,
    /// Output directory.
    #[arg(long, env = "INFRAMARGIN_OUT")]
    out: Option<PathBuf>,
    /// Report formats to write: csv, json, or both.
    #[arg(long, env = "INFRAMARGIN_FORMAT")]
    format: Option<String>,
    /// Load defaults from a previously written run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Classifier to audit: bayes, fair, or accmax.
    #[arg(long, env = "INFRAMARGIN_CLASSIFIER")]
    classifier: Option<String>,
}

enum AppError {
    Config(String),
    Runtime(String),
}

impl AppError {
    fn config(msg: impl Into<String>) -> AppError {
        AppError::Config(msg.into())
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> AppError {
        match e {
            Error::Io(_) | Error::Divergence | Error::MetricUndefined => {
                AppError::Runtime(e.to_string())
            }
            _ => AppError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> AppError {
        AppError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Tradeoff(args) => cmd_tradeoff(args),
        Command::Ablate(args) => cmd_ablate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_run_config(path: &Option<PathBuf>) -> Result<Option<RunConfig>, AppError> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| AppError::config(format!("cannot read config {p:?}: {e}")))?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| AppError::config(format!("cannot parse config {p:?}: {e}")))?;
            Ok(Some(cfg))
        }
    }
}

/// Resolution of common flags over an optional loaded config.
struct Resolved {
    input: Option<PathBuf>,
    schema: String,
    preset: Option<PresetName>,
    n: usize,
    seed: u64,
    tau: f64,
    eta: Option<f64>,
    gammas: Vec<f64>,
    metric: UnfairnessMetric,
    grid: usize,
    groupwise: bool,
    proxy: Option<String>,
    drop: Vec<String>,
    out: PathBuf,
    format: String,
}

fn parse_gammas(text: &str) -> Result<Vec<f64>, AppError> {
    let parts: Vec<&str> = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(AppError::config("gamma list is empty"));
    }
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        out.push(
            p.parse::<f64>()
                .map_err(|_| AppError::config(format!("cannot parse gamma {p:?}")))?,
        );
    }
    Ok(out)
}

fn resolve(
    args: &CommonArgs,
    command: &str,
) -> Result<(Resolved, RunConfig, Option<RunConfig>), AppError> {
    let loaded = load_run_config(&args.config)?;
    let ld = loaded.as_ref();
    // The data source (input file or preset) resolves as one unit: an
    // explicit source flag replaces whatever source the config named.
    let (input, preset_name) = if args.input.is_some() || args.preset.is_some() {
        (args.input.clone(), args.preset.clone())
    } else {
        (
            ld.and_then(|c| c.input.clone()),
            ld.and_then(|c| c.preset.clone()),
        )
    };
    let schema = args
        .schema
        .clone()
        .or_else(|| ld.and_then(|c| c.schema.clone()))
        .unwrap_or_else(|| "canonical".to_string());
    let preset = preset_name
        .as_deref()
        .map(PresetName::from_str)
        .transpose()?;
    let n = args.n.or_else(|| ld.and_then(|c| c.n)).unwrap_or(10000);
    let seed = args.seed.or_else(|| ld.and_then(|c| c.seed)).unwrap_or(0);
    let tau = args.tau.or_else(|| ld.and_then(|c| c.tau)).unwrap_or(0.5);
    let eta = args.eta.or_else(|| ld.and_then(|c| c.eta));
    let gammas = match (&args.gammas, ld.and_then(|c| c.gammas.clone())) {
        (Some(text), _) => parse_gammas(text)?,
        (None, Some(v)) => v,
        (None, None) => vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
    };
    let metric_name = args
        .metric
        .clone()
        .or_else(|| ld.and_then(|c| c.metric.clone()))
        .unwrap_or_else(|| "di".to_string());
    let metric = UnfairnessMetric::from_str(&metric_name)?;
    let grid = args.grid.or_else(|| ld.and_then(|c| c.grid)).unwrap_or(201);
    let groupwise = args.groupwise || ld.and_then(|c| c.groupwise).unwrap_or(false);
    let proxy = args
        .proxy
        .clone()
        .or_else(|| ld.and_then(|c| c.proxy.clone()));
    if let Some(p) = &proxy {
        if p != "self" && p != "full" {
            return Err(AppError::config(format!(
                "unknown proxy {p:?}; expected self or full"
            )));
        }
    }
    let drop = if args.drop.is_empty() {
        ld.and_then(|c| c.drop.clone()).unwrap_or_default()
    } else {
        args.drop.clone()
    };
    let out = args
        .out
        .clone()
        .or_else(|| ld.map(|c| c.out.clone()))
        .ok_or_else(|| AppError::config("--out is required"))?;
    let format = args
        .format
        .clone()
        .or_else(|| ld.and_then(|c| c.format.clone()))
        .unwrap_or_else(|| "both".to_string());
    if !["csv", "json", "both"].contains(&format.as_str()) {
        return Err(AppError::config(format!(
            "unknown format {format:?}; expected csv, json, or both"
        )));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(AppError::config(format!("tau = {tau} outside [0, 1]")));
    }
    let resolved = Resolved {
        input: input.clone(),
        schema: schema.clone(),
        preset,
        n,
        seed,
        tau,
        eta,
        gammas: gammas.clone(),
        metric,
        grid,
        groupwise,
        proxy: proxy.clone(),
        drop: drop.clone(),
        out: out.clone(),
        format,
    };
    let run_config = RunConfig {
        command: command.to_string(),
        input,
        schema: Some(schema),
        preset: preset_name,
        n: Some(n),
        seed: Some(seed),
        tau: Some(tau),
        eta,
        gammas: Some(gammas),
        metric: Some(metric_name),
        grid: Some(grid),
        groupwise: Some(resolved.groupwise),
        proxy,
        classifier: None,
        drop: Some(drop),
        out,
        format: Some(resolved.format.clone()),
    };
    Ok((resolved, run_config, loaded))
}

fn ensure_out_dir(dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn builtin_schema(name: &str) -> Result<ColumnSchema, AppError> {
    match name {
        "adult" => Ok(ColumnSchema::adult_default()),
        "meps" => Ok(ColumnSchema::meps_default()),
        other => {
            let path = Path::new(other);
            if !path.exists() {
                return Err(AppError::config(format!(
                    "schema {other:?} is not builtin (adult, meps, canonical) and no such file exists"
                )));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::config(format!("cannot read schema {other:?}: {e}")))?;
            Ok(ColumnSchema::from_json(&text)?)
        }
    }
}

/// Load the dataset named by the resolved configuration.
fn load_dataset(r: &Resolved) -> Result<LabeledDataset, AppError> {
    match (&r.preset, &r.input) {
        (Some(name), _) => Ok(simgen::sample_dataset(&simgen::preset(*name), r.n, r.seed)?),
        (None, Some(path)) => {
            if !path.exists() {
                return Err(AppError::config(format!(
                    "input file {path:?} does not exist"
                )));
            }
            if r.schema == "canonical" {
                Ok(LabeledDataset::read_csv_path(path)?)
            } else {
                let schema = builtin_schema(&r.schema)?;
                let (ds, report) = load_csv(path, &schema)?;
                eprintln!(
                    "loaded {} rows ({} dropped for missing fields)",
                    report.rows_kept, report.rows_dropped_missing
                );
                Ok(ds)
            }
        }
        (None, None) => Err(AppError::config("either --preset or --input is required")),
    }
}

/// Benchmark labeling for infra-marginality: the true fair labels when
/// outcome probabilities are present, otherwise the proxy labeling from
/// a scorer trained on all features (requires --proxy).
fn benchmark_labeling(
    ds: &LabeledDataset,
    r: &Resolved,
    cfg: &TrainConfig,
) -> Result<FairLabeling, AppError> {
    if ds.is_probabilistic() {
        Ok(ds.fair_labels(r.tau)?)
    } else {
        if r.proxy.is_none() {
            return Err(AppError::config(
                "dataset has no outcome probabilities; pass --proxy {self,full} to benchmark \
                 against estimated probabilities from a trained scorer",
            ));
        }
        let scorer = model::train_logistic(ds, cfg.l2, cfg.max_iter, cfg.tol)?;
        Ok(model::proxy_labeling(&scorer, ds, r.tau)?)
    }
}

fn train_config(r: &Resolved) -> TrainConfig {
    TrainConfig {
        grid: r.grid,
        ..TrainConfig::default()
    }
}

fn cmd_simulate(args: CommonArgs) -> Result<(), AppError> {
    let (r, run_config, _) = resolve(&args, "simulate")?;
    let name = r
        .preset
        .ok_or_else(|| AppError::config("simulate requires --preset"))?;
    let spec = simgen::preset(name);
    let ds = simgen::sample_dataset(&spec, r.n, r.seed)?;
    ensure_out_dir(&r.out)?;
    let stem = name.to_string().to_lowercase();
    let csv_path = r.out.join(format!("{stem}.csv"));
    ds.write_csv_path(&csv_path, None)?;
    let meta = DatasetMeta::new(Some(name.to_string()), r.seed, r.n, spec);
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_text.push('\n');
    std::fs::write(r.out.join(format!("{stem}.meta.json")), meta_text)?;
    run_config.write(&r.out)?;
    println!("wrote {} instances to {}", ds.len(), csv_path.display());
    Ok(())
}

/// Substitute estimated probabilities for missing true ones (the audit
/// needs a probabilistic dataset for the bound checks).
fn proxy_substituted(
    ds: &LabeledDataset,
    r: &Resolved,
    cfg: &TrainConfig,
) -> Result<LabeledDataset, AppError> {
    if r.proxy.is_none() {
        return Err(AppError::config(
            "dataset has no outcome probabilities; the audit needs them for the expected-accuracy \
             bound. Pass --proxy {self,full} to use estimated probabilities as the proxy",
        ));
    }
    let scorer = model::train_logistic(ds, cfg.l2, cfg.max_iter, cfg.tol)?;
    let scores = model::predict_proba(&scorer, ds)?;
    let mut rows = ds.instances().to_vec();
    for (row, &s) in rows.iter_mut().zip(&scores) {
        row.p_star = Some(s);
    }
    Ok(LabeledDataset::build_with_columns(
        rows,
        ds.columns().to_vec(),
    )?)
}

fn cmd_audit(args: AuditArgs) -> Result<(), AppError> {
    let (r, mut run_config, loaded) = resolve(&args.common, "audit")?;
    let classifier_kind = args
        .classifier
        .clone()
        .or_else(|| loaded.and_then(|c| c.classifier))
        .unwrap_or_else(|| "bayes".to_string());
    run_config.classifier = Some(classifier_kind.clone());
    let cfg = train_config(&r);
    let loaded = load_dataset(&r)?;
    let ds = if loaded.is_probabilistic() {
        loaded
    } else {
        proxy_substituted(&loaded, &r, &cfg)?
    };
    let fl = ds.fair_labels(r.tau)?;
    let decisions = match classifier_kind.as_str() {
        "bayes" => DecisionVector::bayes(&ds)?,
        "fair" => DecisionVector::from_labels(&fl),
        "accmax" => {
            let scorer = model::train_logistic(&ds, cfg.l2, cfg.max_iter, cfg.tol)?;
            model::train_tradeoff(&ds, &scorer, r.metric, 0.0, r.grid)?.decisions(&ds)?
        }
        other => {
            return Err(AppError::config(format!(
                "unknown classifier {other:?}; expected bayes, fair, or accmax"
            )))
        }
    };
    let report = MetricsReport::compute(&ds, &decisions, &fl)?;
    let bound = theory::check_bound(&ds, &fl, &decisions)?;
    ensure_out_dir(&r.out)?;
    if r.format != "csv" {
        let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
        text.push('\n');
        std::fs::write(r.out.join("metrics.json"), text)?;
    }
    if r.format != "json" {
        std::fs::write(r.out.join("metrics.csv"), report.to_csv())?;
    }
    let mut bounds = serde_json::Map::new();
    bounds.insert(
        "overall".to_string(),
        serde_json::to_value(&bound).expect("bound serializes"),
    );
    if r.groupwise {
        let groups = theory::check_group_bounds(&ds, &fl, &decisions)?;
        bounds.insert(
            "groups".to_string(),
            serde_json::to_value(&groups).expect("bounds serialize"),
        );
    }
    let mut text =
        serde_json::to_string_pretty(&serde_json::Value::Object(bounds)).expect("serializes");
    text.push('\n');
    std::fs::write(r.out.join("bounds.json"), text)?;
    run_config.write(&r.out)?;
    println!(
        "classifier {}: error {:.6}, eta {:.6}, delta {:.6}",
        classifier_kind,
        report.error,
        report.eta,
        report.delta.unwrap_or(f64::NAN)
    );
    println!(
        "bound: {:.6} <= eta <= {:.6} -> {}",
        bound.lower,
        bound.upper,
        if bound.holds { "holds" } else { "VIOLATED" }
    );
    Ok(())
}

fn cmd_optimize(args: CommonArgs) -> Result<(), AppError> {
    let (r, run_config, _) = resolve(&args, "optimize")?;
    let eta = r
        .eta
        .ok_or_else(|| AppError::config("optimize requires --eta"))?;
    let ds = load_dataset(&r)?;
    if !ds.is_probabilistic() {
        return Err(AppError::config(
            "optimize requires outcome probabilities (p_star) in the dataset",
        ));
    }
    let fl = ds.fair_labels(r.tau)?;
    let sol = optimize::solve_dual(&ds, &fl, eta)?;
    ensure_out_dir(&r.out)?;
    let mut text = serde_json::to_string_pretty(&sol.summary()).expect("solution serializes");
    text.push('\n');
    std::fs::write(r.out.join("solution.json"), text)?;
    run_config.write(&r.out)?;
    println!(
        "lambda* = {:.6}, thresholds: decide 1 when p* >= {:.6} (above tau) / {:.6} (at or below tau)",
        sol.lambda_star, sol.low_threshold, sol.high_threshold
    );
    println!(
        "accuracy {:.6}, eta achieved {:.6} of budget {:.6}, binding: {}",
        sol.accuracy, sol.eta_achieved, sol.eta_budget, sol.binding
    );
    if !sol.flipped_boundary_points.is_empty() {
        println!(
            "boundary repair flipped instances {:?}",
            sol.flipped_boundary_points
        );
    }
    Ok(())
}

fn cmd_tradeoff(args: CommonArgs) -> Result<(), AppError> {
    let (r, run_config, _) = resolve(&args, "tradeoff")?;
    let cfg = train_config(&r);
    let ds = load_dataset(&r)?;
    let benchmark = benchmark_labeling(&ds, &r, &cfg)?;
    let curve = model::sweep_tradeoff(&ds, &benchmark, r.metric, &r.gammas, &cfg)?;
    ensure_out_dir(&r.out)?;
    std::fs::write(r.out.join("tradeoff.csv"), curve.to_csv())?;
    run_config.write(&r.out)?;
    println!(
        "swept {} gammas; unfairness {:.6} -> {:.6}",
        curve.points.len(),
        curve
            .points
            .first()
            .map(|p| p.unfairness)
            .unwrap_or(f64::NAN),
        curve
            .points
            .last()
            .map(|p| p.unfairness)
            .unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_ablate(args: CommonArgs) -> Result<(), AppError> {
    let (r, run_config, _) = resolve(&args, "ablate")?;
    let cfg = train_config(&r);
    let ds = load_dataset(&r)?;
    if !ds.has_sampled_labels() {
        return Err(AppError::config("ablate requires sampled labels (y_star)"));
    }
    let mut drop_sets: Vec<Vec<String>> = vec![Vec::new()];
    for spec in &r.drop {
        let names: Vec<String> = spec
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if names.is_empty() {
            return Err(AppError::config("empty --drop subset"));
        }
        drop_sets.push(names);
    }
    let rows = model::ablation_report(&ds, &drop_sets, r.tau, r.metric, &r.gammas, &cfg)?;
    ensure_out_dir(&r.out)?;
    let mut text = String::from(model::AblationRow::csv_header());
    text.push('\n');
    for row in &rows {
        text.push_str(&row.to_csv_row());
        text.push('\n');
    }
    std::fs::write(r.out.join("ablation.csv"), text)?;
    run_config.write(&r.out)?;
    println!("wrote {} ablation rows", rows.len());
    Ok(())
}
