//! `embedgeo` command-line front end.
//!
//! Every subcommand writes a [`ReportDocument`] (to `--out` or stdout) that records the
//! full parameter set actually used. Exit status: 0 on success, 2 on usage errors,
//! 1 on data or computation errors (with the module error name on stderr).

mod splice;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bound::{evaluate_bound, final_layer_bound, BoundError, BoundInputs};
use crate::dataio::{self, DataError, Dtype, EmbeddingFormat, EmbeddingSet, ReportDocument};
use crate::experiments::{
    correlate, run_dimension_sweep, run_scaling_experiment, CorrelationMethod, ExperimentError, ManifoldKind,
    ManifoldSpec, StatsError, DEFAULT_N_GRID, DEFAULT_TRIALS,
};
use crate::geometry::{l1_diameter, DiameterMode, GeometryError, Metric};
use crate::intrinsic_dim::{estimate_id, id_k_sweep, Estimator, IdError, DEFAULT_K};
use crate::lipschitz::{lipschitz_profile, LipschitzError, PowerIteration};
use crate::transport::{exact_w1, sinkhorn_w1, SinkhornConfig, TransportError, EXACT_MAX_N};

pub use splice::{FieldRef, SpliceTarget};

pub const THREADS_ENV: &str = "EMBEDGEO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "embedgeo",
    version,
    about = "Embedding geometry and generalization-bound diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate intrinsic dimension from k-nearest-neighbor distances.
    Id(IdArgs),
    /// Entropic 1-Wasserstein distance between two embedding sets.
    W1(W1Args),
    /// Spectral norms and suffix Lipschitz products of WTS1 weight stacks.
    Lipschitz(LipschitzArgs),
    /// Evaluate the layer-wise generalization bound from a JSON configuration.
    Bound(BoundArgs),
    /// W1 between independent samples across sample sizes, with a log-log fit.
    Scaling(ScalingArgs),
    /// W1 at fixed sample size across intrinsic dimensions.
    Dimsweep(DimsweepArgs),
    /// Pearson or Spearman correlation between two columns.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Emb1,
    Csv,
}

impl InputFormat {
    fn resolve(self, path: &Path) -> EmbeddingFormat {
        match self {
            InputFormat::Auto => EmbeddingFormat::from_path(path),
            InputFormat::Emb1 => EmbeddingFormat::Emb1(Dtype::F64),
            InputFormat::Csv => EmbeddingFormat::Csv,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            InputFormat::Auto => "auto",
            InputFormat::Emb1 => "emb1",
            InputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Mle,
    Mom,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Mle => Estimator::Mle,
            EstimatorArg::Mom => Estimator::Mom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    L1,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::L1 => Metric::L1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiameterArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    UniformCube,
    Gaussian,
}

impl From<KindArg> for ManifoldKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::UniformCube => ManifoldKind::UniformCube,
            KindArg::Gaussian => ManifoldKind::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pearson,
    Spearman,
}

impl From<MethodArg> for CorrelationMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pearson => CorrelationMethod::Pearson,
            MethodArg::Spearman => CorrelationMethod::Spearman,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report destination (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Entropic regularization strength.
    #[arg(long, default_value_t = 1e-2, value_parser = positive_f64)]
    pub epsilon: f64,
    /// Maximum number of Sinkhorn sweeps.
    #[arg(long, default_value_t = 200, value_parser = positive_usize)]
    pub max_iter: usize,
    /// Stop when the max-norm change of the log scalings falls below this.
    #[arg(long, default_value_t = 1e-6, value_parser = positive_f64)]
    pub tol: f64,
    /// Ground cost.
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
}

impl SolverArgs {
    fn config(&self) -> SinkhornConfig {
        SinkhornConfig {
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            tol: self.tol,
            metric: self.metric.into(),
        }
    }

    fn record(&self, params: &mut BTreeMap<String, Value>) {
        let c = self.config();
        params.insert("epsilon".into(), json!(c.epsilon));
        params.insert("max_iter".into(), json!(c.max_iter));
        params.insert("tol".into(), json!(c.tol));
        params.insert("metric".into(), json!(c.metric.as_str()));
    }
}

#[derive(Debug, Args)]
pub struct IdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Number of nearest neighbors.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Mle)]
    pub estimator: EstimatorArg,
    /// Additional neighbor counts to report, e.g. `5,10,50`.
    #[arg(long, value_delimiter = ',', value_parser = positive_usize)]
    pub k_sweep: Vec<usize>,
    /// Also report the ℓ1 diameter of the set.
    #[arg(long, value_enum)]
    pub l1_diameter: Option<DiameterArg>,
    /// Random pairs for `--l1-diameter sampled`.
    #[arg(long, default_value_t = 100_000, value_parser = positive_usize)]
    pub diameter_pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct W1Args {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also solve the exact assignment problem (equal sizes up to 512 points).
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LipschitzArgs {
    /// One or more WTS1 files, e.g. one per training epoch.
    #[arg(long, num_args = 1.., required = true)]
    pub weights: Vec<PathBuf>,
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// JSON file with the bound inputs.
    #[arg(long)]
    pub config: PathBuf,
    /// Take `d` of layer K from a report field: `[K=]report.json#results.value`.
    #[arg(long = "d-from", value_parser = parse_field_ref)]
    pub d_from: Vec<FieldRef>,
    /// Take `Ddiam` of layer K from a report field.
    #[arg(long = "diam-from", value_parser = parse_field_ref)]
    pub diam_from: Vec<FieldRef>,
    /// Take `L_F` of layer K from a report field.
    #[arg(long = "lf-from", value_parser = parse_field_ref)]
    pub lf_from: Vec<FieldRef>,
    /// Override the confidence parameter from the config.
    #[arg(long, value_parser = open_unit_f64)]
    pub delta: Option<f64>,
    /// Override the exponent slack from the config.
    #[arg(long, value_parser = positive_f64)]
    pub eps_slack: Option<f64>,
    /// Also report the final-layer bound with the tail Lipschitz constant fixed to 1.
    #[arg(long)]
    pub final_layer: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    #[arg(long, value_enum, default_value_t = KindArg::UniformCube)]
    pub kind: KindArg,
    /// Standard deviation of isotropic ambient noise.
    #[arg(long, default_value_t = 0.0, value_parser = nonnegative_f64)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Intrinsic dimension.
    #[arg(long, default_value_t = 2, value_parser = positive_usize)]
    pub d: usize,
    /// Ambient dimension.
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    pub ambient: usize,
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long, value_delimiter = ',', value_parser = positive_usize, default_values_t = DEFAULT_N_GRID.to_vec())]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = positive_usize)]
    pub trials: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write `n,mean_w1,std_w1` here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DimsweepArgs {
    #[arg(long, value_delimiter = ',', value_parser = positive_usize, default_values_t = vec![2, 4, 8, 16])]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 32, value_parser = positive_usize)]
    pub ambient: usize,
    #[arg(long, default_value_t = 500, value_parser = positive_usize)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS, value_parser = positive_usize)]
    pub trials: usize,
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write `d,mean_w1,std_w1` here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Two-column CSV (header optional).
    #[arg(long, conflicts_with_all = ["xs", "ys"])]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "ys")]
    pub xs: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "xs")]
    pub ys: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Pearson)]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn nonnegative_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be nonnegative and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn open_unit_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        Ok(v) => Err(format!("must lie strictly between 0 and 1, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_field_ref(s: &str) -> Result<FieldRef, String> {
    s.parse()
}

/// Errors surfaced by the CLI. Usage errors exit with 2, everything else with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("Io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("BadConfig: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Id(#[from] IdError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Lipschitz(#[from] LipschitzError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io { .. } => "Io",
            CliError::Config(_) => "BadConfig",
            CliError::Data(e) => e.name(),
            CliError::Geometry(e) => e.name(),
            CliError::Id(e) => e.name(),
            CliError::Transport(e) => e.name(),
            CliError::Lipschitz(e) => e.name(),
            CliError::Bound(e) => e.name(),
            CliError::Experiment(e) => e.name(),
            CliError::Stats(e) => e.name(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_embeddings(path: &Path, format: InputFormat) -> Result<EmbeddingSet, CliError> {
    let bytes = read_file(path)?;
    let set = dataio::decode_embeddings(&bytes, format.resolve(path))?;
    Ok(set.with_label(path.display().to_string()))
}

fn path_value(p: &Path) -> Value {
    json!(p.display().to_string())
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("embedgeo: error: {e}");
        return e.exit_code();
    }
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("embedgeo: error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got {raw:?}")))?;
    if threads > 0 {
        // a pool may already exist when embedded in a test harness; keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Runs a parsed subcommand and writes its report.
pub fn execute(command: &Command) -> Result<(), CliError> {
    let (doc, out) = match command {
        Command::Id(a) => (cmd_id(a)?, &a.output),
        Command::W1(a) => (cmd_w1(a)?, &a.output),
        Command::Lipschitz(a) => (cmd_lipschitz(a)?, &a.output),
        Command::Bound(a) => (cmd_bound(a)?, &a.output),
        Command::Scaling(a) => (cmd_scaling(a)?, &a.output),
        Command::Dimsweep(a) => (cmd_dimsweep(a)?, &a.output),
        Command::Correlate(a) => (cmd_correlate(a)?, &a.output),
    };
    let text = doc.to_json();
    match &out.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_id(a: &IdArgs) -> Result<ReportDocument, CliError> {
    let set = load_embeddings(&a.input, a.format)?;
    let estimator: Estimator = a.estimator.into();
    let est = estimate_id(&set, a.k, estimator)?;

    let mut params = BTreeMap::new();
    params.insert("input".into(), path_value(&a.input));
    params.insert("format".into(), json!(a.format.as_str()));
    params.insert("k".into(), json!(a.k));
    params.insert("estimator".into(), json!(estimator.as_str()));

    let mut results = json!({
        "estimator": estimator.as_str(),
        "k": est.k,
        "n": est.n,
        "D": set.dim(),
        "value": est.value,
    });
    if !a.k_sweep.is_empty() {
        params.insert("k_sweep".into(), json!(a.k_sweep));
        let sweep = id_k_sweep(&set, &a.k_sweep, estimator)?;
        let rows: Vec<Value> = sweep.iter().map(|e| json!({"k": e.k, "value": e.value})).collect();
        results["k_sweep"] = Value::Array(rows);
    }
    let mut seed = None;
    if let Some(mode) = a.l1_diameter {
        let (mode, label) = match mode {
            DiameterArg::Exact => (DiameterMode::Exact, "exact"),
            DiameterArg::Sampled => {
                params.insert("diameter_pairs".into(), json!(a.diameter_pairs));
                seed = Some(a.seed);
                (
                    DiameterMode::Sampled {
                        pairs: a.diameter_pairs,
                        seed: a.seed,
                    },
                    "sampled",
                )
            }
        };
        params.insert("l1_diameter".into(), json!(label));
        results["l1_diameter"] = json!(l1_diameter(&set, mode));
    }
    let doc = ReportDocument::new("id", params, results);
    Ok(match seed {
        Some(s) => doc.with_seed(s),
        None => doc,
    })
}

fn cmd_w1(a: &W1Args) -> Result<ReportDocument, CliError> {
    let x = load_embeddings(&a.a, a.format)?;
    let y = load_embeddings(&a.b, a.format)?;
    if a.exact && (x.n() != y.n() || x.n() > EXACT_MAX_N) {
        return Err(TransportError::SizeMismatch {
            left: x.n(),
            right: y.n(),
        }
        .into());
    }
    let cfg = a.solver.config();
    let res = sinkhorn_w1(&x, &y, &cfg)?;

    let mut params = BTreeMap::new();
    params.insert("a".into(), path_value(&a.a));
    params.insert("b".into(), path_value(&a.b));
    params.insert("format".into(), json!(a.format.as_str()));
    params.insert("exact".into(), json!(a.exact));
    a.solver.record(&mut params);

    let mut results = json!({
        "cost": res.cost,
        "iterations": res.iterations,
        "converged": res.converged,
        "marginal_violation": res.marginal_violation,
        "n_a": x.n(),
        "n_b": y.n(),
        "D": x.dim(),
    });
    if a.exact {
        results["exact_cost"] = json!(exact_w1(&x, &y, cfg.metric)?);
    }
    Ok(ReportDocument::new("w1", params, results))
}

fn cmd_lipschitz(a: &LipschitzArgs) -> Result<ReportDocument, CliError> {
    let cfg = PowerIteration {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let mut profiles = Vec::with_capacity(a.weights.len());
    for path in &a.weights {
        let stack = dataio::decode_weight_stack(&read_file(path)?)?;
        let profile = lipschitz_profile(&stack, &cfg);
        let shapes: Vec<[usize; 2]> = stack.layers().iter().map(|w| [w.rows(), w.cols()]).collect();
        profiles.push(json!({
            "path": path.display().to_string(),
            "layers": stack.len(),
            "shapes": shapes,
            "sigma": profile.sigma,
            "suffix": profile.suffix,
        }));
    }
    let mut params = BTreeMap::new();
    params.insert(
        "weights".into(),
        Value::Array(a.weights.iter().map(|p| path_value(p)).collect()),
    );
    params.insert("tol".into(), json!(a.tol));
    params.insert("max_iter".into(), json!(a.max_iter));
    Ok(ReportDocument::new(
        "lipschitz",
        params,
        json!({ "profiles": profiles }),
    ))
}

fn cmd_bound(a: &BoundArgs) -> Result<ReportDocument, CliError> {
    let text = read_file(&a.config)?;
    let mut inputs: BoundInputs =
        serde_json::from_slice(&text).map_err(|e| CliError::Config(format!("{}: {e}", a.config.display())))?;
    if let Some(delta) = a.delta {
        inputs.delta = delta;
    }
    if let Some(eps) = a.eps_slack {
        inputs.eps = eps;
    }
    for layer in inputs.layers.iter_mut() {
        for key in ["d", "C", "Ddiam", "L_F", "L_Fstar", "bayes_gap"] {
            layer
                .provenance
                .entry(key.to_string())
                .or_insert_with(|| "user".to_string());
        }
    }
    let splices = [
        (SpliceTarget::Dimension, &a.d_from),
        (SpliceTarget::Diameter, &a.diam_from),
        (SpliceTarget::TailLipschitz, &a.lf_from),
    ];
    let mut applied = Vec::new();
    for (target, refs) in splices {
        for r in refs {
            splice::apply(&mut inputs, target, r)?;
            applied.push(json!(format!("{}:{}", target.key(), r)));
        }
    }

    let report = evaluate_bound(&inputs)?;
    let mut results = serde_json::to_value(&report).expect("bound report serializes");
    results["provenance"] = Value::Array(
        inputs
            .layers
            .iter()
            .map(|l| serde_json::to_value(&l.provenance).expect("map serializes"))
            .collect(),
    );
    if a.final_layer {
        results["final_layer"] = serde_json::to_value(final_layer_bound(&inputs)?).expect("serializes");
    }

    let mut params = BTreeMap::new();
    params.insert("config".into(), path_value(&a.config));
    params.insert("splices".into(), Value::Array(applied));
    params.insert("final_layer".into(), json!(a.final_layer));
    params.insert("depth".into(), json!(inputs.depth()));
    params.insert(
        "inputs".into(),
        serde_json::to_value(&inputs).expect("inputs serialize"),
    );
    Ok(ReportDocument::new("bound", params, results))
}

fn manifold_params(params: &mut BTreeMap<String, Value>, m: &ManifoldArgs, ambient: usize) {
    let kind = match m.kind {
        KindArg::UniformCube => "uniform_cube",
        KindArg::Gaussian => "gaussian",
    };
    params.insert("kind".into(), json!(kind));
    params.insert("noise".into(), json!(m.noise));
    params.insert("ambient".into(), json!(ambient));
}

fn cmd_scaling(a: &ScalingArgs) -> Result<ReportDocument, CliError> {
    let spec = ManifoldSpec {
        intrinsic_d: a.d,
        ambient_d: a.ambient,
        kind: a.manifold.kind.into(),
        noise_sigma: a.manifold.noise,
        seed: a.manifold.seed,
    };
    spec.validate()?;
    let cfg = a.solver.config();
    let result = run_scaling_experiment(&spec, &a.n_grid, a.trials, &cfg)?;
    if let Some(path) = &a.csv {
        write_file(path, result.to_csv().as_bytes())?;
    }

    let mut params = BTreeMap::new();
    params.insert("d".into(), json!(a.d));
    manifold_params(&mut params, &a.manifold, a.ambient);
    params.insert("n_grid".into(), json!(a.n_grid));
    params.insert("trials".into(), json!(a.trials));
    a.solver.record(&mut params);
    if let Some(p) = &a.csv {
        params.insert("csv".into(), path_value(p));
    }
    let results = json!({ "rows": result.rows, "fit": result.fit });
    Ok(ReportDocument::new("scaling", params, results).with_seed(a.manifold.seed))
}

fn cmd_dimsweep(a: &DimsweepArgs) -> Result<ReportDocument, CliError> {
    let specs: Vec<ManifoldSpec> = a
        .dims
        .iter()
        .map(|&d| ManifoldSpec {
            intrinsic_d: d,
            ambient_d: a.ambient,
            kind: a.manifold.kind.into(),
            noise_sigma: a.manifold.noise,
            seed: a.manifold.seed,
        })
        .collect();
    for s in &specs {
        s.validate()?;
    }
    let cfg = a.solver.config();
    let result = run_dimension_sweep(&specs, a.n, a.trials, &cfg)?;
    if let Some(path) = &a.csv {
        write_file(path, result.to_csv().as_bytes())?;
    }

    let mut params = BTreeMap::new();
    params.insert("dims".into(), json!(a.dims));
    manifold_params(&mut params, &a.manifold, a.ambient);
    params.insert("n".into(), json!(a.n));
    params.insert("trials".into(), json!(a.trials));
    a.solver.record(&mut params);
    if let Some(p) = &a.csv {
        params.insert("csv".into(), path_value(p));
    }
    let results = json!({
        "rows": result.rows,
        "correlation": result.correlation,
        "strictly_increasing": result.strictly_increasing(),
    });
    Ok(ReportDocument::new("dimsweep", params, results).with_seed(a.manifold.seed))
}

fn cmd_correlate(a: &CorrelateArgs) -> Result<ReportDocument, CliError> {
    let mut params = BTreeMap::new();
    let (xs, ys) = match &a.input {
        Some(path) => {
            let set = dataio::decode_embeddings(&read_file(path)?, EmbeddingFormat::Csv)?;
            if set.dim() != 2 {
                return Err(CliError::Usage(format!(
                    "--input must have exactly two columns, found {}",
                    set.dim()
                )));
            }
            params.insert("input".into(), path_value(path));
            (
                set.rows().map(|r| r[0]).collect::<Vec<_>>(),
                set.rows().map(|r| r[1]).collect::<Vec<_>>(),
            )
        }
        None if !a.xs.is_empty() => {
            params.insert("xs".into(), json!(a.xs));
            params.insert("ys".into(), json!(a.ys));
            (a.xs.clone(), a.ys.clone())
        }
        None => return Err(CliError::Usage("provide --input or both --xs and --ys".into())),
    };
    let method: CorrelationMethod = a.method.into();
    let c = correlate(&xs, &ys, method)?;
    params.insert("method".into(), json!(method));
    let mut results = serde_json::to_value(c).expect("serializes");
    if method == CorrelationMethod::Spearman {
        results["p_value_approximate"] = json!(true);
    }
    Ok(ReportDocument::new("correlate", params, results))
}
