//! Synthetic experiments on distributions with known intrinsic dimension:
//! W1-vs-n scaling with a log-log power-law fit, W1-vs-d sweeps, and correlation
//! statistics.
//!
//! Every trial draws from its own seed, `derive_seed(spec.seed, [d, n, trial, side])`,
//! so results are identical regardless of how trials are scheduled across threads.

mod manifold;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{derive_seed, mean, std_dev};
use crate::transport::{sinkhorn_w1, SinkhornConfig, TransportError};

pub use manifold::{sample_manifold, Manifold, ManifoldKind, ManifoldSpec};
pub use stats::{correlate, ols, Correlation, CorrelationMethod, LinearFit, StatsError};

pub const DEFAULT_N_GRID: [usize; 5] = [100, 200, 400, 800, 1500];
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("BadSpec: {0}")]
    BadSpec(String),
    #[error("BadSweep: {0}")]
    BadSweep(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl ExperimentError {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentError::BadSpec(_) => "BadSpec",
            ExperimentError::BadSweep(_) => "BadSweep",
            ExperimentError::InvalidConfig(_) => "InvalidConfig",
            ExperimentError::Transport(e) => e.name(),
            ExperimentError::Stats(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub trials: usize,
    pub mean_w1: f64,
    pub std_w1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub spec: ManifoldSpec,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub solver: SinkhornConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    /// OLS of `ln mean_w1` on `ln n`.
    pub fit: LinearFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ScalingConfig>,
}

impl ScalingResult {
    /// Fits the power law to already-aggregated rows (sorted by `n` on return).
    pub fn from_rows(mut rows: Vec<ScalingRow>) -> Result<Self, ExperimentError> {
        rows.sort_by_key(|r| r.n);
        if rows.iter().any(|r| r.mean_w1 <= 0.0 || !r.mean_w1.is_finite()) {
            return Err(ExperimentError::InvalidConfig(
                "power-law fit needs strictly positive mean W1 values".into(),
            ));
        }
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_w1.ln()).collect();
        let fit = ols(&xs, &ys)?;
        Ok(Self {
            rows,
            fit,
            config: None,
        })
    }

    /// Plot-ready CSV: `n,mean_w1,std_w1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,mean_w1,std_w1\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.n, r.mean_w1, r.std_w1));
        }
        s
    }
}

fn trial_seed(spec: &ManifoldSpec, n: usize, trial: usize, side: u64) -> u64 {
    derive_seed(spec.seed, &[spec.intrinsic_d as u64, n as u64, trial as u64, side])
}

/// W1 between two independent `n`-point samples from `manifold`, one per trial.
fn measure_trials(
    manifold: &Manifold,
    n: usize,
    trials: usize,
    solver: &SinkhornConfig,
) -> Result<Vec<f64>, ExperimentError> {
    let spec = *manifold.spec();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = manifold.sample_seeded(n, trial_seed(&spec, n, t, 0))?;
            let b = manifold.sample_seeded(n, trial_seed(&spec, n, t, 1))?;
            Ok(sinkhorn_w1(&a, &b, solver)?.cost)
        })
        .collect::<Vec<Result<f64, ExperimentError>>>()
        .into_iter()
        .collect()
}

fn aggregate(n: usize, values: &[f64]) -> ScalingRow {
    ScalingRow {
        n,
        trials: values.len(),
        mean_w1: mean(values),
        std_w1: std_dev(values),
    }
}

/// Runs `measure(n, trial)` over the grid and fits the power law. The measurement is
/// injectable so the aggregation and fit can be exercised without a solver.
pub fn run_scaling_with<F>(n_grid: &[usize], trials: usize, measure: F) -> Result<ScalingResult, ExperimentError>
where
    F: Fn(usize, usize) -> Result<f64, ExperimentError> + Sync,
{
    validate_grid(n_grid, trials)?;
    let rows = n_grid
        .iter()
        .map(|&n| {
            let values = (0..trials)
                .into_par_iter()
                .map(|t| measure(n, t))
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(aggregate(n, &values))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    ScalingResult::from_rows(rows)
}

fn validate_grid(n_grid: &[usize], trials: usize) -> Result<(), ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::InvalidConfig("trials must be at least 1".into()));
    }
    if n_grid.len() < 2 {
        return Err(ExperimentError::InvalidConfig(
            "the n grid needs at least two sample sizes".into(),
        ));
    }
    if let Some(n) = n_grid.iter().find(|&&n| n < 2) {
        return Err(ExperimentError::InvalidConfig(format!("sample size {n} is below 2")));
    }
    let mut sorted = n_grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n_grid.len() {
        return Err(ExperimentError::InvalidConfig(
            "the n grid has duplicate entries".into(),
        ));
    }
    Ok(())
}

pub fn run_scaling_experiment(
    spec: &ManifoldSpec,
    n_grid: &[usize],
    trials: usize,
    solver: &SinkhornConfig,
) -> Result<ScalingResult, ExperimentError> {
    solver.validate()?;
    validate_grid(n_grid, trials)?;
    let manifold = Manifold::new(*spec)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        rows.push(aggregate(n, &measure_trials(&manifold, n, trials, solver)?));
    }
    let mut result = ScalingResult::from_rows(rows)?;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    result.config = Some(ScalingConfig {
        spec: *spec,
        n_grid: grid,
        trials,
        solver: *solver,
    });
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub trials: usize,
    pub mean_w1: f64,
    pub std_w1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimSweepResult {
    pub n: usize,
    pub rows: Vec<SweepRow>,
    /// Pearson correlation between `d` and `ln mean_w1`; absent with fewer than 3 specs.
    pub correlation: Option<Correlation>,
}

impl DimSweepResult {
    /// Plot-ready CSV: `d,mean_w1,std_w1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,mean_w1,std_w1\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.d, r.mean_w1, r.std_w1));
        }
        s
    }

    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].mean_w1 > w[0].mean_w1)
    }
}

pub fn run_dimension_sweep(
    specs: &[ManifoldSpec],
    n: usize,
    trials: usize,
    solver: &SinkhornConfig,
) -> Result<DimSweepResult, ExperimentError> {
    solver.validate()?;
    if specs.is_empty() {
        return Err(ExperimentError::BadSweep("no specs given".into()));
    }
    if let Some(w) = specs.windows(2).find(|w| w[1].intrinsic_d <= w[0].intrinsic_d) {
        return Err(ExperimentError::BadSweep(format!(
            "intrinsic dimensions must be strictly increasing, got {} then {}",
            w[0].intrinsic_d, w[1].intrinsic_d
        )));
    }
    if trials == 0 {
        return Err(ExperimentError::InvalidConfig("trials must be at least 1".into()));
    }
    if n < 2 {
        return Err(ExperimentError::InvalidConfig(format!("sample size {n} is below 2")));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let manifold = Manifold::new(*spec)?;
        let values = measure_trials(&manifold, n, trials, solver)?;
        let agg = aggregate(n, &values);
        rows.push(SweepRow {
            d: spec.intrinsic_d,
            trials,
            mean_w1: agg.mean_w1,
            std_w1: agg.std_w1,
        });
    }
    let correlation = if rows.len() >= 3 && rows.iter().all(|r| r.mean_w1 > 0.0) {
        let ds: Vec<f64> = rows.iter().map(|r| r.d as f64).collect();
        let logs: Vec<f64> = rows.iter().map(|r| r.mean_w1.ln()).collect();
        Some(correlate(&ds, &logs, CorrelationMethod::Pearson)?)
    } else {
        None
    };
    Ok(DimSweepResult { n, rows, correlation })
}
