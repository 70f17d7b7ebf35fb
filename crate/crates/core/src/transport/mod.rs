//! Empirical 1-Wasserstein distances between uniformly weighted point clouds.
//!
//! [`sinkhorn_w1`] is the production path: entropically regularized transport solved
//! with log-domain Sinkhorn scaling, followed by rounding onto the coupling polytope so
//! the returned cost is an expectation under a feasible coupling. [`exact_w1_uniform`]
//! solves the equal-size assignment problem exactly and serves as the oracle.

mod assignment;
mod sinkhorn;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{EmbeddingSet, Matrix};
use crate::geometry::{pairwise_dist, GeometryError, Metric};

pub use assignment::{solve_assignment, Assignment};
pub use sinkhorn::{sinkhorn_plan, sinkhorn_uniform};

/// Largest instance accepted by the exact oracle.
pub const EXACT_MAX_N: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("DimMismatch: {left} vs {right} dimensions")]
    DimMismatch { left: usize, right: usize },
    #[error("EmptySet: transport needs at least one point on each side")]
    EmptySet,
    #[error("SizeMismatch: exact solver needs equal sizes, got {left} and {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("TooLarge: exact solver is limited to n <= {EXACT_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

impl TransportError {
    pub fn name(&self) -> &'static str {
        match self {
            TransportError::DimMismatch { .. } => "DimMismatch",
            TransportError::EmptySet => "EmptySet",
            TransportError::SizeMismatch { .. } => "SizeMismatch",
            TransportError::TooLarge(_) => "TooLarge",
            TransportError::InvalidParameter(_) => "InvalidParameter",
        }
    }
}

impl From<GeometryError> for TransportError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::DimMismatch { left, right } => TransportError::DimMismatch { left, right },
            other => TransportError::InvalidParameter(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub metric: Metric,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            max_iter: 200,
            tol: 1e-6,
            metric: Metric::Euclidean,
        }
    }
}

impl SinkhornConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(TransportError::InvalidParameter(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(TransportError::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(TransportError::InvalidParameter(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    /// Expected ground cost under the rounded (exactly feasible) coupling.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max absolute row/column marginal error of the plan before rounding.
    pub marginal_violation: f64,
}

pub fn sinkhorn_w1(
    x: &EmbeddingSet,
    y: &EmbeddingSet,
    config: &SinkhornConfig,
) -> Result<TransportResult, TransportError> {
    config.validate()?;
    let cost = pairwise_dist(x, y, config.metric)?;
    sinkhorn_uniform(&cost, config)
}

/// Exact W1 between equal-size uniform empirical measures with Euclidean ground cost.
pub fn exact_w1_uniform(x: &EmbeddingSet, y: &EmbeddingSet) -> Result<f64, TransportError> {
    exact_w1(x, y, Metric::Euclidean)
}

pub fn exact_w1(x: &EmbeddingSet, y: &EmbeddingSet, metric: Metric) -> Result<f64, TransportError> {
    if x.n() != y.n() {
        return Err(TransportError::SizeMismatch {
            left: x.n(),
            right: y.n(),
        });
    }
    if x.n() > EXACT_MAX_N {
        return Err(TransportError::TooLarge(x.n()));
    }
    let cost = pairwise_dist(x, y, metric)?;
    Ok(exact_w1_cost(&cost))
}

/// Mean matched cost of the optimal permutation for a square cost matrix.
pub(crate) fn exact_w1_cost(cost: &Matrix) -> f64 {
    let a = solve_assignment(cost);
    a.total_cost / cost.rows() as f64
}
