//! Intrinsic-dimension estimators over k-nearest-neighbor distance tables.
//!
//! * [`mle_id`]: Levina–Bickel maximum likelihood. Local log-ratio means are pooled
//!   over all points before inversion,
//!   `d = n (k-1) / sum_i sum_{j<k} ln(T_k(x_i) / T_j(x_i))`,
//!   which is the harmonic mean of the per-point estimates and exactly scale invariant.
//! * [`mom_id`]: method of moments under `F(t) = (t/w)^d`, giving per-point
//!   `T_mean / (T_k - T_mean)`, pooled by arithmetic mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::EmbeddingSet;
use crate::geometry::{knn_dists, GeometryError, KnnTable};
use crate::numeric::pairwise_sum;

pub const DEFAULT_K: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdError {
    #[error("DegenerateNeighborhood: {0}")]
    DegenerateNeighborhood(String),
    #[error("TooFewNeighbors: estimator needs k >= 2, got {0}")]
    TooFewNeighbors(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl IdError {
    pub fn name(&self) -> &'static str {
        match self {
            IdError::DegenerateNeighborhood(_) => "DegenerateNeighborhood",
            IdError::TooFewNeighbors(_) => "TooFewNeighbors",
            IdError::Geometry(g) => g.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Mom,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Mle => "mle",
            Estimator::Mom => "mom",
        }
    }

    pub fn estimate(self, table: &KnnTable) -> Result<IdEstimate, IdError> {
        match self {
            Estimator::Mle => mle_id(table),
            Estimator::Mom => mom_id(table),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub k: usize,
    pub n: usize,
}

fn check_table(table: &KnnTable) -> Result<(), IdError> {
    if table.k() < 2 {
        return Err(IdError::TooFewNeighbors(table.k()));
    }
    if let Some(i) = (0..table.n()).find(|&i| table.row(i)[0] <= 0.0) {
        return Err(IdError::DegenerateNeighborhood(format!(
            "point {i} has a zero neighbor distance (duplicate points)"
        )));
    }
    Ok(())
}

pub fn mle_id(table: &KnnTable) -> Result<IdEstimate, IdError> {
    check_table(table)?;
    let k = table.k();
    let per_point: Vec<f64> = (0..table.n())
        .into_par_iter()
        .map(|i| {
            let row = table.row(i);
            let log_tk = row[k - 1].ln();
            let terms: Vec<f64> = row[..k - 1].iter().map(|t| log_tk - t.ln()).collect();
            pairwise_sum(&terms)
        })
        .collect();
    let total = pairwise_sum(&per_point);
    if total <= 0.0 {
        return Err(IdError::DegenerateNeighborhood(
            "all neighbor distances are equal; log-ratio sum is zero".into(),
        ));
    }
    let value = (table.n() * (k - 1)) as f64 / total;
    Ok(IdEstimate {
        value,
        estimator: Estimator::Mle,
        k,
        n: table.n(),
    })
}

pub fn mom_id(table: &KnnTable) -> Result<IdEstimate, IdError> {
    check_table(table)?;
    let k = table.k();
    let per_point: Vec<Result<f64, IdError>> = (0..table.n())
        .into_par_iter()
        .map(|i| {
            let row = table.row(i);
            let tk = row[k - 1];
            let mean = pairwise_sum(row) / k as f64;
            let gap = tk - mean;
            if row[0] == tk || gap <= 0.0 {
                return Err(IdError::DegenerateNeighborhood(format!(
                    "point {i}: all {k} neighbor distances are equal"
                )));
            }
            Ok(mean / gap)
        })
        .collect();
    let per_point = per_point.into_iter().collect::<Result<Vec<_>, _>>()?;
    let value = pairwise_sum(&per_point) / per_point.len() as f64;
    Ok(IdEstimate {
        value,
        estimator: Estimator::Mom,
        k,
        n: table.n(),
    })
}

/// Builds the kNN table and applies `estimator`.
pub fn estimate_id(x: &EmbeddingSet, k: usize, estimator: Estimator) -> Result<IdEstimate, IdError> {
    let table = knn_dists(x, k)?;
    estimator.estimate(&table)
}

/// Estimates for several neighbor counts from a single neighbor search.
pub fn id_k_sweep(x: &EmbeddingSet, ks: &[usize], estimator: Estimator) -> Result<Vec<IdEstimate>, IdError> {
    let Some(&k_max) = ks.iter().max() else {
        return Ok(Vec::new());
    };
    let full = knn_dists(x, k_max)?;
    ks.iter().map(|&k| estimator.estimate(&full.truncate(k)?)).collect()
}
