//! Distance primitives: pairwise distance matrices, exact k-nearest-neighbor
//! distance tables and ℓ1 support diameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{EmbeddingSet, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("DimMismatch: {left} vs {right} dimensions")]
    DimMismatch { left: usize, right: usize },
    #[error("KTooLarge: k = {k} requires at least {} points, found {n}", k + 1)]
    KTooLarge { k: usize, n: usize },
    #[error("InvalidK: k must be at least 1")]
    InvalidK,
    #[error("InvalidTable: {0}")]
    InvalidTable(String),
}

impl GeometryError {
    pub fn name(&self) -> &'static str {
        match self {
            GeometryError::DimMismatch { .. } => "DimMismatch",
            GeometryError::KTooLarge { .. } => "KTooLarge",
            GeometryError::InvalidK => "InvalidK",
            GeometryError::InvalidTable(_) => "InvalidTable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    L1,
}

impl Metric {
    #[inline]
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => euclidean(a, b),
            Metric::L1 => l1(a, b),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::L1 => "l1",
        }
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[inline]
pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `n x m` matrix of distances between rows of `x` and rows of `y`.
pub fn pairwise_dist(x: &EmbeddingSet, y: &EmbeddingSet, metric: Metric) -> Result<Matrix, GeometryError> {
    if x.dim() != y.dim() {
        return Err(GeometryError::DimMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let m = y.n();
    let mut out = Matrix::zeros(x.n(), m);
    out.as_mut_slice().par_chunks_mut(m).enumerate().for_each(|(i, row)| {
        let xi = x.row(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = metric.distance(xi, y.row(j));
        }
    });
    Ok(out)
}

/// Sorted distances from each point to its `k` nearest other points.
///
/// Row `i` holds `T_1(x_i) <= ... <= T_k(x_i)`. The point itself is excluded by
/// index, so duplicates show up as zero distances.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnTable {
    dists: Matrix,
    indices: Vec<usize>,
}

impl KnnTable {
    /// Builds a table from precomputed rows (neighbor indices unknown, recorded as `usize::MAX`).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, GeometryError> {
        let k = rows.first().map_or(0, |r| r.as_ref().len());
        if k == 0 {
            return Err(GeometryError::InvalidK);
        }
        let mut data = Vec::with_capacity(rows.len() * k);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != k {
                return Err(GeometryError::InvalidTable(format!(
                    "row {i} has {} entries, expected {k}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(GeometryError::InvalidTable(format!(
                    "row {i} has a negative or non-finite distance"
                )));
            }
            if r.windows(2).any(|w| w[0] > w[1]) {
                return Err(GeometryError::InvalidTable(format!("row {i} is not sorted")));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            dists: Matrix::from_vec(rows.len(), k, data),
            indices: vec![usize::MAX; rows.len() * k],
        })
    }

    pub fn k(&self) -> usize {
        self.dists.cols()
    }

    pub fn n(&self) -> usize {
        self.dists.rows()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.dists.row(i)
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.dists.row_iter()
    }

    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        let k = self.k();
        &self.indices[i * k..(i + 1) * k]
    }

    /// Keeps only the first `k` neighbors of every row.
    pub fn truncate(&self, k: usize) -> Result<Self, GeometryError> {
        if k == 0 {
            return Err(GeometryError::InvalidK);
        }
        if k > self.k() {
            return Err(GeometryError::InvalidTable(format!(
                "cannot truncate a k = {} table to k = {k}",
                self.k()
            )));
        }
        let mut dists = Vec::with_capacity(self.n() * k);
        let mut indices = Vec::with_capacity(self.n() * k);
        for i in 0..self.n() {
            dists.extend_from_slice(&self.row(i)[..k]);
            indices.extend_from_slice(&self.neighbor_indices(i)[..k]);
        }
        Ok(Self {
            dists: Matrix::from_vec(self.n(), k, dists),
            indices,
        })
    }
}

/// Exact brute-force neighbor search. Ties are broken by ascending point index.
pub fn knn_dists(x: &EmbeddingSet, k: usize) -> Result<KnnTable, GeometryError> {
    let n = x.n();
    if k == 0 {
        return Err(GeometryError::InvalidK);
    }
    if k >= n {
        return Err(GeometryError::KTooLarge { k, n });
    }

    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(xi, x.row(j)), j))
                .collect();
            let by_dist_then_index = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by_dist_then_index);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by_dist_then_index);
            cand
        })
        .collect();

    let mut dists = Vec::with_capacity(n * k);
    let mut indices = Vec::with_capacity(n * k);
    for row in rows {
        for (d, j) in row {
            dists.push(d);
            indices.push(j);
        }
    }
    Ok(KnnTable {
        dists: Matrix::from_vec(n, k, dists),
        indices,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterMode {
    Exact,
    /// Maximum over `pairs` seeded random pairs. Falls back to exact enumeration when
    /// `pairs` covers every unordered pair.
    Sampled {
        pairs: usize,
        seed: u64,
    },
}

/// `max_{i,j} ||x_i - x_j||_1`, or a lower bound on it in sampled mode.
pub fn l1_diameter(x: &EmbeddingSet, mode: DiameterMode) -> f64 {
    let n = x.n();
    let total_pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    match mode {
        DiameterMode::Sampled { pairs, seed } if pairs < total_pairs => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0.0f64;
            for _ in 0..pairs {
                let i = rng.random_range(0..n);
                // draw j != i uniformly
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                best = best.max(l1(x.row(i), x.row(j)));
            }
            best
        }
        _ => (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = x.row(i);
                (i + 1..n).map(|j| l1(xi, x.row(j))).fold(0.0f64, f64::max)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0f64, f64::max),
    }
}
