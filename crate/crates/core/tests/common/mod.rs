//! Independent reference implementations shared by the integration tests.
//! None of these call into the library's solvers.

#![allow(dead_code)]

use embedgeo::dataio::{EmbeddingSet, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingSet {
    let data: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
    EmbeddingSet::new(Matrix::from_vec(n, dim, data)).unwrap()
}

pub fn uniform_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> EmbeddingSet {
    let data: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    EmbeddingSet::new(Matrix::from_vec(n, dim, data)).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn cost_matrix(x: &EmbeddingSet, y: &EmbeddingSet) -> Vec<Vec<f64>> {
    x.rows().map(|a| y.rows().map(|b| dist(a, b)).collect()).collect()
}

/// Minimum-cost perfect matching by successive shortest augmenting paths with
/// Bellman–Ford relaxation on the residual bipartite graph. Returns the mean matched cost.
pub fn oracle_assignment_mean(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut match_left: Vec<Option<usize>> = vec![None; n];
    let mut match_right: Vec<Option<usize>> = vec![None; n];
    for _ in 0..n {
        // distances to left nodes (via source) and right nodes
        let mut dl = vec![f64::INFINITY; n];
        let mut dr = vec![f64::INFINITY; n];
        let mut pred_right = vec![usize::MAX; n];
        for i in 0..n {
            if match_left[i].is_none() {
                dl[i] = 0.0;
            }
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                if !dl[i].is_finite() {
                    continue;
                }
                for j in 0..n {
                    if match_left[i] == Some(j) {
                        continue;
                    }
                    let cand = dl[i] + cost[i][j];
                    if cand < dr[j] - 1e-15 {
                        dr[j] = cand;
                        pred_right[j] = i;
                        changed = true;
                    }
                }
            }
            for j in 0..n {
                if let Some(i) = match_right[j] {
                    let cand = dr[j] - cost[i][j];
                    if cand < dl[i] - 1e-15 {
                        dl[i] = cand;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let end = (0..n)
            .filter(|&j| match_right[j].is_none())
            .min_by(|&a, &b| dr[a].total_cmp(&dr[b]))
            .expect("a free right node remains");
        let mut j = end;
        loop {
            let i = pred_right[j];
            let prev = match_left[i];
            match_left[i] = Some(j);
            match_right[j] = Some(i);
            match prev {
                Some(pj) => j = pj,
                None => break,
            }
        }
    }
    let total: f64 = (0..n).map(|i| cost[i][match_left[i].unwrap()]).sum();
    total / n as f64
}

/// Sorted distances from each point to its k nearest other points.
pub fn brute_knn(x: &EmbeddingSet, k: usize) -> Vec<Vec<f64>> {
    let rows: Vec<&[f64]> = x.rows().collect();
    (0..rows.len())
        .map(|i| {
            let mut d: Vec<f64> = (0..rows.len())
                .filter(|&j| j != i)
                .map(|j| dist(rows[i], rows[j]))
                .collect();
            d.sort_by(f64::total_cmp);
            d.truncate(k);
            d
        })
        .collect()
}

/// Pooled MLE from a distance table, written straight from the closed form.
pub fn mle_from_table(table: &[Vec<f64>]) -> f64 {
    let k = table[0].len();
    let s: f64 = table
        .iter()
        .map(|row| (0..k - 1).map(|j| (row[k - 1] / row[j]).ln()).sum::<f64>())
        .sum();
    (table.len() * (k - 1)) as f64 / s
}

pub fn to_nalgebra(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Singular values in descending order from a dense SVD.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_nalgebra(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data)
}

/// Random orthogonal `n x n` matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = to_nalgebra(&random_matrix(rng, n, n));
    let q = g.qr().q();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, q[(i, j)]);
        }
    }
    out
}

/// Applies `x -> x Q + t` to every row.
pub fn rigid_motion(x: &EmbeddingSet, q: &Matrix, t: &[f64]) -> EmbeddingSet {
    let moved = x.matrix().matmul(q);
    let mut data = moved.into_vec();
    let dim = t.len();
    for (idx, v) in data.iter_mut().enumerate() {
        *v += t[idx % dim];
    }
    EmbeddingSet::new(Matrix::from_vec(x.n(), dim, data)).unwrap()
}

pub fn scaled(x: &EmbeddingSet, c: f64) -> EmbeddingSet {
    EmbeddingSet::new(x.matrix().map(|v| v * c)).unwrap()
}

pub fn permuted(x: &EmbeddingSet, perm: &[usize]) -> EmbeddingSet {
    let rows: Vec<Vec<f64>> = perm.iter().map(|&i| x.row(i).to_vec()).collect();
    EmbeddingSet::from_rows(&rows).unwrap()
}

/// Closed-form bound for one layer, assembled term by term.
#[allow(clippy::too_many_arguments)]
pub fn bound_oracle(
    n: f64,
    delta: f64,
    depth: f64,
    eps: f64,
    d: f64,
    c: f64,
    diam: f64,
    l_f: f64,
    l_fstar: f64,
    bayes_gap: f64,
    m_f: f64,
    m_fstar: f64,
) -> f64 {
    let log_term = (2.0 * (depth + 1.0) / delta).ln();
    let rate = c * n.powf(-1.0 / (d + eps));
    let mcd = diam * (log_term / (2.0 * n)).sqrt();
    let hoeff = (2.0 * log_term / n).sqrt();
    let lbar = l_f * m_f + l_fstar * m_fstar;
    lbar * (rate + mcd) + m_fstar * (2.0 * bayes_gap + hoeff)
}
