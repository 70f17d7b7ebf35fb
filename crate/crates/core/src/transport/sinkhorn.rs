//! Log-domain Sinkhorn with absorption.
//!
//! Dual potentials `alpha`, `beta` (in units of `1/epsilon`) live in the log domain.
//! Between absorptions the iteration runs on the stabilized kernel
//! `K_ij = exp(alpha_i + beta_j - C_ij / epsilon)` with scalings `u, v` close to one;
//! whenever a scaling drifts past `e^±ABSORB_LOG` it is folded back into the potentials
//! and the kernel is rebuilt. If a kernel row or column underflows entirely, the
//! potentials are resynchronized with an exact log-sum-exp sweep. The plan is always
//! `P = diag(u) K diag(v) = exp(alpha_eff_i + beta_eff_j - C_ij / epsilon)`.

use rayon::prelude::*;

use super::{SinkhornConfig, TransportError, TransportResult};
use crate::dataio::Matrix;

const ABSORB_LOG: f64 = 30.0;

struct Problem<'a> {
    cost: &'a Matrix,
    inv_eps: f64,
    log_a: f64,
    log_b: f64,
    a: f64,
    b: f64,
}

impl Problem<'_> {
    fn m(&self) -> usize {
        self.cost.cols()
    }

    /// `alpha_i = ln a - LSE_j(beta_j - C_ij / eps)`
    fn log_update_rows(&self, beta: &[f64], alpha: &mut [f64]) {
        let inv_eps = self.inv_eps;
        let log_a = self.log_a;
        alpha.par_iter_mut().enumerate().for_each(|(i, out)| {
            let row = self.cost.row(i);
            let mut mx = f64::NEG_INFINITY;
            for (c, b) in row.iter().zip(beta) {
                mx = mx.max(b - c * inv_eps);
            }
            let s: f64 = row.iter().zip(beta).map(|(c, b)| (b - c * inv_eps - mx).exp()).sum();
            *out = log_a - (mx + s.ln());
        });
    }

    /// `beta_j = ln b - LSE_i(alpha_i - C_ij / eps)`, streamed over row-major storage.
    fn log_update_cols(&self, alpha: &[f64], beta: &mut [f64]) {
        let inv_eps = self.inv_eps;
        let mut mx = vec![f64::NEG_INFINITY; self.m()];
        for (i, &al) in alpha.iter().enumerate() {
            for (m, c) in mx.iter_mut().zip(self.cost.row(i)) {
                *m = m.max(al - c * inv_eps);
            }
        }
        let mut s = vec![0.0; self.m()];
        for (i, &al) in alpha.iter().enumerate() {
            for ((acc, c), m) in s.iter_mut().zip(self.cost.row(i)).zip(&mx) {
                *acc += (al - c * inv_eps - m).exp();
            }
        }
        for ((out, m), s) in beta.iter_mut().zip(&mx).zip(&s) {
            *out = self.log_b - (m + s.ln());
        }
    }

    fn build_kernel(&self, alpha: &[f64], beta: &[f64], kernel: &mut Matrix) {
        let inv_eps = self.inv_eps;
        let m = self.m();
        kernel
            .as_mut_slice()
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(i, krow)| {
                let crow = self.cost.row(i);
                let al = alpha[i];
                for ((k, c), b) in krow.iter_mut().zip(crow).zip(beta) {
                    *k = (al + b - c * inv_eps).exp();
                }
            });
    }
}

struct State {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    kernel: Matrix,
}

impl State {
    /// Effective log scalings `alpha + ln u`, `beta + ln v`.
    fn effective(&self, out_a: &mut [f64], out_b: &mut [f64]) {
        for ((o, a), u) in out_a.iter_mut().zip(&self.alpha).zip(&self.u) {
            *o = a + u.ln();
        }
        for ((o, b), v) in out_b.iter_mut().zip(&self.beta).zip(&self.v) {
            *o = b + v.ln();
        }
    }

    fn absorb(&mut self) {
        for (a, u) in self.alpha.iter_mut().zip(self.u.iter_mut()) {
            *a += u.ln();
            *u = 1.0;
        }
        for (b, v) in self.beta.iter_mut().zip(self.v.iter_mut()) {
            *b += v.ln();
            *v = 1.0;
        }
    }

    fn resync(&mut self, p: &Problem) {
        p.log_update_rows(&self.beta, &mut self.alpha);
        p.log_update_cols(&self.alpha, &mut self.beta);
        self.u.iter_mut().for_each(|u| *u = 1.0);
        self.v.iter_mut().for_each(|v| *v = 1.0);
        p.build_kernel(&self.alpha, &self.beta, &mut self.kernel);
    }

    /// One scaling sweep on the stabilized kernel. Returns false if any scaling
    /// became zero or non-finite (state left untouched in that case).
    fn scale(&mut self, p: &Problem, kv: &mut [f64], ktu: &mut [f64], new_u: &mut [f64]) -> bool {
        let v = &self.v;
        let kernel = &self.kernel;
        kv.par_iter_mut().enumerate().for_each(|(i, out)| {
            *out = kernel.row(i).iter().zip(v).map(|(k, v)| k * v).sum();
        });
        for (nu, s) in new_u.iter_mut().zip(kv.iter()) {
            *nu = p.a / s;
        }
        if new_u.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
            return false;
        }
        kernel.mul_vec_transposed(new_u, ktu);
        if ktu.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return false;
        }
        self.u.copy_from_slice(new_u);
        for (v, s) in self.v.iter_mut().zip(ktu.iter()) {
            *v = p.b / s;
        }
        true
    }

    fn needs_absorb(&self) -> bool {
        self.u.iter().chain(&self.v).any(|s| s.ln().abs() > ABSORB_LOG)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sinkhorn on an explicit `n x m` cost matrix with uniform marginals `1/n`, `1/m`.
pub fn sinkhorn_uniform(cost: &Matrix, config: &SinkhornConfig) -> Result<TransportResult, TransportError> {
    sinkhorn_plan(cost, config).map(|(r, _)| r)
}

/// Like [`sinkhorn_uniform`] but also returns the rounded coupling.
pub fn sinkhorn_plan(cost: &Matrix, config: &SinkhornConfig) -> Result<(TransportResult, Matrix), TransportError> {
    config.validate()?;
    let (n, m) = cost.shape();
    if n == 0 || m == 0 {
        return Err(TransportError::EmptySet);
    }
    if cost.as_slice().iter().any(|c| !c.is_finite()) {
        return Err(TransportError::InvalidParameter(
            "cost matrix has non-finite entries".into(),
        ));
    }
    let p = Problem {
        cost,
        inv_eps: 1.0 / config.epsilon,
        a: 1.0 / n as f64,
        b: 1.0 / m as f64,
        log_a: -(n as f64).ln(),
        log_b: -(m as f64).ln(),
    };

    let mut st = State {
        alpha: vec![0.0; n],
        beta: vec![0.0; m],
        u: vec![1.0; n],
        v: vec![1.0; m],
        kernel: Matrix::zeros(n, m),
    };
    // first sweep is an exact log-domain update from beta = 0
    st.resync(&p);

    let mut prev_a = vec![0.0; n];
    let mut prev_b = vec![0.0; m];
    let mut cur_a = vec![0.0; n];
    let mut cur_b = vec![0.0; m];
    st.effective(&mut prev_a, &mut prev_b);

    let mut kv = vec![0.0; n];
    let mut ktu = vec![0.0; m];
    let mut new_u = vec![0.0; n];
    let mut iterations = 1;
    let mut converged = false;
    while iterations < config.max_iter {
        if !st.scale(&p, &mut kv, &mut ktu, &mut new_u) {
            st.absorb();
            st.resync(&p);
        } else if st.needs_absorb() {
            st.absorb();
            p.build_kernel(&st.alpha, &st.beta, &mut st.kernel);
        }
        iterations += 1;
        st.effective(&mut cur_a, &mut cur_b);
        let change = max_abs_diff(&cur_a, &prev_a).max(max_abs_diff(&cur_b, &prev_b));
        std::mem::swap(&mut cur_a, &mut prev_a);
        std::mem::swap(&mut cur_b, &mut prev_b);
        if change < config.tol {
            converged = true;
            break;
        }
    }

    let mut plan = st.kernel;
    for (i, row) in plan.as_mut_slice().chunks_exact_mut(m).enumerate() {
        let ui = st.u[i];
        for (pij, vj) in row.iter_mut().zip(&st.v) {
            *pij *= ui * vj;
        }
    }
    let marginal_violation = marginal_error(&plan, p.a, p.b);
    round_to_coupling(&mut plan, p.a, p.b);
    let cost_value = transport_cost(&plan, cost);

    Ok((
        TransportResult {
            cost: cost_value.max(0.0),
            iterations,
            converged,
            marginal_violation,
        },
        plan,
    ))
}

fn row_sums(plan: &Matrix) -> Vec<f64> {
    plan.row_iter().map(|r| r.iter().sum()).collect()
}

fn col_sums(plan: &Matrix) -> Vec<f64> {
    let mut c = vec![0.0; plan.cols()];
    for row in plan.row_iter() {
        for (acc, v) in c.iter_mut().zip(row) {
            *acc += v;
        }
    }
    c
}

pub(crate) fn marginal_error(plan: &Matrix, a: f64, b: f64) -> f64 {
    let r = row_sums(plan).iter().map(|s| (s - a).abs()).fold(0.0, f64::max);
    let c = col_sums(plan).iter().map(|s| (s - b).abs()).fold(0.0, f64::max);
    r.max(c)
}

/// Projects a nonnegative plan onto the set of couplings with uniform marginals:
/// scale rows down to at most `a`, columns down to at most `b`, then add the
/// rank-one correction `err_r err_c^T / |err_r|_1`.
fn round_to_coupling(plan: &mut Matrix, a: f64, b: f64) {
    let m = plan.cols();
    let r = row_sums(plan);
    for (row, s) in plan.as_mut_slice().chunks_exact_mut(m).zip(&r) {
        let x = if *s > a { a / s } else { 1.0 };
        if x != 1.0 {
            row.iter_mut().for_each(|p| *p *= x);
        }
    }
    let c = col_sums(plan);
    let y: Vec<f64> = c.iter().map(|s| if *s > b { b / s } else { 1.0 }).collect();
    for row in plan.as_mut_slice().chunks_exact_mut(m) {
        for (p, yj) in row.iter_mut().zip(&y) {
            *p *= yj;
        }
    }
    let err_r: Vec<f64> = row_sums(plan).iter().map(|s| (a - s).max(0.0)).collect();
    let err_c: Vec<f64> = col_sums(plan).iter().map(|s| (b - s).max(0.0)).collect();
    let mass: f64 = err_r.iter().sum();
    if mass > 0.0 {
        for (row, er) in plan.as_mut_slice().chunks_exact_mut(m).zip(&err_r) {
            let w = er / mass;
            if w == 0.0 {
                continue;
            }
            for (p, ec) in row.iter_mut().zip(&err_c) {
                *p += w * ec;
            }
        }
    }
}

fn transport_cost(plan: &Matrix, cost: &Matrix) -> f64 {
    let per_row: Vec<f64> = plan
        .row_iter()
        .zip(cost.row_iter())
        .map(|(p, c)| p.iter().zip(c).map(|(p, c)| p * c).sum())
        .collect();
    crate::numeric::pairwise_sum(&per_row)
}
