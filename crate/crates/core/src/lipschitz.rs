//! Spectral norms and suffix products of linear-layer weights.
//!
//! ReLU and other 1-Lipschitz activations contribute a factor of one, so the product of
//! layer spectral norms from layer `i` onward upper-bounds the Lipschitz constant of the
//! network tail.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{Matrix, WeightStack};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LipschitzError {
    #[error("IndexOutOfRange: index {index} exceeds layer count {layers}")]
    IndexOutOfRange { index: usize, layers: usize },
}

impl LipschitzError {
    pub fn name(&self) -> &'static str {
        match self {
            LipschitzError::IndexOutOfRange { .. } => "IndexOutOfRange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    /// Relative change of successive Rayleigh quotients that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// Largest singular value of `w`, by power iteration on `W^T W` from the normalized
/// all-ones vector.
pub fn spectral_norm(w: &Matrix, cfg: &PowerIteration) -> f64 {
    let cols = w.cols();
    if cols == 0 || w.rows() == 0 || w.as_slice().iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut v = vec![1.0; cols];
    let mut image = vec![0.0; w.rows()];
    // if the start vector lies in the null space, nudge one coordinate at a time
    for coord in 0..cols {
        normalize(&mut v);
        w.mul_vec(&v, &mut image);
        if norm_sq(&image) > 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x = 1.0);
        v[coord] += 1e-8;
    }

    let mut back = vec![0.0; cols];
    let mut lambda = 0.0;
    for _ in 0..cfg.max_iter.max(1) {
        w.mul_vec(&v, &mut image);
        let next = norm_sq(&image);
        let done = (next - lambda).abs() < cfg.tol * next;
        lambda = next;
        if done || next == 0.0 {
            break;
        }
        w.mul_vec_transposed(&image, &mut back);
        v.copy_from_slice(&back);
        normalize(&mut v);
    }
    lambda.sqrt()
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn normalize(x: &mut [f64]) {
    let n = norm_sq(x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Per-layer spectral norms and tail products.
///
/// `sigma[j]` is the norm of layer `j` (0-based, forward order). `suffix[i]` is the
/// product of `sigma[i..]`, so `suffix[L] = 1` and `suffix[i] = sigma[i] * suffix[i + 1]`.
/// `suffix[i]` bounds the map from the input of layer `i` to the output; equivalently
/// it is the tail constant for the representation after `i` layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProfile {
    pub sigma: Vec<f64>,
    pub suffix: Vec<f64>,
}

impl LipschitzProfile {
    pub fn from_sigma(sigma: Vec<f64>) -> Self {
        let mut suffix = vec![1.0; sigma.len() + 1];
        for i in (0..sigma.len()).rev() {
            suffix[i] = sigma[i] * suffix[i + 1];
        }
        Self { sigma, suffix }
    }

    pub fn layers(&self) -> usize {
        self.sigma.len()
    }

    pub fn suffix_at(&self, i: usize) -> Result<f64, LipschitzError> {
        self.suffix.get(i).copied().ok_or(LipschitzError::IndexOutOfRange {
            index: i,
            layers: self.layers(),
        })
    }
}

pub fn lipschitz_profile(stack: &WeightStack, cfg: &PowerIteration) -> LipschitzProfile {
    let sigma: Vec<f64> = stack.layers().par_iter().map(|w| spectral_norm(w, cfg)).collect();
    LipschitzProfile::from_sigma(sigma)
}

/// Product of spectral norms of the layers after the first `i`; `i = L` gives 1.
pub fn suffix_lipschitz(stack: &WeightStack, i: usize, cfg: &PowerIteration) -> Result<f64, LipschitzError> {
    if i > stack.len() {
        return Err(LipschitzError::IndexOutOfRange {
            index: i,
            layers: stack.len(),
        });
    }
    Ok(stack.layers()[i..].iter().map(|w| spectral_norm(w, cfg)).product())
}
