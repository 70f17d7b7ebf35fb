//! Layer-wise generalization-gap bound.
//!
//! For layers `k = 0..=L`, with `log_term = ln(2 (L + 1) / delta)`:
//!
//! ```text
//! rate_k      = C_k * n^(-1 / (d_k + eps))
//! mcdiarmid_k = D_k * sqrt(log_term / (2 n))
//! hoeffding   = sqrt(2 log_term / n)
//! Lbar_k      = L_k(F) M_F + L_k(F*) M_F*
//! gap_k       = Lbar_k (rate_k + mcdiarmid_k) + M_F* (2 bayes_gap_k + hoeffding)
//! ```
//!
//! and the reported bound is `min_k gap_k` (ties go to the smallest `k`). Every
//! constant except `d_k` and `D_k` is supplied by the caller; these are bound
//! evaluations, not certified guarantees.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_EPS_SLACK: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("BadConfidence: delta must lie in (0, 1), got {0}")]
    BadConfidence(f64),
    #[error("NoLayers: the layer list is empty")]
    NoLayers,
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

impl BoundError {
    pub fn name(&self) -> &'static str {
        match self {
            BoundError::BadConfidence(_) => "BadConfidence",
            BoundError::NoLayers => "NoLayers",
            BoundError::InvalidInput(_) => "InvalidInput",
        }
    }
}

/// Constants for one layer. JSON keys follow the symbols of the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConstants {
    /// Intrinsic dimension `d_k`.
    pub d: f64,
    /// Rate constant `C_k`.
    #[serde(rename = "C")]
    pub c: f64,
    /// ℓ1 diameter `D_k` of the embedding support.
    #[serde(rename = "Ddiam")]
    pub diameter: f64,
    /// Tail Lipschitz constant `L_k(F)`.
    #[serde(rename = "L_F")]
    pub l_f: f64,
    /// Bayes-predictor Lipschitz constant `L_k(F*)`.
    #[serde(rename = "L_Fstar")]
    pub l_fstar: f64,
    /// `E|Y - F_k*(Z_k)|_1`.
    pub bayes_gap: f64,
    /// Where each constant came from (`"user"` unless spliced from a measurement).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl LayerConstants {
    pub fn new(d: f64, c: f64, diameter: f64, l_f: f64, l_fstar: f64, bayes_gap: f64) -> Self {
        Self {
            d,
            c,
            diameter,
            l_f,
            l_fstar,
            bayes_gap,
            provenance: BTreeMap::new(),
        }
    }

    fn validate(&self, k: usize) -> Result<(), BoundError> {
        let fields = [
            ("d", self.d),
            ("C", self.c),
            ("Ddiam", self.diameter),
            ("L_F", self.l_f),
            ("L_Fstar", self.l_fstar),
            ("bayes_gap", self.bayes_gap),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(BoundError::InvalidInput(format!(
                    "layer {k}: {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.d <= 0.0 {
            return Err(BoundError::InvalidInput(format!("layer {k}: d must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub layers: Vec<LayerConstants>,
    pub n: u64,
    pub delta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(rename = "M_F")]
    pub m_f: f64,
    #[serde(rename = "M_Fstar")]
    pub m_fstar: f64,
    /// Empirical risk; when present the report includes `Rhat + min gap`.
    #[serde(rename = "Rhat", default, skip_serializing_if = "Option::is_none")]
    pub rhat: Option<f64>,
    /// Network depth `L` entering the union bound. Defaults to `layers.len() - 1`.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

fn default_eps() -> f64 {
    DEFAULT_EPS_SLACK
}

impl BoundInputs {
    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(self.layers.len().saturating_sub(1))
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        if self.layers.is_empty() {
            return Err(BoundError::NoLayers);
        }
        check_delta(self.delta)?;
        if self.n == 0 {
            return Err(BoundError::InvalidInput("n must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(BoundError::InvalidInput(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        for (name, v) in [("M_F", self.m_f), ("M_Fstar", self.m_fstar)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(BoundError::InvalidInput(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if let Some(r) = self.rhat {
            if !r.is_finite() {
                return Err(BoundError::InvalidInput("Rhat must be finite".into()));
            }
        }
        if self.depth() + 1 < self.layers.len() {
            return Err(BoundError::InvalidInput(format!(
                "L = {} is smaller than the number of layers minus one ({})",
                self.depth(),
                self.layers.len() - 1
            )));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            layer.validate(k)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub mcdiarmid: f64,
    pub hoeffding: f64,
}

fn check_delta(delta: f64) -> Result<(), BoundError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(BoundError::BadConfidence(delta))
    }
}

/// High-probability fluctuation widths under a union bound over `L + 1` layers.
pub fn concentration_terms(n: u64, delta: f64, depth: usize, diameter: f64) -> Result<Concentration, BoundError> {
    check_delta(delta)?;
    if n == 0 {
        return Err(BoundError::InvalidInput("n must be at least 1".into()));
    }
    let log_term = (2.0 * (depth as f64 + 1.0) / delta).ln();
    let n = n as f64;
    Ok(Concentration {
        mcdiarmid: diameter * (log_term / (2.0 * n)).sqrt(),
        hoeffding: (2.0 * log_term / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerBound {
    pub k: usize,
    pub rate_term: f64,
    pub mcdiarmid_term: f64,
    /// Unscaled Hoeffding width; enters the bound as `M_F* * hoeffding_term`.
    pub hoeffding_term: f64,
    /// `2 M_F* E|Y - F_k*(Z_k)|_1`.
    pub bayes_term: f64,
    #[serde(rename = "Lbar")]
    pub lbar: f64,
    pub gap_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub per_layer: Vec<LayerBound>,
    pub argmin_k: usize,
    pub min_gap_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute_bound: Option<f64>,
}

fn layer_bound(k: usize, layer: &LayerConstants, inputs: &BoundInputs) -> Result<LayerBound, BoundError> {
    let conc = concentration_terms(inputs.n, inputs.delta, inputs.depth(), layer.diameter)?;
    let rate_term = layer.c * (inputs.n as f64).powf(-1.0 / (layer.d + inputs.eps));
    let lbar = layer.l_f * inputs.m_f + layer.l_fstar * inputs.m_fstar;
    let bayes_term = 2.0 * inputs.m_fstar * layer.bayes_gap;
    let gap_bound = lbar * (rate_term + conc.mcdiarmid) + inputs.m_fstar * (2.0 * layer.bayes_gap + conc.hoeffding);
    Ok(LayerBound {
        k,
        rate_term,
        mcdiarmid_term: conc.mcdiarmid,
        hoeffding_term: conc.hoeffding,
        bayes_term,
        lbar,
        gap_bound,
    })
}

pub fn evaluate_bound(inputs: &BoundInputs) -> Result<BoundReport, BoundError> {
    inputs.validate()?;
    let per_layer = inputs
        .layers
        .iter()
        .enumerate()
        .map(|(k, layer)| layer_bound(k, layer, inputs))
        .collect::<Result<Vec<_>, _>>()?;
    let best = per_layer.iter().fold(
        &per_layer[0],
        |best, lb| if lb.gap_bound < best.gap_bound { lb } else { best },
    );
    Ok(BoundReport {
        argmin_k: best.k,
        min_gap_bound: best.gap_bound,
        absolute_bound: inputs.rhat.map(|r| r + best.gap_bound),
        per_layer,
    })
}

/// Bound at the final layer, where the tail map is the identity (`L_L(F) = 1`).
/// Uses the last entry of `inputs.layers`.
pub fn final_layer_bound(inputs: &BoundInputs) -> Result<LayerBound, BoundError> {
    inputs.validate()?;
    let mut last = inputs.layers.last().cloned().ok_or(BoundError::NoLayers)?;
    last.l_f = 1.0;
    layer_bound(inputs.layers.len() - 1, &last, inputs)
}
