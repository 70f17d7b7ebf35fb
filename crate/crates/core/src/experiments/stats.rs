use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("LengthMismatch: {0} vs {1} values")]
    LengthMismatch(usize, usize),
    #[error("TooFewPoints: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("ZeroVariance: input is constant")]
    ZeroVariance,
    #[error("NonFinite: input contains NaN or infinity")]
    NonFinite,
}

impl StatsError {
    pub fn name(&self) -> &'static str {
        match self {
            StatsError::LengthMismatch(..) => "LengthMismatch",
            StatsError::TooFewPoints { .. } => "TooFewPoints",
            StatsError::ZeroVariance => "ZeroVariance",
            StatsError::NonFinite => "NonFinite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub method: CorrelationMethod,
    pub coefficient: f64,
    /// Two-sided, from the t distribution with `n - 2` degrees of freedom.
    /// Approximate for Spearman.
    pub p_value: f64,
    pub n: usize,
}

fn check_inputs(xs: &[f64], ys: &[f64], min: usize) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < min {
        return Err(StatsError::TooFewPoints {
            needed: min,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn centered_moments(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    (sxx, syy, sxy)
}

fn pearson_coefficient(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let (sxx, syy, sxy) = centered_moments(xs, ys);
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn t_test_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub fn correlate(xs: &[f64], ys: &[f64], method: CorrelationMethod) -> Result<Correlation, StatsError> {
    check_inputs(xs, ys, 3)?;
    let coefficient = match method {
        CorrelationMethod::Pearson => pearson_coefficient(xs, ys)?,
        CorrelationMethod::Spearman => pearson_coefficient(&average_ranks(xs), &average_ranks(ys))?,
    };
    Ok(Correlation {
        method,
        coefficient,
        p_value: t_test_p_value(coefficient, xs.len()),
        n: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinearFit, StatsError> {
    check_inputs(xs, ys, 2)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (sxx, syy, sxy) = centered_moments(xs, ys);
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
