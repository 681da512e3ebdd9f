use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::mismatch(format!("{} targets but {} predictions", y.len(), y_hat.len())));
    }
    if y.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }
    Ok(())
}

fn sse(y: &[f64], y_hat: &[f64]) -> f64 {
    y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat)?;
    Ok((sse(y, y_hat) / y.len() as f64).sqrt())
}

/// Coefficient of determination; 0 for a constant target.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_lengths(y, y_hat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - sse(y, y_hat) / sst)
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distribution of test RMSE over repeated training runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    #[serde(rename = "median_rmse")]
    pub median: f64,
    pub iqr: f64,
    pub runs: usize,
    /// In run order.
    pub per_run_rmse: Vec<f64>,
}

impl RunStats {
    pub fn from_rmses(per_run_rmse: Vec<f64>) -> Result<Self> {
        if per_run_rmse.is_empty() {
            return Err(Error::invalid("run statistics need at least one run"));
        }
        if per_run_rmse.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite run RMSE".into()));
        }
        let mut sorted = per_run_rmse.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            median: quantile(&sorted, 0.5),
            iqr: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
            runs: sorted.len(),
            per_run_rmse,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
