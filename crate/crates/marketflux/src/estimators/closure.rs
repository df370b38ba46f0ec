//! Recovery of the tree constants from moments of the trade volume.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeClosure {
    /// (2/k) <ln(|dV|/V_k)>.
    pub kappa_hat: f64,
    /// var(ln|dV|)/(k kappa_hat).
    pub lambda_sq_hat: f64,
    pub samples: usize,
}

/// Volume-moment estimates of kappa and lambda^2 over one or more series of increments.
pub fn volume_closure(series: &[&[f64]], generations: usize, vk: f64) -> Result<VolumeClosure> {
    if generations == 0 || !(vk > 0.0) {
        return Err(param("need generations >= 1 and vk > 0"));
    }
    let logs: Vec<f64> =
        series.iter().flat_map(|s| s.iter()).filter(|v| **v != 0.0).map(|v| (v.abs() / vk).ln()).collect();
    if logs.len() < 2 {
        return Err(Error::Estimation("need at least two nonzero volume increments".into()));
    }
    let n = logs.len() as f64;
    let m = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - m).powi(2)).sum::<f64>() / (n - 1.0);
    let k = generations as f64;
    let kappa_hat = 2.0 * m / k;
    Ok(VolumeClosure { kappa_hat, lambda_sq_hat: var / (k * kappa_hat), samples: logs.len() })
}
