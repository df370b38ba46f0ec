//! Local Hurst exponent and feedback index from windowed quadratic variation,
//! regime labels and persistence of the index.

use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, log_spaced};
use super::scaling::aggregate;
use crate::cascade::Regime;
use crate::error::{param, Error, Result};

/// Smallest window accepted by `local_feedback_index`.
pub const MIN_FEEDBACK_WINDOW: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPoint {
    /// Index of the first aggregated increment of the window.
    pub t: usize,
    /// alpha = 2 H - 1 (scale invariant).
    pub alpha: f64,
    pub h_local: f64,
}

/// For each non-overlapping window of `window` increments aggregated over `tau` steps, the
/// slope 2H of ln Q(s) against ln s, where Q(s) is the quadratic variation accumulated
/// over the first s increments of the window, for s from max(window/16, 8) to the window.
pub fn local_feedback_index(increments: &[f64], window: usize, tau: usize) -> Result<Vec<FeedbackPoint>> {
    if window < MIN_FEEDBACK_WINDOW {
        return Err(param(format!("window must hold at least {MIN_FEEDBACK_WINDOW} increments, got {window}")));
    }
    if tau == 0 {
        return Err(param("tau must be at least one step"));
    }
    let x = aggregate(increments, tau);
    if x.len() < window {
        return Err(Error::Estimation("series shorter than one window".into()));
    }
    let lags = log_spaced((window / 16).max(8), window, 8);
    let ln_s: Vec<f64> = lags.iter().map(|&s| (s as f64).ln()).collect();
    x.chunks_exact(window)
        .enumerate()
        .map(|(w, c)| {
            let mut q = 0.0;
            let mut cum = Vec::with_capacity(window);
            for v in c {
                q += v * v;
                cum.push(q);
            }
            let ln_q: Vec<f64> = lags.iter().map(|&s| cum[s - 1].max(1e-300).ln()).collect();
            let (_, slope) = linear_fit(&ln_s, &ln_q)?;
            Ok(FeedbackPoint { t: w * window, alpha: slope - 1.0, h_local: 0.5 * slope })
        })
        .collect()
}

/// Labels with thresholds +-sigma0/2; values on a threshold count as Brownian.
pub fn regime_labels(points: &[FeedbackPoint], sigma0: f64) -> Vec<Regime> {
    let half = 0.5 * sigma0;
    points
        .iter()
        .map(|p| {
            if p.alpha > half {
                Regime::Trending
            } else if p.alpha < -half {
                Regime::MeanReverting
            } else {
                Regime::Brownian
            }
        })
        .collect()
}

/// Feedback index -eps (omega - <omega>) from the windowed mean log-modulus of increments.
pub fn windowed_alpha(increments: &[f64], n: usize, eps: f64) -> Result<Vec<f64>> {
    let w = super::volatility::windowed_log_volatility(increments, n)?;
    let m = w.iter().sum::<f64>() / w.len() as f64;
    Ok(w.iter().map(|v| -eps * (v - m)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Persistence {
    /// Correlation of alpha at the lag.
    pub h: f64,
    /// Mean of alpha_1 - h alpha_0.
    pub residual_mean: f64,
    pub residual_sd: f64,
}

/// Correlation of a series with itself `lag` entries later and the residual alpha_1 - h alpha_0.
pub fn alpha_persistence(alphas: &[f64], lag: usize) -> Result<Persistence> {
    if lag == 0 || alphas.len() < lag + 10 {
        return Err(Error::Estimation("series too short for this lag".into()));
    }
    let n = alphas.len() as f64;
    let m = alphas.iter().sum::<f64>() / n;
    let var = alphas.iter().map(|a| (a - m).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Estimation("constant series".into()));
    }
    let pairs: Vec<(f64, f64)> = alphas.iter().zip(&alphas[lag..]).map(|(a, b)| (a - m, b - m)).collect();
    let h = pairs.iter().map(|p| p.0 * p.1).sum::<f64>() / pairs.len() as f64 / var;
    let res: Vec<f64> = pairs.iter().map(|p| p.1 - h * p.0).collect();
    let rm = res.iter().sum::<f64>() / res.len() as f64;
    let rs = (res.iter().map(|r| (r - rm).powi(2)).sum::<f64>() / res.len() as f64).sqrt();
    Ok(Persistence { h, residual_mean: rm, residual_sd: rs })
}
