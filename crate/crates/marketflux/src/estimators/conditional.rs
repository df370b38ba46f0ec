//! Empirical push-response statistics over consecutive increment pairs.

use serde::{Deserialize, Serialize};

use super::scaling::aggregate;
use crate::error::{param, Error, Result};

/// Smallest number of increments accepted by `conditional_bivariate_stats`.
pub const MIN_CONDITIONAL_SAMPLES: usize = 100_000;

/// Statistics of y over pairs whose x falls in [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub lo: f64,
    pub hi: f64,
    /// Mean x inside the bin.
    pub x_mean: f64,
    /// Conditional mean response <y>_x.
    pub mean: f64,
    /// Conditional standard deviation sigma_x.
    pub sigma: f64,
    /// Standardized third central moment of y.
    pub skewness: f64,
    /// sigma/sqrt(count).
    pub stderr: f64,
    pub count: usize,
    /// True when the bin holds fewer than two pairs; its statistics are NaN.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    pub rows: Vec<ConditionalRow>,
    pub r_c: f64,
    /// <y> over pairs with x > r_c.
    pub y_plus: f64,
    /// <y> over pairs with x < r_c.
    pub y_minus: f64,
}

/// Conditional statistics of y given x over explicit (x, y) pairs.
pub fn conditional_stats_from_pairs(pairs: &[(f64, f64)], edges: &[f64], r_c: f64) -> Result<ConditionalTable> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(param("bin edges must be strictly increasing"));
    }
    let nb = edges.len() - 1;
    let mut acc = vec![[0.0f64; 5]; nb];
    let mut counts = vec![0usize; nb];
    let (mut yp, mut np, mut ym, mut nm) = (0.0, 0usize, 0.0, 0usize);
    for &(x, y) in pairs {
        if x > r_c {
            yp += y;
            np += 1;
        } else if x < r_c {
            ym += y;
            nm += 1;
        }
        if x < edges[0] || x >= edges[nb] {
            continue;
        }
        let i = edges.partition_point(|&e| e <= x) - 1;
        let a = &mut acc[i];
        a[0] += x;
        a[1] += y;
        a[2] += y * y;
        a[3] += y * y * y;
        counts[i] += 1;
    }
    let rows = (0..nb)
        .map(|i| {
            let c = counts[i];
            let (lo, hi) = (edges[i], edges[i + 1]);
            if c < 2 {
                return ConditionalRow {
                    lo,
                    hi,
                    x_mean: f64::NAN,
                    mean: f64::NAN,
                    sigma: f64::NAN,
                    skewness: f64::NAN,
                    stderr: f64::NAN,
                    count: c,
                    empty: true,
                };
            }
            let n = c as f64;
            let a = &acc[i];
            let m = a[1] / n;
            let var = (a[2] / n - m * m).max(0.0);
            let m3 = a[3] / n - 3.0 * m * a[2] / n + 2.0 * m * m * m;
            let sigma = var.sqrt();
            ConditionalRow {
                lo,
                hi,
                x_mean: a[0] / n,
                mean: m,
                sigma,
                skewness: if sigma > 0.0 { m3 / (sigma * sigma * sigma) } else { 0.0 },
                stderr: sigma / n.sqrt(),
                count: c,
                empty: false,
            }
        })
        .collect();
    let avg = |s: f64, n: usize| if n > 0 { s / n as f64 } else { f64::NAN };
    Ok(ConditionalTable { rows, r_c, y_plus: avg(yp, np), y_minus: avg(ym, nm) })
}

/// Consecutive pairs (x, y) of increments aggregated over `tau` steps.
pub fn increment_pairs(increments: &[f64], tau: usize) -> Vec<(f64, f64)> {
    aggregate(increments, tau).windows(2).map(|w| (w[0], w[1])).collect()
}

/// Conditional statistics of the response y to the push x of consecutive increments at tau.
pub fn conditional_bivariate_stats(increments: &[f64], tau: usize, edges: &[f64], r_c: f64) -> Result<ConditionalTable> {
    if increments.len() < MIN_CONDITIONAL_SAMPLES {
        return Err(Error::Estimation(format!(
            "need at least {MIN_CONDITIONAL_SAMPLES} increments, got {}",
            increments.len()
        )));
    }
    if tau == 0 {
        return Err(param("tau must be at least one step"));
    }
    conditional_stats_from_pairs(&increment_pairs(increments, tau), edges, r_c)
}
