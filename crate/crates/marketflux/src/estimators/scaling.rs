//! Dispersion scaling sigma^2(tau) = D tau + L (tau/tau0)^{1 + lambda0_sq},
//! moment correlators of increment amplitudes and generalized Hurst exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{levenberg_marquardt, linear_fit};
use crate::error::{Error, Result};

/// Sums of consecutive non-overlapping groups of m increments; a trailing partial group is dropped.
pub fn aggregate(increments: &[f64], m: usize) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    increments.chunks_exact(m).map(|c| c.iter().sum()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub tau: f64,
    /// Mean squared aggregated increment (scales as the square of the data).
    pub variance: f64,
    pub windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionFit {
    /// Diffusion coefficient (scales as the square of the data).
    pub d: f64,
    /// Crossover constant (scales as the square of the data).
    pub l: f64,
    pub lambda0_sq: f64,
    /// Crossover time (D tau0/L)^{1/lambda0_sq} tau0; infinite when L vanishes.
    pub tau_x: f64,
    /// Half the local log-log slope of the fitted law at the smallest tau.
    pub h_small: f64,
    /// (1 + lambda0_sq)/2 when the crossover lies inside the fitted range, otherwise half
    /// the local slope of the fitted law at the largest tau.
    pub h_large: f64,
    pub converged: bool,
    pub curve: Vec<DispersionPoint>,
}

/// Aggregated second moments of several series at each tau (in steps of dt).
pub fn dispersion_curve(series: &[&[f64]], dt: f64, tau_list: &[usize]) -> Vec<DispersionPoint> {
    tau_list
        .par_iter()
        .map(|&m| {
            let (mut s, mut w) = (0.0, 0usize);
            for x in series {
                for a in aggregate(x, m) {
                    s += a * a;
                    w += 1;
                }
            }
            DispersionPoint { tau: m as f64 * dt, variance: if w > 0 { s / w as f64 } else { f64::NAN }, windows: w }
        })
        .collect()
}

fn local_slope(d: f64, a: f64, beta: f64, tau: f64) -> f64 {
    let lin = d * tau;
    let pw = a * tau.powf(beta);
    (lin + beta * pw) / (lin + pw)
}

/// Fits D tau + A tau^beta to the curve in log space with weights sqrt(windows).
pub fn fit_dispersion(curve: &[DispersionPoint], tau0: f64) -> Result<DispersionFit> {
    let pts: Vec<DispersionPoint> =
        curve.iter().copied().filter(|p| p.windows >= 10 && p.variance > 0.0 && p.variance.is_finite()).collect();
    if pts.len() < 4 {
        return Err(Error::Estimation("need at least 4 tau values with 10 or more windows".into()));
    }
    let tmin = pts.iter().map(|p| p.tau).fold(f64::INFINITY, f64::min);
    let tmax = pts.iter().map(|p| p.tau).fold(0.0, f64::max);
    if tmax / tmin < 100.0 {
        return Err(Error::Estimation("tau values must span at least two decades".into()));
    }
    // starting point: weighted linear solve for (D, A) on a grid of exponents
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.5);
    for i in 1..=30 {
        let l0 = 0.05 * i as f64;
        let beta = 1.0 + l0;
        let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in &pts {
            let w = p.windows as f64 / (p.variance * p.variance);
            let (u, v) = (p.tau, p.tau.powf(beta));
            s11 += w * u * u;
            s12 += w * u * v;
            s22 += w * v * v;
            b1 += w * u * p.variance;
            b2 += w * v * p.variance;
        }
        let det = s11 * s22 - s12 * s12;
        let (mut d, mut a) = ((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det);
        if !(d > 0.0) {
            d = pts[0].variance / pts[0].tau;
        }
        if !(a > 0.0) {
            a = 1e-6 * d * tmax / tmax.powf(beta);
        }
        let cost: f64 = pts
            .iter()
            .map(|p| p.windows as f64 * ((d * p.tau + a * p.tau.powf(beta)).ln() - p.variance.ln()).powi(2))
            .sum();
        if cost < best.0 {
            best = (cost, d, a, l0);
        }
    }
    let resid = |q: &[f64]| -> Vec<f64> {
        let (d, a, l0) = (q[0].exp(), q[1].exp(), q[2]);
        pts.iter()
            .map(|p| (p.windows as f64).sqrt() * ((d * p.tau + a * p.tau.powf(1.0 + l0)).ln() - p.variance.ln()))
            .collect()
    };
    let fit = levenberg_marquardt(resid, &[best.1.ln(), best.2.ln(), best.3], 500)?;
    let (d, a, l0) = (fit.params[0].exp(), fit.params[1].exp(), fit.params[2]);
    let beta = 1.0 + l0;
    let tau_x = if l0 > 0.0 { (d / a).powf(1.0 / l0) } else { f64::INFINITY };
    let converged = fit.converged && l0.is_finite() && l0 > 0.0 && a.is_finite() && d.is_finite();
    let h_large = if converged && tau_x <= tmax { 0.5 * beta } else { 0.5 * local_slope(d, a, beta, tmax) };
    Ok(DispersionFit {
        d,
        l: a * tau0.powf(beta),
        lambda0_sq: l0,
        tau_x,
        h_small: 0.5 * local_slope(d, a, beta, tmin),
        h_large,
        converged,
        curve: curve.to_vec(),
    })
}

/// Dispersion law fitted to one series of increments sampled every dt.
pub fn dispersion_scaling(increments: &[f64], dt: f64, tau_list: &[usize], tau0: f64) -> Result<DispersionFit> {
    fit_dispersion(&dispersion_curve(&[increments], dt, tau_list), tau0)
}

/// Dispersion law fitted to several independent series pooled at each tau.
pub fn dispersion_scaling_pooled(series: &[&[f64]], dt: f64, tau_list: &[usize], tau0: f64) -> Result<DispersionFit> {
    fit_dispersion(&dispersion_curve(series, dt, tau_list), tau0)
}

/// Copy of the series with the largest `fraction` of |increments| removed.
pub fn trim_largest(increments: &[f64], fraction: f64) -> Vec<f64> {
    let mut abs: Vec<f64> = increments.iter().map(|v| v.abs()).collect();
    let n = abs.len();
    let drop = ((n as f64) * fraction).round() as usize;
    if drop == 0 || drop >= n {
        return increments.to_vec();
    }
    abs.select_nth_unstable_by(n - drop, |a, b| a.total_cmp(b));
    let cut = abs[n - drop];
    increments.iter().copied().filter(|v| v.abs() < cut).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFit {
    pub q_values: Vec<f64>,
    /// Decay exponents of the normalized moment correlators (scale invariant).
    pub tau_q: Vec<f64>,
    /// sum tau_q q^2 / sum q^4.
    pub lambda_sq_hat: f64,
    /// Lag window in steps.
    pub window: (usize, usize),
    /// Per q: (lag, <|x_t|^q |x_{t+lag}|^q>/<|x|^q>^2).
    pub curves: Vec<Vec<(usize, f64)>>,
}

/// Normalized moment correlators of several series across log-spaced lags in `window`
/// and their power-law decay exponents tau(q), fitted as -slope in log-log.
pub fn structure_functions_pooled(series: &[&[f64]], q_list: &[f64], window: (usize, usize)) -> Result<StructureFit> {
    if q_list.is_empty() || q_list.iter().any(|&q| !(q > 0.0 && q <= 4.0)) {
        return Err(Error::Estimation("q values must lie in (0, 4]".into()));
    }
    let shortest = series.iter().map(|s| s.len()).min().unwrap_or(0);
    if window.0 < 1 || window.1 <= window.0 || window.1 * 10 > shortest {
        return Err(Error::Estimation(format!("lag window {window:?} does not fit series of length {shortest}")));
    }
    let lags = super::fit::log_spaced(window.0, window.1, 8);
    if lags.len() < 4 {
        return Err(Error::Estimation("need at least 4 lags in the window".into()));
    }
    let mut tau_q = Vec::with_capacity(q_list.len());
    let mut curves = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let powered: Vec<Vec<f64>> = series.iter().map(|s| s.iter().map(|x| x.abs().powf(q)).collect()).collect();
        let (s1, n1) = powered.iter().fold((0.0, 0usize), |acc, p| (acc.0 + p.iter().sum::<f64>(), acc.1 + p.len()));
        let m = s1 / n1 as f64;
        let curve: Vec<(usize, f64)> = lags
            .par_iter()
            .map(|&l| {
                let (mut s, mut n) = (0.0, 0usize);
                for p in &powered {
                    s += p.iter().zip(&p[l..]).map(|(a, b)| a * b).sum::<f64>();
                    n += p.len() - l;
                }
                (l, s / n as f64 / (m * m))
            })
            .collect();
        let x: Vec<f64> = curve.iter().map(|c| (c.0 as f64).ln()).collect();
        let y: Vec<f64> = curve.iter().map(|c| c.1.ln()).collect();
        let (_, slope) = linear_fit(&x, &y)?;
        tau_q.push(-slope);
        curves.push(curve);
    }
    let num: f64 = q_list.iter().zip(&tau_q).map(|(q, t)| t * q * q).sum();
    let den: f64 = q_list.iter().map(|q| q.powi(4)).sum();
    Ok(StructureFit { q_values: q_list.to_vec(), tau_q, lambda_sq_hat: num / den, window, curves })
}

pub fn structure_functions(series: &[f64], q_list: &[f64], window: (usize, usize)) -> Result<StructureFit> {
    structure_functions_pooled(&[series], q_list, window)
}

/// Generalized Hurst exponents H(q) from <|sum of m increments|^q> ~ m^{q H(q)} over `tau_list`.
pub fn generalized_hurst(series: &[&[f64]], q_list: &[f64], tau_list: &[usize]) -> Result<Vec<(f64, f64)>> {
    if tau_list.len() < 3 {
        return Err(Error::Estimation("need at least 3 aggregation scales".into()));
    }
    let aggs: Vec<Vec<f64>> = tau_list
        .par_iter()
        .map(|&m| series.iter().flat_map(|s| aggregate(s, m)).collect())
        .collect();
    if aggs.iter().any(|a| a.len() < 10) {
        return Err(Error::Estimation("too few windows at the largest scale".into()));
    }
    q_list
        .iter()
        .map(|&q| {
            let x: Vec<f64> = tau_list.iter().map(|&m| (m as f64).ln()).collect();
            let y: Vec<f64> = aggs
                .iter()
                .map(|a| (a.iter().map(|v| v.abs().powf(q)).sum::<f64>() / a.len() as f64).ln())
                .collect();
            let (_, slope) = linear_fit(&x, &y)?;
            Ok((q, slope / q))
        })
        .collect()
}
