use marketflux::cascade::impact::{
    apparent_exponent, coarse_impact, fitted_apparent_exponent, response_conditioned, response_peak, volume_scale,
};
use serde::Serialize;

use crate::config::ImpactConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, OutputDir};

#[derive(Serialize)]
struct FittedExponent {
    tau: f64,
    v_tau: f64,
    upsilon: f64,
}

#[derive(Serialize)]
struct Summary {
    gamma: f64,
    response_peak: f64,
    /// e^{1/gamma}, the stationary point of ln(1 + l)/l^gamma for large l.
    response_peak_asymptote: f64,
    fit_range: (f64, f64),
    fitted: Vec<FittedExponent>,
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn run(c: &ImpactConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if !(c.dv_min > 0.0 && c.dv_max > c.dv_min && c.points >= 2 && c.lag_max > 1.0) {
        return Err(CliError::input("need 0 < dv_min < dv_max, lag_max > 1 and at least 2 points"));
    }
    if !(c.sigma_k > 0.0 && c.vk > 0.0 && c.tauk > 0.0) || c.taus.iter().any(|t| !(*t >= c.tauk)) {
        return Err(CliError::input("need positive sigma_k, vk, tauk and every tau >= tauk"));
    }
    let peak = response_peak(c.gamma)?;
    let dvs = log_points(c.dv_min, c.dv_max, c.points);
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for &tau in &c.taus {
        let v_tau = volume_scale(tau, c.vk, c.tauk);
        let sigma_tau = c.sigma_k * (tau / c.tauk).sqrt();
        for &dv in &dvs {
            rows.push(vec![tau, dv, coarse_impact(dv, tau, sigma_tau, c.vk, c.tauk), apparent_exponent(dv, v_tau)]);
        }
        fitted.push(FittedExponent { tau, v_tau, upsilon: fitted_apparent_exponent(c.fit_lo, c.fit_hi, v_tau, 41)? });
    }
    out.write_csv("impact.csv", &["tau", "dV", "dP", "upsilon"], rows)?;
    let lags = log_points(1e-2, c.lag_max, c.points);
    out.write_csv("response.csv", &["l", "R"], lags.iter().map(|&l| vec![l, response_conditioned(l, c.gamma)]))?;
    let summary = Summary {
        gamma: c.gamma,
        response_peak: peak,
        response_peak_asymptote: (1.0 / c.gamma).exp(),
        fit_range: (c.fit_lo, c.fit_hi),
        fitted,
    };
    out.write_json("summary.json", &summary)?;
    Ok(Vec::new())
}
