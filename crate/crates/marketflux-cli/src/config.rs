//! Run configurations for every subcommand, angle and count parsing, and the
//! merge of a JSON config file over command-line values.

use std::path::{Path, PathBuf};

use marketflux::pdf::MillAxis;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Full closure of one run; stored verbatim in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Simulate(SimulateConfig),
    Pdf(PdfConfig),
    Mill(MillConfig),
    Coalesce(CoalesceConfig),
    Estimate(EstimateConfig),
    Impact(ImpactConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Simulate(_) => "simulate",
            RunConfig::Pdf(_) => "pdf",
            RunConfig::Mill(_) => "mill",
            RunConfig::Coalesce(_) => "coalesce",
            RunConfig::Estimate(_) => "estimate",
            RunConfig::Impact(_) => "impact",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Simulate(c) => Some(c.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub tau0: f64,
    pub tauk: f64,
    pub branches: u32,
    pub lambda0_sq: f64,
    pub lambda_sq: f64,
    pub d0: f64,
    pub l: f64,
    pub gamma: f64,
    pub vk: f64,
    pub steps: usize,
    pub seed: u64,
    pub replicas: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            tau0: 1_048_576.0,
            tauk: 1.0,
            branches: 3,
            lambda0_sq: 0.9,
            lambda_sq: 0.1,
            d0: 1.0,
            l: 0.0,
            gamma: 0.2,
            vk: 1.0,
            steps: 100_000,
            seed: 0,
            replicas: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PdfModel {
    Tent,
    AsymTent,
    FatTail,
    AsymFatTail,
    Marginal,
    Markovian,
    EffectiveMarket,
    DoubleGaussian,
}

impl PdfModel {
    pub fn is_bivariate(&self) -> bool {
        matches!(self, PdfModel::Markovian | PdfModel::EffectiveMarket | PdfModel::DoubleGaussian)
    }
}

/// Angles are stored in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfConfig {
    pub model: PdfModel,
    pub sigma: f64,
    pub nu: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    /// Width scale of the asymmetric laws.
    pub alpha: f64,
    pub zeta: f64,
    /// Price correlator of the Markovian density.
    pub eps: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for PdfConfig {
    fn default() -> Self {
        Self {
            model: PdfModel::DoubleGaussian,
            sigma: 1.0,
            nu: 0.95,
            phi_minus: 8f64.to_radians(),
            phi_plus: 8.7f64.to_radians(),
            alpha: 1.0,
            zeta: 0.0,
            eps: 0.0,
            x_max: 4.0,
            points: 81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MillConfig {
    pub sigma: f64,
    pub nu: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub axis: MillAxis,
    pub extent: f64,
    pub points: usize,
}

impl Default for MillConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            nu: 0.95,
            phi_minus: 8f64.to_radians(),
            phi_plus: 8.7f64.to_radians(),
            axis: MillAxis::Horizontal,
            extent: 4.0,
            points: 81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalesceConfig {
    pub beta: f64,
    pub m: f64,
    pub q: f64,
    pub p: f64,
    pub q0: f64,
    pub u_star: f64,
    pub t0: f64,
    pub t_end: f64,
    pub points: usize,
}

impl Default for CoalesceConfig {
    fn default() -> Self {
        let p = marketflux::coalescence::CoalescenceParams::default();
        Self { beta: p.beta, m: p.m, q: p.q, p: p.p, q0: p.q0, u_star: p.u_star, t0: p.t0, t_end: 50.0, points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub input: PathBuf,
    /// Number of consecutive increments summed into one.
    pub aggregate: usize,
    /// Share of the largest |increments| used by the Hill fit.
    pub tail_fraction: f64,
    pub per_decade: usize,
    /// Upper time scale of the dispersion law; defaults to the series length.
    pub tau0: Option<f64>,
    pub window: usize,
    pub q: f64,
    pub hurst_q: Vec<f64>,
    /// Tree depth for the volume-moment closure; skipped when absent.
    pub generations: Option<usize>,
    pub vk: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            aggregate: 1,
            tail_fraction: 0.001,
            per_decade: 8,
            tau0: None,
            window: 4,
            q: 1.0,
            hurst_q: vec![1.0, 2.0, 3.0],
            generations: None,
            vk: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactConfig {
    pub gamma: f64,
    pub sigma_k: f64,
    pub vk: f64,
    pub tauk: f64,
    pub taus: Vec<f64>,
    pub dv_min: f64,
    pub dv_max: f64,
    pub points: usize,
    /// Volume decade used for the fitted apparent exponent.
    pub fit_lo: f64,
    pub fit_hi: f64,
    pub lag_max: f64,
}

impl Default for ImpactConfig {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            sigma_k: 1.0,
            vk: 1.0,
            tauk: 1.0,
            taus: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
            dv_min: 0.01,
            dv_max: 1e4,
            points: 61,
            fit_lo: 10.0,
            fit_hi: 100.0,
            lag_max: 1e4,
        }
    }
}

/// Angle with an explicit unit suffix: `8deg`, `8°`, `0.14rad`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, deg) = if let Some(v) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
        (v, true)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, false)
    } else {
        return Err(format!("angle {t:?} needs a unit suffix (deg or rad)"));
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("invalid angle {t:?}"))?;
    if !v.is_finite() {
        return Err(format!("angle {t:?} is not finite"));
    }
    Ok(if deg { v.to_radians() } else { v })
}

/// Non-negative integer count, also written as `1e6`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.trim().parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.trim().parse().map_err(|_| format!("invalid count {s:?}"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15) {
        return Err(format!("count {s:?} must be a non-negative integer"));
    }
    Ok(v as usize)
}

pub fn parse_axis(s: &str) -> Result<MillAxis, String> {
    s.parse::<MillAxis>().map_err(|e| e.to_string())
}

/// Overlays the keys of a JSON object file on `base`; file values win.
pub fn merge_file<T: Serialize + DeserializeOwned>(base: T, path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input { message: format!("cannot read config: {e}"), path: Some(path.into()), line: None })?;
    let file: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Input {
        message: format!("invalid JSON: {e}"),
        path: Some(path.into()),
        line: Some(e.line() as u64),
    })?;
    let serde_json::Value::Object(over) = file else {
        return Err(CliError::Input { message: "config must be a JSON object".into(), path: Some(path.into()), line: None });
    };
    let mut merged = serde_json::to_value(base)?;
    let obj = merged.as_object_mut().expect("configs serialize to objects");
    for (k, v) in over {
        obj.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| CliError::Input {
        message: format!("invalid config: {e}"),
        path: Some(path.into()),
        line: None,
    })
}
