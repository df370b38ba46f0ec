use marketflux::estimators::fit::log_spaced;
use marketflux::estimators::scaling::{dispersion_curve, fit_dispersion};
use marketflux::estimators::tail::MIN_TAIL_ORDER;
use marketflux::estimators::volatility::LogNormalCore;
use marketflux::estimators::{
    generalized_hurst, hill_tail, volatility_distribution, volume_closure, DispersionFit, TailFit, VolatilityDistFit,
    VolatilityDistribution, VolumeClosure,
};
use serde::Serialize;

use crate::config::EstimateConfig;
use crate::error::{CliError, CliResult};
use crate::ingest::ingest;
use crate::output::{file_artifact, Artifact, OutputDir};

/// Outcome of one estimator; failures are reported instead of aborting the run.
#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum Section<T> {
    Ok { result: T },
    Error { message: String },
    Skipped { reason: String },
}

impl<T> From<marketflux::Result<T>> for Section<T> {
    fn from(r: marketflux::Result<T>) -> Self {
        match r {
            Ok(result) => Section::Ok { result },
            Err(e) => Section::Error { message: e.to_string() },
        }
    }
}

#[derive(Serialize)]
struct VolatilityReport {
    fit: VolatilityDistFit,
    converged: bool,
    reduced_chi_square: f64,
    core: Option<LogNormalCore>,
}

#[derive(Serialize)]
struct DispersionReport {
    d: f64,
    l: f64,
    lambda0_sq: f64,
    tau_x: Option<f64>,
    h_small: f64,
    h_large: f64,
    converged: bool,
}

#[derive(Serialize)]
struct Report {
    samples: usize,
    aggregate: usize,
    dt: f64,
    tail: Section<TailFit>,
    dispersion: Section<DispersionReport>,
    volatility: Section<VolatilityReport>,
    hurst: Section<Vec<(f64, f64)>>,
    volume: Section<VolumeClosure>,
}

fn dispersion_report(f: DispersionFit) -> DispersionReport {
    DispersionReport {
        d: f.d,
        l: f.l,
        lambda0_sq: f.lambda0_sq,
        tau_x: super::finite_or_none(f.tau_x),
        h_small: f.h_small,
        h_large: f.h_large,
        converged: f.converged,
    }
}

pub fn run(c: &EstimateConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if !(c.tail_fraction > 0.0 && c.tail_fraction < 1.0) || c.per_decade == 0 || c.window == 0 || !(c.q > 0.0) {
        return Err(CliError::input("need 0 < tail_fraction < 1, per_decade > 0, window > 0 and q > 0"));
    }
    let input = file_artifact(&c.input).map_err(|_| CliError::Input {
        message: "cannot read input series".into(),
        path: Some(c.input.clone()),
        line: None,
    })?;
    let s = ingest(&c.input)?.aggregate(c.aggregate)?;
    if s.len() < 2 {
        return Err(CliError::input("series needs at least two increments after aggregation"));
    }
    let n = s.len();
    let span = s.t[n - 1] - s.t[0];
    let dt = if span > 0.0 { span / (n - 1) as f64 } else { 1.0 };
    let x = &s.value;

    let k = ((n as f64 * c.tail_fraction).round() as usize).max(MIN_TAIL_ORDER);
    let tail = hill_tail(x, k).into();

    let taus = log_spaced(1, (n / 10).max(1), c.per_decade);
    let curve = dispersion_curve(&[x.as_slice()], dt, &taus);
    out.write_csv("dispersion.csv", &["tau", "variance", "windows"], curve.iter().map(|p| vec![p.tau, p.variance, p.windows as f64]))?;
    let tau0 = c.tau0.unwrap_or(n as f64 * dt);
    let dispersion = fit_dispersion(&curve, tau0).map(dispersion_report).into();

    let vol: Section<VolatilityDistribution> = volatility_distribution(x, c.window, c.q).into();
    let volatility = match vol {
        Section::Ok { result } => {
            let f = result.fit;
            let rows = result.histogram.iter().map(|b| {
                let expected = (f.cdf(b.hi) - f.cdf(b.lo)) / (b.hi - b.lo);
                vec![b.lo, b.hi, b.count as f64, b.density, expected]
            });
            out.write_csv("volatility.csv", &["lo", "hi", "count", "density", "fitted"], rows.collect::<Vec<_>>())?;
            Section::Ok {
                result: VolatilityReport {
                    fit: f,
                    converged: result.converged,
                    reduced_chi_square: result.reduced_chi_square,
                    core: result.core,
                },
            }
        }
        Section::Error { message } => Section::Error { message },
        Section::Skipped { reason } => Section::Skipped { reason },
    };

    let hurst = generalized_hurst(&[x.as_slice()], &c.hurst_q, &taus).into();

    let volume = match (c.generations, &s.volume) {
        (Some(g), Some(v)) => volume_closure(&[v.as_slice()], g, c.vk).into(),
        (None, _) => Section::Skipped { reason: "generations not given".into() },
        (_, None) => Section::Skipped { reason: "series has no volume column".into() },
    };

    let report = Report { samples: n, aggregate: c.aggregate, dt, tail, dispersion, volatility, hurst, volume };
    out.write_json("report.json", &report)?;
    Ok(vec![input])
}
