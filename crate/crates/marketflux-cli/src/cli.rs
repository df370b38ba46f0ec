//! Argument parsing and the translation of flags into run configurations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use marketflux::pdf::MillAxis;

use crate::config::{
    merge_file, parse_angle, parse_axis, parse_count, CoalesceConfig, EstimateConfig, ImpactConfig, MillConfig,
    PdfConfig, PdfModel, RunConfig, SimulateConfig,
};
use crate::error::{CliError, CliResult};
use crate::output::{Manifest, MANIFEST_NAME, OUT_ENV};

/// Output directory used when neither --out nor the environment names one.
pub const DEFAULT_OUT: &str = "marketflux-out";

#[derive(Debug, Parser)]
#[command(name = "marketflux", version, about = "Simulate, fit and tabulate market fluctuation models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $MARKETFLUX_OUT or ./marketflux-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the volatility cascade and write price and volume increments.
    Simulate(SimulateArgs),
    /// Tabulate a return density and check its normalization.
    Pdf(PdfArgs),
    /// Antisymmetric part of the double-Gaussian density and its blades.
    Mill(MillArgs),
    /// Evolve the firm-size distribution.
    Coalesce(CoalesceArgs),
    /// Fit tail, scaling and volatility laws to a series file.
    Estimate(EstimateArgs),
    /// Price response to volume and its apparent exponent.
    Impact(ImpactArgs),
    /// Re-run the configuration stored in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub tauk: Option<f64>,
    #[arg(long)]
    pub branches: Option<u32>,
    #[arg(long)]
    pub lambda0_sq: Option<f64>,
    #[arg(long)]
    pub lambda_sq: Option<f64>,
    #[arg(long)]
    pub d0: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub vk: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub replicas: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[arg(long, value_enum)]
    pub model: Option<PdfModel>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Angle with unit, e.g. 8deg or 0.14rad.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_minus: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_plus: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MillArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_minus: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi_plus: Option<f64>,
    /// horizontal or diagonal.
    #[arg(long, value_parser = parse_axis)]
    pub axis: Option<MillAxis>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CoalesceArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub u_star: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// CSV with columns t, value and optionally volume.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_count)]
    pub aggregate: Option<usize>,
    #[arg(long)]
    pub tail_fraction: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub per_decade: Option<usize>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub window: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub hurst_q: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_count)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub vk: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ImpactArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub sigma_k: Option<f64>,
    #[arg(long)]
    pub vk: Option<f64>,
    #[arg(long)]
    pub tauk: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub dv_min: Option<f64>,
    #[arg(long)]
    pub dv_max: Option<f64>,
    #[arg(long, value_parser = parse_count)]
    pub points: Option<usize>,
    #[arg(long)]
    pub fit_lo: Option<f64>,
    #[arg(long)]
    pub fit_hi: Option<f64>,
    #[arg(long)]
    pub lag_max: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest of an earlier run, or the directory holding it.
    pub manifest: PathBuf,
    /// Fail unless every artifact reproduces its recorded checksum.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: Common,
}

macro_rules! overlay {
    ($cfg:ident, $args:ident, $($f:ident),+) => {
        $(if let Some(v) = $args.$f.clone() { $cfg.$f = v; })+
    };
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    Run { config: RunConfig, out: PathBuf },
    Replay { manifest: Manifest, source: PathBuf, out: PathBuf, verify: bool },
}

/// Output directory from the flag, then the environment, then the default.
pub fn resolve_out(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    }
}

fn finish<T>(cfg: T, common: &Common, wrap: fn(T) -> RunConfig) -> CliResult<Plan>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let cfg = match &common.config {
        Some(path) => merge_file(cfg, path)?,
        None => cfg,
    };
    Ok(Plan::Run { config: wrap(cfg), out: resolve_out(common.out.as_deref()) })
}

impl Command {
    pub fn plan(&self) -> CliResult<Plan> {
        match self {
            Command::Simulate(a) => {
                let mut c = SimulateConfig::default();
                overlay!(c, a, tau0, tauk, branches, lambda0_sq, lambda_sq, d0, l, gamma, vk, steps, seed, replicas);
                finish(c, &a.common, RunConfig::Simulate)
            }
            Command::Pdf(a) => {
                let mut c = PdfConfig::default();
                overlay!(c, a, model, sigma, nu, phi_minus, phi_plus, alpha, zeta, eps, x_max, points);
                finish(c, &a.common, RunConfig::Pdf)
            }
            Command::Mill(a) => {
                let mut c = MillConfig::default();
                overlay!(c, a, sigma, nu, phi_minus, phi_plus, axis, extent, points);
                finish(c, &a.common, RunConfig::Mill)
            }
            Command::Coalesce(a) => {
                let mut c = CoalesceConfig::default();
                overlay!(c, a, beta, m, q, p, q0, u_star, t0, t_end, points);
                finish(c, &a.common, RunConfig::Coalesce)
            }
            Command::Estimate(a) => {
                let mut c = EstimateConfig::default();
                overlay!(c, a, input, aggregate, tail_fraction, per_decade, window, q, hurst_q, vk);
                c.tau0 = a.tau0.or(c.tau0);
                c.generations = a.generations.or(c.generations);
                let plan = finish(c, &a.common, RunConfig::Estimate)?;
                if let Plan::Run { config: RunConfig::Estimate(c), .. } = &plan {
                    if c.input.as_os_str().is_empty() {
                        return Err(CliError::input("estimate needs --input or an input key in --config"));
                    }
                }
                Ok(plan)
            }
            Command::Impact(a) => {
                let mut c = ImpactConfig::default();
                overlay!(c, a, gamma, sigma_k, vk, tauk, taus, dv_min, dv_max, points, fit_lo, fit_hi, lag_max);
                finish(c, &a.common, RunConfig::Impact)
            }
            Command::Replay(a) => {
                if a.common.config.is_some() {
                    return Err(CliError::input("replay takes its configuration from the manifest"));
                }
                let source = if a.manifest.is_dir() { a.manifest.join(MANIFEST_NAME) } else { a.manifest.clone() };
                let manifest = Manifest::read(&source)?;
                Ok(Plan::Replay { manifest, source, out: resolve_out(a.common.out.as_deref()), verify: a.verify })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(args: &[&str]) -> CliResult<Plan> {
        Cli::try_parse_from(args).unwrap().command.plan()
    }

    #[test]
    fn flags_override_defaults() {
        let Plan::Run { config: RunConfig::Simulate(c), out } =
            plan(&["marketflux", "simulate", "--steps", "2e3", "--seed", "9", "--out", "x"]).unwrap()
        else {
            panic!()
        };
        assert_eq!((c.steps, c.seed, c.branches), (2000, 9, 3));
        assert_eq!(out, PathBuf::from("x"));
    }

    #[test]
    fn angles_in_degrees() {
        let Plan::Run { config: RunConfig::Pdf(c), .. } =
            plan(&["marketflux", "pdf", "--phi-minus", "8deg", "--phi-plus", "-0.1rad"]).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.phi_minus, 8f64.to_radians());
        assert_eq!(c.phi_plus, -0.1);
        assert!(Cli::try_parse_from(["marketflux", "pdf", "--phi-minus", "8"]).is_err());
    }

    #[test]
    fn estimate_requires_input() {
        assert_eq!(plan(&["marketflux", "estimate"]).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn lists_split_on_commas() {
        let Plan::Run { config: RunConfig::Impact(c), .. } = plan(&["marketflux", "impact", "--taus", "1,10"]).unwrap() else {
            panic!()
        };
        assert_eq!(c.taus, vec![1.0, 10.0]);
    }
}
