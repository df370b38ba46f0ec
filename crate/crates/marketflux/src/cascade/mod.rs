//! Hierarchical cascade of time scales: tree geometry, amplitude recurrence,
//! Langevin volatility modes, volume and impact kernels, jumps and regime switching.

pub mod impact;
pub mod jumps;
pub mod mrw;
pub mod regime;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::stochastic::{NoiseNormalizationConfig, RngHandle};

pub use impact::{apparent_exponent, coarse_impact, impact_price_shift, response_conditioned, response_peak};
pub use jumps::{jump_conditional_probability, jump_pattern, relaxation_h, JumpCondition, JumpKind};
pub use mrw::{simulate_mrw, simulate_mrw_gauged, simulate_mrw_with_news, simulate_replicas, MarketSeries, NewsShock};
pub use regime::{
    fluctuation_corrected_exponent, regime_multi_conditional, regime_switch_stats, virtual_time, Regime, RegimeState,
    RegimeSwitch,
};

/// Largest number of generations the simulator accepts.
pub const MAX_GENERATIONS: usize = 25;

/// Parameters of the hierarchical tree and of its Langevin modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    /// Longest relaxation time.
    pub tau0: f64,
    /// Shortest (trading) time, also the simulation step.
    pub tauk: f64,
    /// Tree functionality: each interval splits into f - 1 children.
    pub f: u32,
    /// ln(f - 1).
    pub kappa: f64,
    /// Amplitude-scaling exponent of the inherited dispersion.
    pub lambda0_sq: f64,
    /// Intermittency: variance of each log-volatility mode is kappa * lambda_sq.
    pub lambda_sq: f64,
    /// Bare diffusion coefficient.
    pub d0: f64,
    /// Crossover constant of the dispersion law.
    pub l: f64,
    /// Transition-matrix amplitude, u^2 = exp(-kappa (1 + lambda0_sq)).
    pub u: f64,
    /// Variance scale of the volume sign phase modes, in units of kappa.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Volume scale at the trading time.
    #[serde(default = "default_vk")]
    pub vk: f64,
    #[serde(default)]
    pub noise: NoiseNormalizationConfig,
}

fn default_gamma() -> f64 {
    0.2
}

fn default_vk() -> f64 {
    1.0
}

impl Default for CascadeParams {
    fn default() -> Self {
        Self::new((1u64 << 20) as f64, 1.0, 3, 0.9, 0.1, 1.0, 0.0).expect("default parameters are valid")
    }
}

impl CascadeParams {
    /// Parameters with kappa and u derived from f and lambda0_sq.
    pub fn new(tau0: f64, tauk: f64, f: u32, lambda0_sq: f64, lambda_sq: f64, d0: f64, l: f64) -> Result<Self> {
        let kappa = ((f.max(2) - 1) as f64).ln();
        let p = Self {
            tau0,
            tauk,
            f,
            kappa,
            lambda0_sq,
            lambda_sq,
            d0,
            l,
            u: (-0.5 * kappa * (1.0 + lambda0_sq)).exp(),
            gamma: default_gamma(),
            vk: default_vk(),
            noise: NoiseNormalizationConfig::markovian(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Tree with `generations` levels below tau0 = tauk (f - 1)^generations.
    pub fn with_generations(generations: u32, tauk: f64, f: u32, lambda0_sq: f64, lambda_sq: f64) -> Result<Self> {
        let tau0 = tauk * ((f.max(2) - 1) as f64).powi(generations as i32);
        Self::new(tau0, tauk, f, lambda0_sq, lambda_sq, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tauk > 0.0 && self.tau0 > self.tauk && self.tau0.is_finite()) {
            return Err(param("need tau0 > tauk > 0"));
        }
        if self.f < 3 {
            return Err(param(format!("tree functionality must be at least 3, got {}", self.f)));
        }
        let kappa = ((self.f - 1) as f64).ln();
        if (self.kappa - kappa).abs() > 1e-12 * kappa {
            return Err(Error::Config(format!("kappa = {} does not equal ln(f - 1) = {kappa}", self.kappa)));
        }
        if !(self.lambda0_sq > 0.0 && self.lambda0_sq.is_finite()) {
            return Err(param("lambda0_sq must be positive"));
        }
        if self.l > 0.0 && self.lambda0_sq >= 1.0 {
            return Err(param("a positive crossover constant needs lambda0_sq < 1"));
        }
        if !(self.lambda_sq >= 0.0 && self.lambda_sq.is_finite()) {
            return Err(param("lambda_sq must be non-negative"));
        }
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(param("d0 must be positive"));
        }
        if !(self.l >= 0.0 && self.l.is_finite()) {
            return Err(param("l must be non-negative"));
        }
        if !(self.gamma >= 0.0 && self.vk > 0.0) {
            return Err(param("need gamma >= 0 and vk > 0"));
        }
        let u2 = (-self.kappa * (1.0 + self.lambda0_sq)).exp();
        if (self.u * self.u - u2).abs() > 1e-9 * u2 {
            return Err(Error::Config(format!(
                "u^2 = {} is inconsistent with exp(-kappa (1 + lambda0_sq)) = {u2}",
                self.u * self.u
            )));
        }
        self.noise.validate()
    }

    /// Exact (unrounded) number of generations ln(tau0/tauk)/kappa.
    pub fn generations_exact(&self) -> f64 {
        (self.tau0 / self.tauk).ln() / self.kappa
    }

    /// Number of generations, rounded to the nearest integer.
    pub fn generations(&self) -> usize {
        self.generations_exact().round().max(1.0) as usize
    }

    /// tau0 implied by the rounded number of generations.
    pub fn tau0_effective(&self) -> f64 {
        self.tauk * ((self.f - 1) as f64).powi(self.generations() as i32)
    }

    /// Relaxation time of generation r, tau_r = tau0 e^{-kappa r}.
    pub fn tau_r(&self, r: usize) -> f64 {
        self.tau0_effective() * (-self.kappa * r as f64).exp()
    }

    /// Apparent diffusion coefficient D = D0/(1 - exp(-kappa lambda0_sq)).
    pub fn diffusion(&self) -> f64 {
        self.d0 / (1.0 - (-self.kappa * self.lambda0_sq).exp())
    }

    /// Dispersion law D tau + L (tau/tau0)^{1 + lambda0_sq}.
    pub fn dispersion(&self, tau: f64) -> f64 {
        self.diffusion() * tau + self.l * (tau / self.tau0_effective()).powf(1.0 + self.lambda0_sq)
    }

    /// 1/ln(tau0/tau).
    pub fn epsilon(&self, tau: f64) -> f64 {
        1.0 / (self.tau0_effective() / tau).ln()
    }
}

/// Volatility excess D/D0 = 1/(1 - exp(-kappa lambda0_sq)).
pub fn volatility_excess(kappa: f64, lambda0_sq: f64) -> f64 {
    1.0 / (1.0 - (-kappa * lambda0_sq).exp())
}

/// Default shape constant c = lambda^2 (mu + 1)/eps of the volatility distribution.
pub fn default_shape_c(lambda_sq: f64, mu: f64, eps: f64) -> f64 {
    lambda_sq * (mu + 1.0) / eps
}

/// Logarithmic distance between two times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltrametricDistance {
    pub z: f64,
    /// False when |t1 - t2| is below the coarse-graining time and z was set to 0.
    pub resolved: bool,
}

/// z = ln(|t1 - t2|/tau)/kappa in generations of the tree.
pub fn ultrametric_distance(t1: f64, t2: f64, tau: f64, params: &CascadeParams) -> UltrametricDistance {
    let dt = (t1 - t2).abs();
    if dt < tau {
        UltrametricDistance { z: 0.0, resolved: false }
    } else {
        UltrametricDistance { z: (dt / tau).ln() / params.kappa, resolved: true }
    }
}

/// Number of generations up to the common ancestor of leaves i and j of a tree
/// in which every node has `branching` children.
pub fn tree_distance(i: u64, j: u64, branching: u64) -> u32 {
    let (mut a, mut b, mut z) = (i, j, 0);
    while a != b {
        a /= branching;
        b /= branching;
        z += 1;
    }
    z
}

/// Crossover time tau0 (D tau0/L)^{1/lambda0_sq}; infinite when L <= 0.
pub fn crossover_time(params: &CascadeParams) -> f64 {
    if params.l <= 0.0 {
        return f64::INFINITY;
    }
    let tau0 = params.tau0_effective();
    tau0 * (params.diffusion() * tau0 / params.l).powf(1.0 / params.lambda0_sq)
}

/// Shift of ln sigma(tau_x) accompanying a shift of ln tau_x at fixed D.
pub fn sigma_shift_from_crossover(lambda0_sq: f64, d_ln_tau_x: f64) -> f64 {
    -0.25 * lambda0_sq * d_ln_tau_x
}

/// Mean-field amplitude a_r(t) = sum_j u^{r-j} da_j(t) with da_j = +-sqrt(D0 tau_j)
/// renewed at the start of every tau_j block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldAmplitude {
    pub u: f64,
    pub d0: f64,
    pub tau0: f64,
    pub branching: u64,
    /// Rank r of the sampled level; blocks of levels 0..=r are tracked.
    pub levels: usize,
}

impl MeanFieldAmplitude {
    pub fn from_params(p: &CascadeParams) -> Self {
        Self { u: p.u, d0: p.d0, tau0: p.tau0_effective(), branching: (p.f - 1) as u64, levels: p.generations() }
    }

    /// Step of the sampled series, tau_r.
    pub fn step(&self) -> f64 {
        self.tau0 / (self.branching as f64).powi(self.levels as i32)
    }

    pub fn simulate(&self, n: usize, rng: &mut RngHandle) -> Result<Vec<f64>> {
        if self.branching < 2 || self.levels > 60 || !(self.d0 > 0.0 && self.tau0 > 0.0) {
            return Err(param("need branching >= 2, at most 60 levels and positive d0, tau0"));
        }
        let r = self.levels;
        let blocks: Vec<u64> = (0..=r).map(|j| self.branching.saturating_pow((r - j) as u32)).collect();
        let weights: Vec<f64> = (0..=r)
            .map(|j| {
                let tau_j = self.tau0 / (self.branching as f64).powi(j as i32);
                self.u.powi((r - j) as i32) * (self.d0 * tau_j).sqrt()
            })
            .collect();
        let mut signs = vec![0.0; r + 1];
        let mut out = Vec::with_capacity(n);
        for t in 0..n as u64 {
            let mut a = 0.0;
            for j in 0..=r {
                if t % blocks[j] == 0 {
                    signs[j] = rng.sign();
                }
                a += weights[j] * signs[j];
            }
            out.push(a);
        }
        Ok(out)
    }
}

/// Mean-field amplitude series at the finest level of the tree.
pub fn simulate_amplitude_meanfield(params: &CascadeParams, n: usize, rng: &mut RngHandle) -> Result<Vec<f64>> {
    params.validate()?;
    MeanFieldAmplitude::from_params(params).simulate(n, rng)
}
