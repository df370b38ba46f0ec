//! Multifractal price and volume series driven by a ladder of Langevin
//! log-volatility modes with relaxation times tau_p = tau0 e^{-kappa p}.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CascadeParams, MAX_GENERATIONS};
use crate::error::{param, Result};
use crate::stochastic::{gauge_rotate, GaugeVector, MarkovNoise, RngHandle, NOISE_WARMUP};

/// Simulated increments on the grid t = i tauk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSeries {
    pub dt: f64,
    pub price_increments: Vec<f64>,
    pub volume_increments: Vec<f64>,
    /// Total log-volatility omega(t) = sum_p omega_p(t).
    pub volatility_log: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    /// Leading values produced while the noise normalization warms up.
    pub warmup: usize,
}

impl MarketSeries {
    pub fn len(&self) -> usize {
        self.price_increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price_increments.is_empty()
    }

    /// Cumulative price path starting at zero.
    pub fn price_path(&self) -> Vec<f64> {
        let mut p = 0.0;
        std::iter::once(0.0)
            .chain(self.price_increments.iter().map(|d| {
                p += d;
                p
            }))
            .collect()
    }
}

/// Exact Ornstein-Uhlenbeck ladder x_p relaxing to `mean` with stationary variance `var`.
#[derive(Debug, Clone)]
struct Ladder {
    mean: f64,
    decay: Vec<f64>,
    kick: Vec<f64>,
    state: Vec<f64>,
}

impl Ladder {
    fn new(taus: &[f64], dt: f64, mean: f64, var: f64, rng: &mut RngHandle) -> Self {
        let decay: Vec<f64> = taus.iter().map(|t| (-dt / t).exp()).collect();
        let kick = decay.iter().map(|a| (var * (1.0 - a * a)).sqrt()).collect();
        let state = taus.iter().map(|_| mean + var.sqrt() * rng.normal()).collect();
        Self { mean, decay, kick, state }
    }

    fn sum(&self) -> f64 {
        self.state.iter().sum()
    }

    fn step(&mut self, rng: &mut RngHandle) {
        for ((x, a), b) in self.state.iter_mut().zip(&self.decay).zip(&self.kick) {
            *x = self.mean + (*x - self.mean) * a + b * rng.normal();
        }
    }
}

/// Block-constant Gaussian levels whose aggregate over aligned windows of
/// m = (f-1)^j steps has variance L (m tauk/tau0)^{1 + lambda0_sq}.
#[derive(Debug, Clone)]
struct Trend {
    blocks: Vec<u64>,
    sd: Vec<f64>,
    value: Vec<f64>,
}

impl Trend {
    fn new(p: &CascadeParams, k: usize) -> Option<Self> {
        if p.l <= 0.0 {
            return None;
        }
        let b = (p.f - 1) as f64;
        let beta = 1.0 + p.lambda0_sq;
        let kk = 1.0 / (1.0 - b.powf(beta - 2.0)) + b.powf(1.0 - beta) / (1.0 - b.powf(1.0 - beta));
        let per_step = p.l * (p.tauk / p.tau0_effective()).powf(beta);
        let c = per_step / kk;
        let mut blocks = Vec::with_capacity(k + 1);
        let mut sd = Vec::with_capacity(k + 1);
        for lvl in 0..=k {
            let m = b.powi((k - lvl) as i32);
            let var = if lvl == 0 {
                c * m.powf(beta - 2.0) / (1.0 - b.powf(beta - 2.0))
            } else if lvl == k {
                c / (1.0 - b.powf(1.0 - beta))
            } else {
                c * m.powf(beta - 2.0)
            };
            blocks.push(m as u64);
            sd.push(var.sqrt());
        }
        Some(Self { blocks, value: vec![0.0; k + 1], sd })
    }

    fn next(&mut self, t: u64, rng: &mut RngHandle) -> f64 {
        let mut s = 0.0;
        for ((v, &m), sd) in self.value.iter_mut().zip(&self.blocks).zip(&self.sd) {
            if t.is_multiple_of(m) {
                *v = sd * rng.normal();
            }
            s += *v;
        }
        s
    }
}

/// Impulse added to the log-volatility mode `mode` at step `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewsShock {
    pub step: usize,
    pub mode: usize,
    pub size: f64,
}

fn simulate_inner(
    params: &CascadeParams,
    n: usize,
    rng: &mut RngHandle,
    gauge: f64,
    shocks: &[NewsShock],
) -> Result<MarketSeries> {
    params.validate()?;
    let k = params.generations();
    if k > MAX_GENERATIONS {
        return Err(param(format!("{k} generations exceed the limit of {MAX_GENERATIONS}")));
    }
    if n < NOISE_WARMUP + 1 {
        return Err(param(format!("need at least {} steps", NOISE_WARMUP + 1)));
    }
    if let Some(s) = shocks.iter().find(|s| s.mode > k || !s.size.is_finite()) {
        return Err(param(format!("news shock at mode {} is outside 0..={k} or not finite", s.mode)));
    }
    let mut shocks = shocks.to_vec();
    shocks.sort_by_key(|s| s.step);
    let mut next_shock = 0;
    let dt = params.tauk;
    let kappa = params.kappa;
    let taus: Vec<f64> = (0..=k).map(|r| params.tau_r(r)).collect();
    let mut omega = Ladder::new(&taus, dt, -0.5 * kappa, kappa * params.lambda_sq, rng);
    let mut volume = Ladder::new(&taus[1..], dt, 0.5 * kappa, kappa * params.lambda_sq, rng);
    let mut phase =
        (params.gamma > 0.0).then(|| Ladder::new(&taus, dt, 0.0, params.gamma * kappa, rng));
    let mut trend = Trend::new(params, k);
    let mut noise = MarkovNoise::new(params.noise)?;

    // E e^{2 omega} = exp(sum_p (2 mean + 2 var))
    let e2w = ((k + 1) as f64 * (-kappa + 2.0 * kappa * params.lambda_sq)).exp();
    let sigma = (params.diffusion() * dt / e2w).sqrt() * std::f64::consts::SQRT_2;

    let mut out = MarketSeries {
        dt,
        price_increments: Vec::with_capacity(n),
        volume_increments: Vec::with_capacity(n),
        volatility_log: Vec::with_capacity(n),
        seed: rng.seed,
        stream: rng.stream,
        warmup: NOISE_WARMUP,
    };
    for t in 0..n as u64 {
        while next_shock < shocks.len() && shocks[next_shock].step as u64 <= t {
            omega.state[shocks[next_shock].mode] += shocks[next_shock].size;
            next_shock += 1;
        }
        let w = omega.sum();
        let phi = phase.as_ref().map_or(0.0, Ladder::sum);
        let dir = GaugeVector::new(phi.cos(), phi.sin());
        let xi = noise.next(rng, Some(dir));
        let (a, x) = if gauge == 0.0 { (dir, xi) } else { (gauge_rotate(dir, gauge), gauge_rotate(xi, gauge)) };
        let mut dp = sigma * w.exp() * a.dot(&x);
        if let Some(tr) = trend.as_mut() {
            dp += tr.next(t, rng);
        }
        let sign = if phi.cos() >= 0.0 { 1.0 } else { -1.0 };
        out.price_increments.push(dp);
        out.volume_increments.push(params.vk * volume.sum().exp() * sign);
        out.volatility_log.push(w);
        omega.step(rng);
        volume.step(rng);
        if let Some(ph) = phase.as_mut() {
            ph.step(rng);
        }
    }
    Ok(out)
}

/// Simulate n steps of the cascade. Price increments are
/// sqrt2 sigma e^{omega} (a . xi) plus the inherited trend levels when L > 0;
/// volume increments are V_k e^{v} sgn(cos phi) with a ladder v of generations 1..k.
pub fn simulate_mrw(params: &CascadeParams, n: usize, rng: &mut RngHandle) -> Result<MarketSeries> {
    simulate_inner(params, n, rng, 0.0, &[])
}

/// `simulate_mrw` with news impulses injected into the log-volatility modes.
pub fn simulate_mrw_with_news(
    params: &CascadeParams,
    n: usize,
    rng: &mut RngHandle,
    shocks: &[NewsShock],
) -> Result<MarketSeries> {
    simulate_inner(params, n, rng, 0.0, shocks)
}

/// Same as `simulate_mrw` with every amplitude and noise vector rotated by a common phase.
pub fn simulate_mrw_gauged(params: &CascadeParams, n: usize, rng: &mut RngHandle, phase: f64) -> Result<MarketSeries> {
    simulate_inner(params, n, rng, phase, &[])
}

/// Independent replicas on streams 0..replicas, run in parallel.
pub fn simulate_replicas(params: &CascadeParams, n: usize, seed: u64, replicas: usize) -> Result<Vec<MarketSeries>> {
    if replicas == 0 {
        return Err(param("need at least one replica"));
    }
    (0..replicas as u64)
        .into_par_iter()
        .map(|s| simulate_mrw(params, n, &mut RngHandle::new(seed, s)))
        .collect()
}
