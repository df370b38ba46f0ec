//! Two-component random vectors, seeded streams and the normalized Markov noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A vector in the plane, written as a complex number re + i im.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaugeVector {
    pub re: f64,
    pub im: f64,
}

impl GaugeVector {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Real scalar product re*re' + im*im'.
    pub fn dot(&self, other: &GaugeVector) -> f64 {
        self.re * other.re + self.im * other.im
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    pub fn add(&self, other: &GaugeVector) -> Self {
        Self::new(self.re + other.re, self.im + other.im)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Multiply `v` by e^{i phi}.
pub fn gauge_rotate(v: GaugeVector, phi: f64) -> GaugeVector {
    let (s, c) = phi.sin_cos();
    GaugeVector::new(v.re * c - v.im * s, v.re * s + v.im * c)
}

/// Real scalar product of two vectors; invariant under a common rotation.
pub fn scalar_product(a: &GaugeVector, b: &GaugeVector) -> f64 {
    a.dot(b)
}

/// A deterministic random stream identified by (seed, stream id).
#[derive(Debug, Clone)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn sign(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Gaussian vector with independent components of variance sigma^2/2.
pub fn sample_gaussian_vector(rng: &mut RngHandle, sigma: f64) -> Result<GaugeVector> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(param(format!("sigma must be positive, got {sigma}")));
    }
    let s = sigma * std::f64::consts::FRAC_1_SQRT_2;
    Ok(GaugeVector::new(s * rng.normal(), s * rng.normal()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    Markovian,
    Uncorrelated,
}

/// Weights of the lagged terms entering the noise normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseNormalizationConfig {
    pub w1: f64,
    pub w2: f64,
    pub mode: NoiseMode,
}

impl Default for NoiseNormalizationConfig {
    fn default() -> Self {
        Self::markovian()
    }
}

impl NoiseNormalizationConfig {
    pub fn markovian() -> Self {
        Self { w1: 0.5, w2: 0.5, mode: NoiseMode::Markovian }
    }

    pub fn uncorrelated() -> Self {
        Self { w1: 1.0, w2: 0.0, mode: NoiseMode::Uncorrelated }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w1 >= 0.0 && self.w2 >= 0.0) {
            return Err(param("noise weights must be non-negative"));
        }
        match self.mode {
            NoiseMode::Markovian => {
                if (self.w1 + self.w2 - 1.0).abs() > 1e-12 || self.w2 == 0.0 || self.w1 == 0.0 {
                    return Err(param("markovian mode needs w1 + w2 = 1 with both weights positive"));
                }
            }
            NoiseMode::Uncorrelated => {
                if self.w2 != 0.0 || self.w1 == 0.0 {
                    return Err(param("uncorrelated mode needs w2 = 0 and w1 > 0"));
                }
            }
        }
        Ok(())
    }

    /// Scale c in sigma0^2 = c (w1 |xi0|^2 + w2 xi0'^2). Markovian mode fixes
    /// E[1/sigma0^2] = 1, which gives E|xi|^2 = 1; with w2 = 0 that mean
    /// diverges and the scale is 1/w1.
    pub fn scale(&self) -> f64 {
        match self.mode {
            NoiseMode::Uncorrelated => 1.0 / self.w1,
            NoiseMode::Markovian => {
                // E[1/X] = int_0^inf (1 + w1 s)^{-1} (1 + w2 s)^{-1/2} ds with u^2 = 1 + w2 s
                let (w1, d) = (self.w1, self.w2 - self.w1);
                if d.abs() < 1e-14 {
                    2.0 / w1
                } else if d > 0.0 {
                    2.0 / (w1 * d).sqrt() * (std::f64::consts::FRAC_PI_2 - (w1 / d).sqrt().atan())
                } else {
                    let (a, b) = (w1.sqrt(), (-d).sqrt());
                    ((a + b) / (a - b)).ln() / (a * b)
                }
            }
        }
    }
}

/// Output of the normalized noise generator; the first `warmup` entries use sigma0 = 1.
#[derive(Debug, Clone)]
pub struct NoiseSeries {
    pub values: Vec<GaugeVector>,
    pub warmup: usize,
}

impl NoiseSeries {
    pub fn steady(&self) -> &[GaugeVector] {
        &self.values[self.warmup..]
    }
}

pub const NOISE_WARMUP: usize = 2;
const SIGMA0_FLOOR: f64 = 1e-12;

/// Streaming generator of xi(t) = xi0(t)/sigma0(t).
#[derive(Debug, Clone)]
pub struct MarkovNoise {
    cfg: NoiseNormalizationConfig,
    c: f64,
    prev_sq: f64,
    prev_proj: f64,
    prev2_proj: f64,
    steps: usize,
}

impl MarkovNoise {
    pub fn new(cfg: NoiseNormalizationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, c: cfg.scale(), prev_sq: 0.0, prev_proj: 0.0, prev2_proj: 0.0, steps: 0 })
    }

    pub fn config(&self) -> &NoiseNormalizationConfig {
        &self.cfg
    }

    pub fn in_warmup(&self) -> bool {
        self.steps < NOISE_WARMUP
    }

    /// Next normalized noise value. `direction` is the unit amplitude direction
    /// used to project xi0 for the second lag; `None` means the real axis.
    pub fn next(&mut self, rng: &mut RngHandle, direction: Option<GaugeVector>) -> GaugeVector {
        let xi0 = GaugeVector::new(
            std::f64::consts::FRAC_1_SQRT_2 * rng.normal(),
            std::f64::consts::FRAC_1_SQRT_2 * rng.normal(),
        );
        let sigma0 = if self.steps < NOISE_WARMUP {
            1.0
        } else {
            let s2 = self.c * (self.cfg.w1 * self.prev_sq + self.cfg.w2 * self.prev2_proj * self.prev2_proj);
            s2.sqrt().max(SIGMA0_FLOOR)
        };
        let proj = match direction {
            Some(d) => {
                let m = d.modulus();
                if m > 0.0 {
                    xi0.dot(&d) / m
                } else {
                    xi0.re
                }
            }
            None => xi0.re,
        };
        self.prev2_proj = self.prev_proj;
        self.prev_proj = proj;
        self.prev_sq = xi0.norm_sqr();
        self.steps += 1;
        xi0.scale(1.0 / sigma0)
    }
}

/// Generate `n` normalized noise vectors; the first two are warm-up values.
pub fn normalized_markov_noise(rng: &mut RngHandle, cfg: NoiseNormalizationConfig, n: usize) -> Result<NoiseSeries> {
    if n < 3 {
        return Err(param(format!("need at least 3 intervals, got {n}")));
    }
    let mut gen = MarkovNoise::new(cfg)?;
    let values = (0..n).map(|_| gen.next(rng, None)).collect();
    Ok(NoiseSeries { values, warmup: NOISE_WARMUP })
}

/// Planar density of the normalized noise, (3/pi)(1 + 2 xi^2)^{-5/2}, as a function of |xi|.
pub fn student_noise_pdf(xi: f64) -> f64 {
    3.0 / std::f64::consts::PI * (1.0 + 2.0 * xi * xi).powf(-2.5)
}

/// Density of a single component of the planar noise, (2 sqrt2/pi)(1 + 2 x^2)^{-2}.
pub fn student_noise_component_pdf(x: f64) -> f64 {
    let d = 1.0 + 2.0 * x * x;
    2.0 * std::f64::consts::SQRT_2 / std::f64::consts::PI / (d * d)
}
