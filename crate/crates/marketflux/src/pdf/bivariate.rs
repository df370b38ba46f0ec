//! Bivariate push-response densities: Markovian, Effective market and Double Gaussian.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use super::DoubleGaussianParams;
use crate::error::{param, Result};
use crate::numerics::quad::{oscillatory_integral, Trig};
use crate::numerics::series;
use crate::numerics::special::bessel_k0;

/// Value returned by the Markovian density at the origin, where it diverges logarithmically.
pub const ORIGIN_DENSITY: f64 = 1e300;

/// Tolerance on the truncation bound of the Effective-market series, in units of 1/sigma^2.
pub const SERIES_TOL: f64 = 1e-10;

/// Default truncation of the Effective-market series.
pub const DEFAULT_LMAX: usize = 40;

/// Largest order for which the automatic evaluator keeps the series.
const SERIES_CAP: usize = 200;

/// Markovian density K0(r) / (pi sigma^2 sqrt(1 - eps^2)) with
/// r^2 = 2 (x^2 + y^2 - 2 eps x y) / (sigma^2 (1 - eps^2)).
pub fn markovian_bivariate_pdf(x: f64, y: f64, sigma: f64, eps: f64) -> Result<f64> {
    if !(eps.abs() < 1.0) {
        return Err(param(format!("|eps| must be below 1, got {eps}")));
    }
    if !(sigma > 0.0) {
        return Err(param("sigma must be positive"));
    }
    let q = x * x + y * y - 2.0 * eps * x * y;
    if q <= 0.0 {
        return Ok(ORIGIN_DENSITY);
    }
    let one = 1.0 - eps * eps;
    let r = (2.0 * q / (sigma * sigma * one)).sqrt();
    Ok(bessel_k0(r) / (PI * sigma * sigma * one.sqrt()))
}

/// Effective-market series value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// nu^{2(L+1)} / (1 - nu^2) / sigma^2.
    pub tail_bound: f64,
    /// Set when the tail bound exceeds SERIES_TOL.
    pub truncated: bool,
}

/// Terms P_l(x), l = 0..=lmax, of the Effective-market expansion, up to the sign (-1)^l
/// that cancels in products P_l(x) P_l(y). They are the Taylor coefficients of
/// (1-t)^{-1/2} exp(-c/sqrt(1-t)) / (sqrt2 sigma), c = sqrt2 |x|/sigma.
pub fn effective_market_terms(x: f64, sigma: f64, lmax: usize) -> Vec<f64> {
    let c = SQRT_2 * x.abs() / sigma;
    let w = series::inv_sqrt_one_minus(lmax);
    let mut h: Vec<f64> = w.iter().map(|v| -c * v).collect();
    h[0] = 0.0;
    let e = series::exp(&h);
    let scale = (-c).exp() / (SQRT_2 * sigma);
    series::mul(&w, &e).into_iter().map(|v| v * scale).collect()
}

/// Effective-market density sum_{l <= lmax} nu^{2l} P_l(x) P_l(y).
pub fn effective_market_pdf(x: f64, y: f64, sigma: f64, nu: f64, lmax: usize) -> Result<SeriesValue> {
    if !(sigma > 0.0) {
        return Err(param("sigma must be positive"));
    }
    if !(0.0..1.0).contains(&nu) {
        return Err(param(format!("nu must lie in [0, 1), got {nu}")));
    }
    let value = series_sum(x, y, sigma, nu, lmax);
    let tail_bound = tail_bound(nu, lmax) / (sigma * sigma);
    Ok(SeriesValue { value, tail_bound, truncated: tail_bound > SERIES_TOL })
}

fn series_sum(x: f64, y: f64, sigma: f64, nu: f64, lmax: usize) -> f64 {
    let px = effective_market_terms(x, sigma, lmax);
    let py = effective_market_terms(y, sigma, lmax);
    let n2 = nu * nu;
    let mut w = 1.0;
    let mut s = 0.0;
    for (a, b) in px.iter().zip(&py) {
        s += w * a * b;
        w *= n2;
    }
    s
}

fn tail_bound(nu: f64, lmax: usize) -> f64 {
    let n2 = nu * nu;
    n2.powi(lmax as i32 + 1) / (1.0 - n2)
}

/// Smallest truncation meeting SERIES_TOL.
pub fn required_order(nu: f64) -> usize {
    let mut l = 0;
    while tail_bound(nu, l) > SERIES_TOL && l < 100_000 {
        l += 1;
    }
    l
}

/// Effective-market density by one-dimensional Fourier inversion:
/// P0 = (1/pi) int_0^inf cos(kx) exp(-|y| sqrt(A/B)) / (2 sqrt(AB)) dk,
/// A = 1 + sigma^2 k^2/2, B = (sigma^2/2)(1 + (1-nu^2) sigma^2 k^2/2).
/// The large-k asymptote is subtracted and integrated in closed form.
pub fn effective_market_spectral(x: f64, y: f64, sigma: f64, nu: f64) -> f64 {
    let s2 = sigma * sigma;
    let g = 1.0 - nu * nu;
    let ay = y.abs();
    let r_inf = SQRT_2 / (sigma * g.sqrt());
    let c0 = 1.0 / (sigma * s2 * (0.5 * g).sqrt());
    let m = SQRT_2 / sigma;
    let tail = (-ay * r_inf).exp() * c0;
    let f = |k: f64| {
        let k2 = k * k;
        let a = 1.0 + 0.5 * s2 * k2;
        let b = 0.5 * s2 * (1.0 + 0.5 * g * s2 * k2);
        (-ay * (a / b).sqrt()).exp() / (2.0 * (a * b).sqrt()) - tail / (k2 + m * m)
    };
    let rest = oscillatory_integral(f, x.abs(), Trig::Cos, 1e-14 / s2, 1e-11);
    (rest + tail * PI / (2.0 * m) * (-m * x.abs()).exp()) / PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Evaluation {
    Series(usize),
    Spectral,
}

/// Effective-market density with the evaluation method chosen from nu: the
/// series when SERIES_TOL is met within a modest order, Fourier inversion otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EffectiveMarket {
    pub sigma: f64,
    pub nu: f64,
    pub method: Evaluation,
}

impl EffectiveMarket {
    pub fn new(sigma: f64, nu: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(param("sigma must be positive"));
        }
        if !(0.0..1.0).contains(&nu) {
            return Err(param(format!("nu must lie in [0, 1), got {nu}")));
        }
        let l = required_order(nu);
        let method = if l <= SERIES_CAP { Evaluation::Series(l) } else { Evaluation::Spectral };
        Ok(Self { sigma, nu, method })
    }

    pub fn with_method(mut self, method: Evaluation) -> Self {
        self.method = method;
        self
    }

    /// The density is even in each argument and symmetric under exchange; the
    /// arguments are put in canonical order so these symmetries hold exactly.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let (a, b) = if x.abs() >= y.abs() { (x.abs(), y.abs()) } else { (y.abs(), x.abs()) };
        match self.method {
            Evaluation::Series(l) => series_sum(a, b, self.sigma, self.nu, l),
            Evaluation::Spectral => effective_market_spectral(a, b, self.sigma, self.nu),
        }
    }
}

/// Double Gaussian density evaluator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DoubleGaussian {
    pub params: DoubleGaussianParams,
    pub base: EffectiveMarket,
    cm: f64,
    sm: f64,
    cp: f64,
    sp: f64,
    jac: f64,
}

impl DoubleGaussian {
    pub fn new(p: &DoubleGaussianParams) -> Result<Self> {
        p.validate()?;
        let base = EffectiveMarket::new(p.sigma, p.nu)?;
        let (sm, cm) = p.phi_minus.sin_cos();
        let (sp, cp) = p.phi_plus.sin_cos();
        Ok(Self { params: *p, base, cm, sm, cp, sp, jac: p.eps().cos() })
    }

    /// cos(eps) P0(x cos phi_- - y sin phi_+, y cos phi_+ + x sin phi_-).
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let u = x * self.cm - y * self.sp;
        let v = y * self.cp + x * self.sm;
        self.jac * self.base.density(u, v)
    }

    /// Angles of the lines where the density has kinks (u = 0 and v = 0).
    pub fn kink_angles(&self) -> [f64; 4] {
        let a = self.cm.atan2(self.sp);
        let b = (-self.sm).atan2(self.cp);
        [a, a + PI, b, b + PI]
    }
}

/// Double Gaussian density at a single point.
pub fn double_gaussian_pdf(x: f64, y: f64, p: &DoubleGaussianParams) -> Result<f64> {
    Ok(DoubleGaussian::new(p)?.density(x, y))
}
