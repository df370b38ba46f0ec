//! One-point densities: tent, asymmetric tent, fat tail and the Double Gaussian marginal.

use std::f64::consts::{PI, SQRT_2};

use super::{AsymTentParams, DoubleGaussianParams};
use crate::error::{param, Result};
use crate::numerics::special::gauss_moment3;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(param(format!("sigma must be positive, got {sigma}")))
    }
}

/// Tent law exp(-sqrt2 |x|/sigma) / (sqrt2 sigma) with unit mass and variance sigma^2.
pub fn tent_pdf(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(tent(x, sigma))
}

pub(crate) fn tent(x: f64, sigma: f64) -> f64 {
    (-SQRT_2 * x.abs() / sigma).exp() / (SQRT_2 * sigma)
}

/// Piecewise exponential with widths sigma_+ for x > 0 and sigma_- for x < 0.
pub fn asym_tent_pdf(x: f64, p: &AsymTentParams) -> Result<f64> {
    let p = AsymTentParams::new(p.alpha, p.zeta)?;
    let norm = 1.0 / (p.alpha * (2.0 * (1.0 + p.zeta * p.zeta)).sqrt());
    let v = if x >= 0.0 { (-SQRT_2 * x / p.sigma_plus()).exp() } else { (SQRT_2 * x / p.sigma_minus()).exp() };
    Ok(norm * v)
}

/// Fat-tail law (6/(sqrt(pi) sigma)) e^{z^2/4} D_{-4}(z), z = sqrt2 |x|/sigma,
/// evaluated as I3(z)/(sqrt(pi) sigma) with I3 the Gaussian third moment.
pub fn fat_tail_pdf(x: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(fat_tail(x, sigma))
}

pub(crate) fn fat_tail(x: f64, sigma: f64) -> f64 {
    gauss_moment3(SQRT_2 * x.abs() / sigma) / (PI.sqrt() * sigma)
}

/// Asymmetric fat tail: sigma_+ P(x|sigma_+) for x > 0 and sigma_- P(x|sigma_-) for x < 0,
/// divided by alpha sqrt(1 + zeta^2).
pub fn asym_fat_tail_pdf(x: f64, p: &AsymTentParams) -> Result<f64> {
    let p = AsymTentParams::new(p.alpha, p.zeta)?;
    let s = if x >= 0.0 { p.sigma_plus() } else { p.sigma_minus() };
    Ok(s * fat_tail(x, s) / (p.alpha * (1.0 + p.zeta * p.zeta).sqrt()))
}

/// Marginal of the Double Gaussian model.
pub fn univariate_pdf(x: f64, p: &DoubleGaussianParams) -> Result<f64> {
    p.validate()?;
    let (a1, a2) = p.alphas();
    Ok(two_exponential(x, p.sigma, a1, a2))
}

/// Marginal for a given angle theta, as used for benchmark fits.
pub fn univariate_pdf_theta(x: f64, sigma: f64, theta: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(param("theta must lie in [0, pi/2]"));
    }
    let (a1, a2) = (theta.cos().max(theta.sin()), theta.cos().min(theta.sin()));
    Ok(two_exponential(x, sigma, a1, a2))
}

/// [a1 e1 - a2 e2] / (sqrt2 sigma (a1^2 - a2^2)), e_i = exp(-sqrt2 |x|/(a_i sigma)),
/// with the a1 = a2 limit taken analytically.
pub(crate) fn two_exponential(x: f64, sigma: f64, a1: f64, a2: f64) -> f64 {
    let c = SQRT_2 * x.abs() / sigma;
    let d = a1 * a1 - a2 * a2;
    if d.abs() < 1e-7 {
        let a = 0.5 * (a1 + a2);
        return (-c / a).exp() * (1.0 + c / a) / (2.0 * a * SQRT_2 * sigma);
    }
    let e = |a: f64| if a > 0.0 { (-c / a).exp() } else { 0.0 };
    (a1 * e(a1) - a2 * e(a2)) / (SQRT_2 * sigma * d)
}
