//! Conditional statistics of the response y given the push x.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::spectral::FourierModel;
use super::univariate::two_exponential;
use super::DoubleGaussianParams;
use crate::error::{param, Result};
use crate::numerics::quad::{integrate_to_inf, integrate_with};

/// Below this |alpha1^2 - alpha2^2| the closed forms are replaced by quadrature.
const DEGENERATE: f64 = 1e-6;

/// Closed-form response for widths (a1, a2), cubic coefficient A and correlator eps.
fn response_closed(x: f64, sigma: f64, a1: f64, a2: f64, a: f64, a_over_a2: f64, eps: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let c = SQRT_2 * x.abs() / sigma;
    let e1 = (-c / a1).exp();
    let e2 = if a2 > 0.0 { (-c / a2).exp() } else { 0.0 };
    let d = a1 * a1 - a2 * a2;
    let den = a1 * e1 - a2 * e2;
    let first = -x.signum() * SQRT_2 * sigma * (2.0 * eps * a1 * a1 * a2 * a2 - a) / (d * d) * (e1 - e2) / den;
    let second = x * ((eps * a1 - a / a1) * e1 + (eps * a2 - a_over_a2) * e2) / (d * den);
    first + second
}

/// A / alpha2, finite as alpha2 -> 0.
fn a_over_alpha2(p: &DoubleGaussianParams, a2: f64) -> f64 {
    if a2 > 1e-12 {
        p.response_a() / a2
    } else {
        let f = 2.0 * p.phi();
        (1.0 - p.nu * p.nu).sqrt() * f.cos() * f.sin().signum()
    }
}

/// Mean conditional response <y>_x.
pub fn conditional_response(x: f64, p: &DoubleGaussianParams) -> Result<f64> {
    p.validate()?;
    let (a1, a2) = p.alphas();
    if a1 * a1 - a2 * a2 < DEGENERATE {
        return Ok(FourierModel::from_double_gaussian(p).conditional_stats(x).mean);
    }
    Ok(response_closed(x, p.sigma, a1, a2, p.response_a(), a_over_alpha2(p, a2), p.eps()))
}

/// Response <zbar>_z of the difference zbar = (y - x)/sqrt2 on the total z = (x + y)/sqrt2.
/// Closed form at eps = 0 through the angle theta'; quadrature otherwise.
pub fn rotated_response(z: f64, p: &DoubleGaussianParams) -> Result<f64> {
    p.validate()?;
    let t = p.theta_rotated();
    let (a1, a2) = (t.cos(), t.sin().abs());
    if p.eps() != 0.0 || a1 * a1 - a2 * a2 < DEGENERATE {
        return Ok(FourierModel::from_double_gaussian(p).rotated().conditional_stats(z).mean);
    }
    let a = p.response_a();
    let a_over_a2 = if a2 > 1e-12 {
        a / a2
    } else {
        let f = 2.0 * p.phi();
        (1.0 - p.nu * p.nu).sqrt() * f.sin() * f.cos().signum()
    };
    Ok(-response_closed(z, p.sigma, a1, a2, a, a_over_a2, 0.0))
}

/// Effective-market conditional deviation sigma_x^2 = sigma^2 [1 + nu^2 (sqrt2 |x|/sigma - 1)/2].
pub fn effective_market_sigma(x: f64, sigma: f64, nu: f64) -> f64 {
    sigma * (1.0 + 0.5 * nu * nu * (SQRT_2 * x.abs() / sigma - 1.0)).sqrt()
}

/// Conditional standard deviation sigma_x of y given x.
pub fn conditional_sigma(x: f64, p: &DoubleGaussianParams) -> Result<f64> {
    p.validate()?;
    if p.phi_minus == 0.0 && p.phi_plus == 0.0 {
        return Ok(effective_market_sigma(x, p.sigma, p.nu));
    }
    Ok(FourierModel::from_double_gaussian(p).conditional_stats(x).sigma)
}

/// Skewness rho_x of the conditional response.
pub fn conditional_skewness(x: f64, p: &DoubleGaussianParams) -> Result<f64> {
    p.validate()?;
    Ok(FourierModel::from_double_gaussian(p).conditional_stats(x).skewness)
}

/// Average responses (y_minus, y_plus) after pushes x < -r_c and x > r_c.
pub fn double_dynamics(r_c: f64, p: &DoubleGaussianParams) -> Result<(f64, f64)> {
    p.validate()?;
    if !r_c.is_finite() {
        return Err(param("r_c must be finite"));
    }
    let (a1, a2) = p.alphas();
    let d = a1 * a1 - a2 * a2;
    if p.eps() == 0.0 && r_c >= 0.0 && d >= DEGENERATE {
        let yp = double_dynamics_closed(r_c, p.sigma, a1, a2, p.response_a());
        return Ok((-yp, yp));
    }
    Ok((double_dynamics_quadrature(-r_c, p, false)?, double_dynamics_quadrature(r_c, p, true)?))
}

fn double_dynamics_closed(r: f64, sigma: f64, a1: f64, a2: f64, a: f64) -> f64 {
    let c = SQRT_2 * r / sigma;
    let e1 = (-c / a1).exp();
    let e2 = if a2 > 0.0 { (-c / a2).exp() } else { 0.0 };
    let d = a1 * a1 - a2 * a2;
    let bracket = 2.0 * (a1 * e1 - a2 * e2) / d - c * (e1 + e2) - (a1 * e1 + a2 * e2);
    sigma / (SQRT_2 * d) * a / (a1 * a1 * e1 - a2 * a2 * e2) * bracket
}

/// Average of <y>_x over x beyond the threshold (x > r when above, x < r otherwise).
pub fn double_dynamics_quadrature(r: f64, p: &DoubleGaussianParams, above: bool) -> Result<f64> {
    let (a1, a2) = p.alphas();
    let px = |x: f64| two_exponential(x, p.sigma, a1, a2);
    let s = if above { 1.0 } else { -1.0 };
    let r = s * r;
    // integrate over t = s x > r, splitting at 0 where the response has a kink
    let mut num = 0.0;
    let mut den = 0.0;
    let mut pieces = vec![r];
    if r < 0.0 {
        pieces.push(0.0);
    }
    for (i, &lo) in pieces.iter().enumerate() {
        let hi = pieces.get(i + 1).copied();
        let f = |t: f64| conditional_response(s * t, p).unwrap_or(f64::NAN) * px(t);
        let g = |t: f64| px(t);
        match hi {
            Some(h) => {
                num += integrate_with(f, lo, h, 1e-14, 1e-11).value;
                den += integrate_with(g, lo, h, 1e-14, 1e-11).value;
            }
            None => {
                num += integrate_to_inf(f, lo, 1e-14, 1e-11).value;
                den += integrate_to_inf(g, lo, 1e-14, 1e-11).value;
            }
        }
    }
    if !(den > 0.0) {
        return Err(param("threshold leaves no probability mass"));
    }
    Ok(num / den)
}

/// Constants of the two-state sign model; both of order one and not derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateConfig {
    pub c1: f64,
    pub c2: f64,
}

impl Default for TwoStateConfig {
    fn default() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }
}

/// Sign probabilities p_+, p_{++}, p_{--} of the two-state model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateProbabilities {
    pub p_plus: f64,
    pub p_plus_plus: f64,
    pub p_minus_minus: f64,
}

pub fn two_state_probabilities(p: &DoubleGaussianParams, cfg: &TwoStateConfig) -> TwoStateProbabilities {
    let phi = p.phi();
    TwoStateProbabilities {
        p_plus: 0.5 + cfg.c1 * p.zeta,
        p_plus_plus: 0.5 + cfg.c1 * p.zeta + cfg.c2 * phi,
        p_minus_minus: 0.5 - cfg.c1 * p.zeta + cfg.c2 * phi,
    }
}
