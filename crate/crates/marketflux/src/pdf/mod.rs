//! Probability densities of growth rates and price increments: univariate
//! tent and fat-tail laws, the bivariate Markovian, Effective-market and
//! Double Gaussian models, conditional statistics and mill patterns.

pub mod bivariate;
pub mod conditional;
pub mod mill;
pub mod sample;
pub mod spectral;
pub mod univariate;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub use bivariate::{double_gaussian_pdf, effective_market_pdf, markovian_bivariate_pdf, EffectiveMarket, SeriesValue};
pub use conditional::{
    conditional_response, conditional_sigma, conditional_skewness, double_dynamics, rotated_response,
};
pub use mill::{mill_asymmetry_grid, BladeReport, MillAxis};
pub use spectral::FourierModel;
pub use univariate::{asym_fat_tail_pdf, asym_tent_pdf, fat_tail_pdf, tent_pdf, univariate_pdf};

/// Parameters of the Double Gaussian push-response model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleGaussianParams {
    pub sigma: f64,
    pub nu: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    #[serde(default)]
    pub zeta: f64,
}

impl DoubleGaussianParams {
    pub fn new(sigma: f64, nu: f64, phi_minus: f64, phi_plus: f64) -> Result<Self> {
        let p = Self { sigma, nu, phi_minus, phi_plus, zeta: 0.0 };
        p.validate()?;
        Ok(p)
    }

    /// Angles given in degrees.
    pub fn from_degrees(sigma: f64, nu: f64, phi_minus_deg: f64, phi_plus_deg: f64) -> Result<Self> {
        Self::new(sigma, nu, phi_minus_deg.to_radians(), phi_plus_deg.to_radians())
    }

    /// Parameters with a common angle phi and price correlator eps.
    pub fn from_phi_eps(sigma: f64, nu: f64, phi: f64, eps: f64) -> Result<Self> {
        let c = phi.cos();
        let s = phi.sin();
        Self::new(sigma, nu, phi - eps * c * c, phi + eps * s * s)
    }

    /// Parameters at eps = 0 whose one-point angle is theta.
    pub fn from_theta(sigma: f64, nu: f64, theta: f64) -> Result<Self> {
        let s = (2.0 * theta).sin() / (1.0 - nu * nu).sqrt();
        if !(s.abs() <= 1.0) {
            return Err(param(format!("theta = {theta} is out of reach for nu = {nu}")));
        }
        let phi = 0.5 * s.asin();
        Self::new(sigma, nu, phi, phi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(param(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.nu >= 0.0 && self.nu < 1.0) {
            return Err(param(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.phi_minus.is_finite() && self.phi_plus.is_finite()) {
            return Err(param("angles must be finite"));
        }
        if !(self.zeta >= 0.0) {
            return Err(param("zeta must be non-negative"));
        }
        if self.eps().abs() >= 1.0 {
            return Err(param("|phi_plus - phi_minus| must be below 1"));
        }
        Ok(())
    }

    /// Correlator of neighbouring increments in units of sigma^2.
    pub fn eps(&self) -> f64 {
        self.phi_plus - self.phi_minus
    }

    /// True when eps exceeds the small-parameter range of the model.
    pub fn eps_warning(&self) -> bool {
        self.eps().abs() > 0.2
    }

    /// Common angle phi solving phi = phi_minus + eps cos^2 phi.
    pub fn phi(&self) -> f64 {
        let e = self.eps();
        let mut phi = self.phi_minus;
        for _ in 0..200 {
            let next = self.phi_minus + e * phi.cos().powi(2);
            if (next - phi).abs() < 1e-16 {
                return next;
            }
            phi = next;
        }
        phi
    }

    /// Angle theta with sin(2 theta) = sqrt(1 - nu^2) sin(2 phi).
    pub fn theta(&self) -> f64 {
        0.5 * ((1.0 - self.nu * self.nu).sqrt() * (2.0 * self.phi()).sin()).asin()
    }

    /// Angle theta' of the pi/4-rotated plane, sin(2 theta') = sqrt(1 - nu^2) cos(2 phi).
    pub fn theta_rotated(&self) -> f64 {
        0.5 * ((1.0 - self.nu * self.nu).sqrt() * (2.0 * self.phi()).cos()).asin()
    }

    /// Width factors (alpha1, alpha2) = (cos theta, |sin theta|).
    pub fn alphas(&self) -> (f64, f64) {
        let t = self.theta();
        (t.cos(), t.sin().abs())
    }

    /// Cubic response coefficient A = (1 - nu^2) sin(2 phi) cos(2 phi) / 2.
    pub fn response_a(&self) -> f64 {
        let f = 2.0 * self.phi();
        0.5 * (1.0 - self.nu * self.nu) * f.sin() * f.cos()
    }
}

/// Parameters of the asymmetric tent law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymTentParams {
    pub alpha: f64,
    pub zeta: f64,
}

impl AsymTentParams {
    pub fn new(alpha: f64, zeta: f64) -> Result<Self> {
        if !(alpha > 0.0 && zeta >= 0.0 && alpha.is_finite() && zeta.is_finite()) {
            return Err(param("need alpha > 0 and zeta >= 0"));
        }
        Ok(Self { alpha, zeta })
    }

    pub fn sigma_plus(&self) -> f64 {
        self.alpha * ((1.0 + self.zeta * self.zeta).sqrt() - self.zeta)
    }

    pub fn sigma_minus(&self) -> f64 {
        self.alpha * ((1.0 + self.zeta * self.zeta).sqrt() + self.zeta)
    }

    pub fn sigma(&self) -> f64 {
        self.alpha * (1.0 + 2.0 * self.zeta * self.zeta).sqrt()
    }

    /// Mean -sqrt(2) alpha zeta.
    pub fn mean(&self) -> f64 {
        -std::f64::consts::SQRT_2 * self.alpha * self.zeta
    }
}

/// Density sampled on a rectangular grid; values[i * ys.len() + j] = f(xs[i], ys[j]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BivariateGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl BivariateGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    /// Trapezoid mass over the covered box.
    pub fn mass(&self) -> f64 {
        let ny = self.ys.len();
        let row: Vec<f64> = (0..self.xs.len())
            .map(|i| crate::coalescence::trapezoid(&self.ys, &self.values[i * ny..(i + 1) * ny]))
            .collect();
        crate::coalescence::trapezoid(&self.xs, &row)
    }
}

/// Uniform grid of n points on [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asym_widths_at_empirical_zeta() {
        let p = AsymTentParams::new(1.0, 0.23).unwrap();
        assert!((p.sigma_plus() - 0.7961).abs() < 1e-4);
        assert!((p.sigma_minus() - 1.2561).abs() < 1e-4);
        assert!((p.sigma().powi(2) - (1.0 + 2.0 * 0.23f64.powi(2))).abs() < 1e-14);
    }

    #[test]
    fn phi_round_trip() {
        let p = DoubleGaussianParams::from_phi_eps(1.0, 0.9, 0.15, 0.03).unwrap();
        assert!((p.phi() - 0.15).abs() < 1e-14);
        assert!((p.eps() - 0.03).abs() < 1e-14);
    }

    #[test]
    fn theta_relation() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 9.0, 9.0).unwrap();
        let (a1, a2) = p.alphas();
        assert!(((2.0 * a1 * a2) - (1.0 - 0.81f64).sqrt() * (2.0 * p.phi()).sin()).abs() < 1e-14);
        // the radicand of the response coefficient equals (1 - nu^2) cos^2(2 phi)
        let rad = (a1 * a1 - a2 * a2).powi(2) - p.nu * p.nu;
        assert!((rad - (1.0 - p.nu * p.nu) * (2.0 * p.phi()).cos().powi(2)).abs() < 1e-14);
        assert!((a1 * a2 * rad.sqrt() - p.response_a()).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(DoubleGaussianParams::new(0.0, 0.5, 0.1, 0.1).is_err());
        assert!(DoubleGaussianParams::new(1.0, 1.0, 0.1, 0.1).is_err());
        assert!(AsymTentParams::new(-1.0, 0.1).is_err());
        let p = DoubleGaussianParams::new(1.0, 0.5, 0.0, 0.3).unwrap();
        assert!(p.eps_warning());
    }
}
