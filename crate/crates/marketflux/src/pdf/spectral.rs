//! Fourier-space form of the Double Gaussian model.
//!
//! The characteristic function is G(k, p) = 1 / D(k, p) with
//! D = 1 + (s11 k^2 + s22 p^2)/2 + s12 k p + (1 - nu^2) (q11 k^2 + q22 p^2 + q12 k p)^2.
//! Conditional moments follow from the Taylor coefficients of G in p, and the
//! density from residues of 1/D in p followed by a quadrature in k.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4};
use serde::{Deserialize, Serialize};

use super::DoubleGaussianParams;
use crate::error::{param, Result};
use crate::numerics::quad::{integrate_to_inf, integrate_with, kronrod_panels, oscillatory_integral, Trig};
use crate::numerics::series;

/// Amplitude mixing coefficients of the two-interval generative model:
/// x and y are driven by c1 a1 and c2 a2 plus the cross terms eps_i = sum_j c_ij a_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierModel {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
    pub q11: f64,
    pub q22: f64,
    pub q12: f64,
    pub nu: f64,
}

impl FourierModel {
    pub fn from_double_gaussian(p: &DoubleGaussianParams) -> Self {
        let s2 = p.sigma * p.sigma;
        let f = 2.0 * p.phi();
        let (s, c) = f.sin_cos();
        Self {
            s11: s2,
            s22: s2,
            s12: p.eps() * s2,
            q11: 0.25 * s2 * s,
            q22: -0.25 * s2 * s,
            q12: 0.5 * s2 * c,
            nu: p.nu,
        }
    }

    pub fn from_amplitudes(a: &AmplitudeCoefficients, nu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&nu) {
            return Err(param(format!("nu must lie in [0, 1), got {nu}")));
        }
        let AmplitudeCoefficients { c1, c2, c11, c12, c21, c22 } = *a;
        let m = Self {
            s11: c1 * c1 + c12 * c12 + c11 * c11 + 2.0 * nu * c11 * c12,
            s22: c2 * c2 + c21 * c21 + c22 * c22 + 2.0 * nu * c22 * c21,
            s12: c1 * c21 + c2 * c12 + nu * (c1 * c22 + c2 * c11),
            q11: 0.5 * c1 * c12,
            q22: 0.5 * c2 * c21,
            q12: 0.5 * (c1 * c2 + c12 * c21 - c11 * c22),
            nu,
        };
        if !(m.s11 > 0.0 && m.s22 > 0.0) {
            return Err(param("degenerate amplitude coefficients"));
        }
        Ok(m)
    }

    /// Model of (z, zbar) = ((x + y)/sqrt2, (y - x)/sqrt2).
    pub fn rotated(&self) -> Self {
        let h = 0.5 * (self.s11 + self.s22);
        let g = 0.5 * (self.q11 + self.q22);
        Self {
            s11: h + self.s12,
            s22: h - self.s12,
            s12: 0.5 * (self.s22 - self.s11),
            q11: g + 0.5 * self.q12,
            q22: g - 0.5 * self.q12,
            q12: self.q22 - self.q11,
            nu: self.nu,
        }
    }

    /// Swaps the roles of x and y.
    pub fn transposed(&self) -> Self {
        Self { s11: self.s22, s22: self.s11, q11: self.q22, q22: self.q11, ..*self }
    }

    fn g(&self) -> f64 {
        1.0 - self.nu * self.nu
    }

    pub fn denominator(&self, k: f64, p: f64) -> f64 {
        let q = self.q11 * k * k + self.q22 * p * p + self.q12 * k * p;
        1.0 + 0.5 * (self.s11 * k * k + self.s22 * p * p) + self.s12 * k * p + self.g() * q * q
    }

    pub fn characteristic(&self, k: f64, p: f64) -> f64 {
        1.0 / self.denominator(k, p)
    }

    /// Coefficients of D(k, p) as a polynomial in p, lowest order first.
    pub fn p_coefficients(&self, k: f64) -> [f64; 5] {
        let g = self.g();
        let (a, b, c) = (self.q22, self.q12 * k, self.q11 * k * k);
        [
            1.0 + 0.5 * self.s11 * k * k + g * c * c,
            self.s12 * k + 2.0 * g * b * c,
            0.5 * self.s22 + g * (b * b + 2.0 * a * c),
            2.0 * g * a * b,
            g * a * a,
        ]
    }

    /// M_n(x) = int y^n P(x, y) dy from the p-expansion of 1/D.
    pub fn moment(&self, n: usize, x: f64) -> f64 {
        let coef = |k: f64| {
            let d = self.p_coefficients(k);
            let mut a = vec![0.0; n + 1];
            for (i, v) in d.iter().enumerate().take(n + 1) {
                a[i] = *v;
            }
            series::recip(&a)[n]
        };
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        let scale = self.s11.sqrt();
        let tol = 1e-15 / scale.powi(1 - n as i32).max(1e-300);
        if n.is_multiple_of(2) {
            let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            let v = if x == 0.0 {
                integrate_to_inf(coef, 0.0, tol, 1e-11).value
            } else {
                oscillatory_integral(coef, x, Trig::Cos, tol, 1e-11)
            };
            sign * fact * v / PI
        } else {
            let sign = if n.div_ceil(2).is_multiple_of(2) { 1.0 } else { -1.0 };
            let v = oscillatory_integral(coef, x.abs(), Trig::Sin, tol, 1e-11) * x.signum();
            sign * fact * v / PI
        }
    }

    /// Marginal density of x.
    pub fn marginal_x(&self, x: f64) -> f64 {
        self.moment(0, x)
    }

    /// Conditional mean, standard deviation and skewness of y given x.
    pub fn conditional_stats(&self, x: f64) -> ConditionalStats {
        let m: Vec<f64> = (0..4).map(|n| self.moment(n, x)).collect();
        stats_from_moments(&m)
    }

    /// Precomputed residues for density evaluation with |x| <= x_max, |y| <= y_max.
    pub fn residue_grid(&self, x_max: f64, y_max: f64) -> ResidueGrid {
        ResidueGrid::new(self, x_max, y_max)
    }

    /// Density at a single point by residues.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.residue_grid(x.abs(), y.abs()).density(x, y)
    }
}

/// Conditional statistics of the response y for a given push x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStats {
    pub density: f64,
    pub mean: f64,
    pub sigma: f64,
    pub skewness: f64,
}

/// Statistics from raw moments M0..M3.
pub fn stats_from_moments(m: &[f64]) -> ConditionalStats {
    let mean = m[1] / m[0];
    let e2 = m[2] / m[0];
    let e3 = m[3] / m[0];
    let var = e2 - mean * mean;
    let c3 = e3 - 3.0 * mean * e2 + 2.0 * mean.powi(3);
    let sigma = var.max(0.0).sqrt();
    ConditionalStats { density: m[0], mean, sigma, skewness: c3 / sigma.powi(3) }
}

/// Roots of a real polynomial (lowest order first) of degree 2 or 4.
fn roots(c: &[f64; 5]) -> Vec<Complex<f64>> {
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if c[4].abs() > 1e-13 * scale {
        let mut m = Matrix4::<f64>::zeros();
        for i in 1..4 {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..4 {
            m[(i, 3)] = -c[i] / c[4];
        }
        m.complex_eigenvalues().iter().copied().collect()
    } else {
        let disc = Complex::new(c[1] * c[1] - 4.0 * c[2] * c[0], 0.0).sqrt();
        vec![(-c[1] + disc) / (2.0 * c[2]), (-c[1] - disc) / (2.0 * c[2])]
    }
}

fn dpoly(c: &[f64; 5], r: Complex<f64>) -> Complex<f64> {
    let deg = roots_degree(c);
    let mut acc = Complex::new(0.0, 0.0);
    for i in (1..=deg).rev() {
        acc = acc * r + c[i] * i as f64;
    }
    acc
}

fn roots_degree(c: &[f64; 5]) -> usize {
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if c[4].abs() > 1e-13 * scale {
        4
    } else {
        2
    }
}

#[derive(Debug, Clone)]
struct Node {
    k: f64,
    w: f64,
    /// (root, residue factor) for roots below the real axis, used for y >= 0.
    lower: Vec<(Complex<f64>, Complex<f64>)>,
    /// Same for roots above the real axis, used for y < 0.
    upper: Vec<(Complex<f64>, Complex<f64>)>,
}

/// Residue representation of the density on a fixed k-quadrature.
/// For y >= 0, R(k, y) = -i sum_{Im r < 0} e^{-i r y} / D'(r); for y < 0 the
/// upper roots enter with +i. Then P(x, y) = (1/pi) int_0^inf Re[e^{-ikx} R(k, y)] dk.
#[derive(Debug, Clone)]
pub struct ResidueGrid {
    nodes: Vec<Node>,
}

/// Cutoff of the k quadrature in units of 1/sqrt(s11).
const K_MAX: f64 = 150.0;

/// Smooth window equal to 1 below t = 1/2 and vanishing with all derivatives at t = 1,
/// so that the cutoff leaves no boundary term away from the kink lines.
fn taper(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * t - 1.0;
    1.0 / (1.0 + (1.0 / (1.0 - s) - 1.0 / s).exp())
}

impl ResidueGrid {
    fn new(m: &FourierModel, x_max: f64, y_max: f64) -> Self {
        let sx = m.s11.sqrt();
        let k_max = K_MAX / sx;
        // phase rate in k at the cutoff, from the asymptotic root slopes and decay
        let c = m.p_coefficients(k_max);
        let mut rate = x_max;
        for r in roots(&c) {
            let reach = y_max.min(40.0 / r.im.abs().max(1e-300));
            rate = rate.max(x_max + (r.re / k_max).abs() * reach);
        }
        let width = (0.25 / sx).min(1.5 / rate.max(1e-300));
        let panels = (k_max / width).ceil() as usize;
        let nodes = kronrod_panels(0.0, k_max, panels)
            .into_iter()
            .map(|(k, w)| {
                let w = w * taper(k / k_max);
                let c = m.p_coefficients(k);
                let mut lower = Vec::new();
                let mut upper = Vec::new();
                for r in roots(&c) {
                    let d = dpoly(&c, r);
                    if r.im < 0.0 {
                        lower.push((r, Complex::new(0.0, -1.0) / d));
                    } else {
                        upper.push((r, Complex::new(0.0, 1.0) / d));
                    }
                }
                Node { k, w, lower, upper }
            })
            .collect();
        Self { nodes }
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        for n in &self.nodes {
            let list = if y >= 0.0 { &n.lower } else { &n.upper };
            let mut r_sum = Complex::new(0.0, 0.0);
            for (r, f) in list {
                let e = Complex::new(0.0, -y) * r;
                if e.re > -700.0 {
                    r_sum += f * e.exp();
                }
            }
            let ph = Complex::new(0.0, -n.k * x).exp();
            s += n.w * (ph * r_sum).re;
        }
        s / PI
    }

    /// Raw moments int y^n P(x, y) dy, n = 0..=nmax, by adaptive quadrature of the
    /// density over y, split at the given break points.
    pub fn column_moments(&self, x: f64, nmax: usize, breaks: &[f64], y_max: f64, tol: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = breaks.iter().copied().filter(|b| b.abs() < y_max).collect();
        pts.push(-y_max);
        pts.push(0.0);
        pts.push(y_max);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        (0..=nmax)
            .map(|n| {
                pts.windows(2)
                    .map(|w| integrate_with(|y| y.powi(n as i32) * self.density(x, y), w[0], w[1], tol, 1e-9).value)
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdf::univariate::tent;

    #[test]
    fn effective_market_scond() {
        // phi = eps = 0: closed-form conditional variance sigma^2 [1 + nu^2 (sqrt2 |x|/sigma - 1)/2]
        let p = DoubleGaussianParams::new(1.0, 0.95, 0.0, 0.0).unwrap();
        let m = FourierModel::from_double_gaussian(&p);
        for &x in &[0.0f64, 0.5, -1.3, 2.0] {
            let st = m.conditional_stats(x);
            let v = 1.0 + 0.5 * 0.95f64.powi(2) * (std::f64::consts::SQRT_2 * x.abs() - 1.0);
            assert!((st.sigma * st.sigma - v).abs() < 1e-8, "x={x} {}", st.sigma);
            assert!(st.mean.abs() < 1e-10);
            assert!((st.density - tent(x, 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn residue_density_matches_tent_product() {
        let p = DoubleGaussianParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let m = FourierModel::from_double_gaussian(&p);
        let g = m.residue_grid(3.0, 3.0);
        for &(x, y) in &[(0.5, 0.3), (-1.0, 2.0), (2.5, -0.7)] {
            let v = g.density(x, y);
            assert!((v / (tent(x, 1.0) * tent(y, 1.0)) - 1.0).abs() < 1e-5, "{v}");
        }
    }

    #[test]
    fn residue_column_matches_moments() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 8.0, 8.7).unwrap();
        let m = FourierModel::from_double_gaussian(&p);
        let g = m.residue_grid(1.0, 30.0);
        let col = g.column_moments(1.0, 2, &[], 30.0, 1e-10);
        for (n, v) in col.iter().enumerate() {
            let e = m.moment(n, 1.0);
            assert!((v - e).abs() < 1e-5 * (1.0 + e.abs()), "n={n} {v} {e}");
        }
    }

    #[test]
    fn marginals_equal_for_stationary_model() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 8.0, 8.7).unwrap();
        let m = FourierModel::from_double_gaussian(&p);
        let t = m.transposed();
        for &x in &[0.0, 0.4, 1.7] {
            assert!((m.marginal_x(x) - t.marginal_x(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_preserves_characteristic() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 8.0, 8.7).unwrap();
        let m = FourierModel::from_double_gaussian(&p);
        let r = m.rotated();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for &(a, b) in &[(0.3, 1.1), (-2.0, 0.7)] {
            let (k, q) = (s * (a - b), s * (a + b));
            assert!((m.denominator(k, q) - r.denominator(a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitudes_reproduce_double_gaussian_form() {
        // c1 = c2, c21 = -c12, c22 = -c11 keeps the marginals equal
        let a = AmplitudeCoefficients { c1: 0.8, c2: 0.8, c11: 0.3, c12: 0.25, c21: -0.25, c22: -0.3 };
        let m = FourierModel::from_amplitudes(&a, 0.6).unwrap();
        assert!((m.s11 - m.s22).abs() < 1e-15);
        assert!((m.q11 + m.q22).abs() < 1e-15);
        assert!(FourierModel::from_amplitudes(&a, 1.0).is_err());
    }
}
