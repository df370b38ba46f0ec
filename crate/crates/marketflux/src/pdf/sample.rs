//! Monte Carlo sampling of the two-interval generative model and histogram checks.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::spectral::{AmplitudeCoefficients, FourierModel};
use super::DoubleGaussianParams;
use crate::error::{param, Error, Result};
use crate::stochastic::{GaugeVector, RngHandle};

/// Generative model x = sqrt2 (a1, xi1) + sqrt2 (e1, xi2), y = sqrt2 (e2, xi1) + sqrt2 (a2, xi2)
/// with a_i = c_i alpha_i, e_i = sum_j c_ij alpha_j, <alpha_i . alpha_j> = [[1, nu], [nu, 1]]
/// and xi components of variance 1/2. With zeta > 0 each noise is shifted by -zeta a_i/|c_i|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerativeSampler {
    pub coef: AmplitudeCoefficients,
    pub nu: f64,
    pub zeta: f64,
}

impl GenerativeSampler {
    pub fn new(coef: AmplitudeCoefficients, nu: f64, zeta: f64) -> Result<Self> {
        FourierModel::from_amplitudes(&coef, nu)?;
        if !(zeta >= 0.0) {
            return Err(param("zeta must be non-negative"));
        }
        if zeta > 0.0 && (coef.c1 == 0.0 || coef.c2 == 0.0) {
            return Err(param("noise shift needs nonzero diagonal amplitudes"));
        }
        Ok(Self { coef, nu, zeta })
    }

    /// Sampler whose Fourier form equals that of the Double Gaussian parameters.
    pub fn matching(p: &DoubleGaussianParams) -> Result<Self> {
        Self::new(matching_coefficients(p)?, p.nu, p.zeta)
    }

    pub fn model(&self) -> FourierModel {
        FourierModel::from_amplitudes(&self.coef, self.nu).expect("validated on construction")
    }

    pub fn sample(&self, rng: &mut RngHandle) -> (f64, f64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut vec = |s: f64| GaugeVector::new(s * rng.normal(), s * rng.normal());
        let al1 = vec(h);
        let eta = vec(h);
        let al2 = al1.scale(self.nu).add(&eta.scale((1.0 - self.nu * self.nu).sqrt()));
        let mut xi1 = vec(h);
        let mut xi2 = vec(h);
        let c = &self.coef;
        let a1 = al1.scale(c.c1);
        let a2 = al2.scale(c.c2);
        if self.zeta > 0.0 {
            xi1 = xi1.add(&a1.scale(-self.zeta / c.c1.abs()));
            xi2 = xi2.add(&a2.scale(-self.zeta / c.c2.abs()));
        }
        let e1 = al1.scale(c.c11).add(&al2.scale(c.c12));
        let e2 = al1.scale(c.c21).add(&al2.scale(c.c22));
        let s = std::f64::consts::SQRT_2;
        (s * (a1.dot(&xi1) + e1.dot(&xi2)), s * (e2.dot(&xi1) + a2.dot(&xi2)))
    }

    pub fn sample_n(&self, seed: u64, stream: u64, n: usize) -> Vec<(f64, f64)> {
        let mut rng = RngHandle::new(seed, stream);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

fn model_vector(m: &FourierModel) -> SVector<f64, 6> {
    SVector::from([m.s11, m.s22, m.s12, m.q11, m.q22, m.q12])
}

fn coef_from(v: &SVector<f64, 6>) -> AmplitudeCoefficients {
    AmplitudeCoefficients { c1: v[0], c2: v[1], c11: v[2], c12: v[3], c21: v[4], c22: v[5] }
}

fn amplitudes_vector(v: &SVector<f64, 6>, nu: f64) -> SVector<f64, 6> {
    let c = coef_from(v);
    let m = FourierModel {
        s11: c.c1 * c.c1 + c.c12 * c.c12 + c.c11 * c.c11 + 2.0 * nu * c.c11 * c.c12,
        s22: c.c2 * c.c2 + c.c21 * c.c21 + c.c22 * c.c22 + 2.0 * nu * c.c22 * c.c21,
        s12: c.c1 * c.c21 + c.c2 * c.c12 + nu * (c.c1 * c.c22 + c.c2 * c.c11),
        q11: 0.5 * c.c1 * c.c12,
        q22: 0.5 * c.c2 * c.c21,
        q12: 0.5 * (c.c1 * c.c2 + c.c12 * c.c21 - c.c11 * c.c22),
        nu,
    };
    model_vector(&m)
}

/// Amplitude coefficients reproducing the Fourier form of the Double Gaussian model.
/// At eps = 0 the solution is c1 = c2 = sigma cos(phi), c12 = -c21 = sigma sin(phi),
/// c11 = c22 = 0; otherwise it is continued by Gauss-Newton from there.
pub fn matching_coefficients(p: &DoubleGaussianParams) -> Result<AmplitudeCoefficients> {
    p.validate()?;
    let target = model_vector(&FourierModel::from_double_gaussian(p));
    let (s, c) = p.phi().sin_cos();
    let mut v = SVector::<f64, 6>::from([p.sigma * c, p.sigma * c, 0.0, p.sigma * s, -p.sigma * s, 0.0]);
    let scale = p.sigma * p.sigma;
    for _ in 0..100 {
        let r = amplitudes_vector(&v, p.nu) - target;
        if r.norm() < 1e-14 * scale {
            return Ok(coef_from(&v));
        }
        let mut jac = SMatrix::<f64, 6, 6>::zeros();
        for j in 0..6 {
            let h = 1e-7 * p.sigma;
            let mut vp = v;
            vp[j] += h;
            let mut vm = v;
            vm[j] -= h;
            let col = (amplitudes_vector(&vp, p.nu) - amplitudes_vector(&vm, p.nu)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let step = jac.svd(true, true).solve(&r, 1e-12 * scale).map_err(|e| Error::Degenerate(e.to_string()))?;
        v -= step;
    }
    let r = amplitudes_vector(&v, p.nu) - target;
    if r.norm() < 1e-10 * scale {
        Ok(coef_from(&v))
    } else {
        Err(Error::Degenerate(format!("no amplitude coefficients match these parameters (residual {})", r.norm())))
    }
}

/// Pearson chi-square comparison of samples with a density on a square histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Bins [-extent, extent]^2 into n x n cells plus one overflow cell. Expected cell
/// probabilities use a 3 x 3 Gauss-Legendre rule; cells expecting fewer than 5 counts
/// are pooled into the overflow.
pub fn histogram_chi_square(
    samples: &[(f64, f64)],
    density: impl Fn(f64, f64) -> f64 + Sync,
    extent: f64,
    n: usize,
) -> Result<ChiSquareTest> {
    if samples.is_empty() || n == 0 || !(extent > 0.0) {
        return Err(param("need samples, bins and a positive extent"));
    }
    let h = 2.0 * extent / n as f64;
    let mut counts = vec![0usize; n * n];
    let mut outside = 0usize;
    for &(x, y) in samples {
        let i = ((x + extent) / h).floor();
        let j = ((y + extent) / h).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < n && (j as usize) < n {
            counts[i as usize * n + j as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let gx = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let gw = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    use rayon::prelude::*;
    let probs: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / n, c % n);
            let cx = -extent + (i as f64 + 0.5) * h;
            let cy = -extent + (j as f64 + 0.5) * h;
            let mut s = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    s += gw[a] * gw[b] * density(cx + 0.5 * h * gx[a], cy + 0.5 * h * gx[b]);
                }
            }
            s * 0.25 * h * h
        })
        .collect();
    let total = samples.len() as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pooled_obs = outside as f64;
    let mut pooled_exp = (1.0 - probs.iter().sum::<f64>()).max(0.0) * total;
    for (o, p) in counts.iter().zip(&probs) {
        let e = p * total;
        if e >= 5.0 {
            stat += (*o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pooled_obs += *o as f64;
            pooled_exp += e;
        }
    }
    if pooled_exp >= 5.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Estimation(e.to_string()))?;
    Ok(ChiSquareTest { statistic: stat, dof, p_value: 1.0 - chi.cdf(stat) })
}
