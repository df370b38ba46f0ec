//! Generalized volatility V_q over sliding windows, its universal large-n
//! distribution, the finite-n matching function and their fits.

use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::fit::levenberg_marquardt;
use super::tail::hill_tail;
use crate::error::{param, Error, Result};

/// Parameters of the universal volatility density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityDistFit {
    /// Tail exponent of the increments (scale invariant).
    pub mu: f64,
    /// Shape constant (scale invariant).
    pub c: f64,
    pub q: f64,
    pub n: usize,
    /// Scale V_m (scales as the q-th power of the data).
    pub vm: f64,
}

impl VolatilityDistFit {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.c > 0.0 && self.q > 0.0 && self.vm > 0.0 && self.n >= 1) {
            return Err(param("need mu, c, q, vm > 0 and n >= 1"));
        }
        Ok(())
    }

    /// Density x^{-1-mu/q} e^{-x^{-1/c}}/(c Gamma(c mu/q) V_m), x = V/V_m.
    pub fn pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let x = v / self.vm;
        let a = self.c * self.mu / self.q;
        let lx = x.ln();
        ((-1.0 - self.mu / self.q) * lx - (-lx / self.c).exp() - ln_gamma(a) - (self.c * self.vm).ln()).exp()
    }

    /// Distribution function Gamma(c mu/q, x^{-1/c})/Gamma(c mu/q).
    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let y = (-(v / self.vm).ln() / self.c).exp();
        if y > 1e300 {
            return 0.0;
        }
        gamma_ur(self.c * self.mu / self.q, y)
    }

    /// Location of the maximum, V_m [c (1 + mu/q)]^{-c}.
    pub fn mode(&self) -> f64 {
        self.vm * (self.c * (1.0 + self.mu / self.q)).powf(-self.c)
    }

    /// Curvature (1 + mu/q)/c of -ln P against ln V at the maximum.
    pub fn core_curvature(&self) -> f64 {
        (1.0 + self.mu / self.q) / self.c
    }
}

/// Universal density of the generalized volatility.
pub fn universal_volatility_pdf(v: f64, p: &VolatilityDistFit) -> Result<f64> {
    p.validate()?;
    Ok(p.pdf(v))
}

/// Finite-n matching function f(z) = z^{-1} (z^{-n/s} + z^{mu/s})^{-s} with s = c (n - 1),
/// after the substitutions mu -> mu/q and n -> n/q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteVolatility {
    pub n: f64,
    pub mu: f64,
    pub s: f64,
    pub v0: f64,
}

impl FiniteVolatility {
    pub fn new(n: usize, mu: f64, c: f64, q: f64, v0: f64) -> Result<Self> {
        let nq = n as f64 / q;
        if !(nq > 1.0 && mu > 0.0 && c > 0.0 && q > 0.0 && v0 > 0.0) {
            return Err(param("need n/q > 1 and positive mu, c, q, v0"));
        }
        Ok(Self { n: nq, mu: mu / q, s: c * (nq - 1.0), v0 })
    }

    fn m(&self) -> f64 {
        self.s / (self.n + self.mu)
    }

    fn ln_f(&self, z: f64) -> f64 {
        let l = z.ln();
        let (a, b) = (-self.n / self.s * l, self.mu / self.s * l);
        let hi = a.max(b);
        -l - self.s * (hi + ((a - hi).exp() + (b - hi).exp()).ln())
    }

    /// ln N_k = ln m + ln B[m (n + k), m (mu - k)], finite for -n < k < mu.
    pub fn ln_norm(&self, k: f64) -> Result<f64> {
        if !(k > -self.n && k < self.mu) {
            return Err(Error::Domain(format!("moment {k} diverges")));
        }
        let m = self.m();
        Ok(m.ln() + ln_beta(m * (self.n + k), m * (self.mu - k)))
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let n0 = self.ln_norm(0.0).expect("k = 0 is inside the range");
        (self.ln_f(v / self.v0) - n0).exp() / self.v0
    }

    /// <V^k> = V0^k N_k/N_0.
    pub fn moment(&self, k: f64) -> Result<f64> {
        Ok(self.v0.powf(k) * (self.ln_norm(k)? - self.ln_norm(0.0)?).exp())
    }

    /// Maximum of f at z = [(n - 1)/(mu + 1)]^m.
    pub fn mode(&self) -> f64 {
        self.v0 * ((self.n - 1.0) / (self.mu + 1.0)).powf(self.m())
    }
}

/// Sliding means of |x|^q over n consecutive increments (step 1).
pub fn generalized_volatility(increments: &[f64], n: usize, q: f64) -> Result<Vec<f64>> {
    if n == 0 || increments.len() < n {
        return Err(param("window longer than the series"));
    }
    let p: Vec<f64> = increments.iter().map(|x| x.abs().powf(q)).collect();
    let mut s: f64 = p[..n].iter().sum();
    let mut out = Vec::with_capacity(p.len() - n + 1);
    out.push(s / n as f64);
    // periodic re-summation keeps the running sum from drifting
    for i in n..p.len() {
        s += p[i] - p[i - n];
        if i % 4096 == 0 {
            s = p[i + 1 - n..=i].iter().sum();
        }
        out.push(s / n as f64);
    }
    Ok(out)
}

/// Windowed mean log-modulus omega(t) = (1/n) sum ln|x|, zero increments skipped.
pub fn windowed_log_volatility(increments: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || increments.len() < n {
        return Err(param("window longer than the series"));
    }
    Ok(increments
        .chunks_exact(n)
        .map(|c| {
            let (s, k) = c.iter().filter(|x| **x != 0.0).fold((0.0, 0usize), |a, x| (a.0 + x.abs().ln(), a.1 + 1));
            s / k.max(1) as f64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// count/(total (hi - lo)) (scales inversely with the data).
    pub density: f64,
}

/// Log-binned histogram of positive values between their extremes.
pub fn log_histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    let pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if pos.is_empty() || bins == 0 {
        return Err(Error::Estimation("no positive values to histogram".into()));
    }
    let lo = pos.iter().copied().fold(f64::INFINITY, f64::min).ln();
    let hi = pos.iter().copied().fold(0.0, f64::max).ln();
    let width = ((hi - lo) / bins as f64).max(1e-12);
    let mut counts = vec![0usize; bins];
    for v in &pos {
        let i = (((v.ln() - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let total = pos.len() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (a, b) = ((lo + width * i as f64).exp(), (lo + width * (i + 1) as f64).exp());
            HistogramBin { lo: a, hi: b, count: c, density: c as f64 / (total * (b - a)) }
        })
        .collect())
}

/// Quadratic fit of ln P(V) against ln V around the histogram maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalCore {
    /// -d^2 ln P/d(ln V)^2 (scale invariant).
    pub curvature: f64,
    /// Location of the fitted maximum (scales with V).
    pub mode: f64,
    pub r_squared: f64,
    pub bins_used: usize,
}

/// Uses bins whose log-density lies within `depth` of the peak.
pub fn lognormal_core(hist: &[HistogramBin], depth: f64) -> Result<LogNormalCore> {
    let pts: Vec<(f64, f64)> = hist
        .iter()
        .filter(|b| b.count >= 10)
        .map(|b| {
            let c = (b.lo * b.hi).sqrt();
            (c.ln(), b.density.ln())
        })
        .collect();
    let peak = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let ipk = pts.iter().position(|p| p.1 == peak).ok_or_else(|| Error::Estimation("empty histogram".into()))?;
    let (mut a, mut b) = (ipk, ipk);
    while a > 0 && pts[a - 1].1 >= peak - depth {
        a -= 1;
    }
    while b + 1 < pts.len() && pts[b + 1].1 >= peak - depth {
        b += 1;
    }
    let sel = &pts[a..=b];
    if sel.len() < 4 {
        return Err(Error::Estimation("too few bins around the maximum".into()));
    }
    let x0 = pts[ipk].0;
    let m = nalgebra::DMatrix::from_fn(sel.len(), 3, |i, j| (sel[i].0 - x0).powi(j as i32));
    let y = nalgebra::DVector::from_iterator(sel.len(), sel.iter().map(|p| p.1));
    let coef = m.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| Error::Estimation(e.to_string()))?;
    let fitted = &m * &coef;
    let my = y.mean();
    let ss_res: f64 = (&y - &fitted).norm_squared();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let curvature = -2.0 * coef[2];
    let mode = if curvature > 0.0 { (x0 + coef[1] / curvature).exp() } else { f64::NAN };
    Ok(LogNormalCore { curvature, mode, r_squared: 1.0 - ss_res / ss_tot.max(1e-300), bins_used: sel.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolatilityDistribution {
    pub fit: VolatilityDistFit,
    pub converged: bool,
    /// Neyman chi-square per degree of freedom of the fit.
    pub reduced_chi_square: f64,
    pub histogram: Vec<HistogramBin>,
    pub core: Option<LogNormalCore>,
}

/// Depth in ln P below the maximum of the bins used for the log-normal core.
pub const CORE_DEPTH: f64 = 0.5;

/// Number of log bins used by `volatility_distribution`.
pub const VOLATILITY_BINS: usize = 80;

/// Histogram of V_q over sliding windows of n increments and a weighted least-squares
/// fit of the universal density, with weights 1/count on bins holding at least 5 counts.
pub fn volatility_distribution(increments: &[f64], n: usize, q: f64) -> Result<VolatilityDistribution> {
    if !(q > 0.0) {
        return Err(param("q must be positive"));
    }
    if increments.len() < 100 * n {
        return Err(param(format!("need at least {} increments for n = {n}", 100 * n)));
    }
    let v = generalized_volatility(increments, n, q)?;
    let hist = log_histogram(&v, VOLATILITY_BINS)?;
    let total = v.len() as f64;
    let used: Vec<HistogramBin> = hist.iter().copied().filter(|b| b.count >= 5).collect();
    if used.len() < 6 {
        return Err(Error::Estimation("too few populated bins".into()));
    }

    // start: Hill on V for mu/q, the histogram maximum for V_m
    let k = (v.len() / 100).clamp(50, 20_000);
    let mu0 = hill_tail(&v, k).map(|t| (q * t.mu).clamp(0.5, 10.0)).unwrap_or(3.0);
    let peak = used.iter().max_by(|a, b| (a.density * a.hi).total_cmp(&(b.density * b.hi))).expect("non-empty");
    let vmax = (peak.lo * peak.hi).sqrt();
    let resid = |p: &[f64]| -> Vec<f64> {
        let f = VolatilityDistFit { mu: p[0], c: p[1].exp(), q, n, vm: p[2].exp() };
        used.iter()
            .map(|b| {
                let e = total * (f.cdf(b.hi) - f.cdf(b.lo));
                (b.count as f64 - e) / (b.count as f64).sqrt()
            })
            .collect()
    };
    let mut best: Option<super::fit::LmFit> = None;
    for c0 in [0.4, 0.7, 1.0] {
        let vm0 = vmax * (c0 * (1.0 + mu0 / q)).powf(c0);
        if let Ok(f) = levenberg_marquardt(resid, &[mu0, f64::ln(c0), vm0.ln()], 300) {
            if f.params[0] > 0.0 && best.as_ref().is_none_or(|b| f.cost < b.cost) {
                best = Some(f);
            }
        }
    }
    let lm = best.ok_or_else(|| Error::Estimation("volatility fit failed".into()))?;
    let fit = VolatilityDistFit { mu: lm.params[0], c: lm.params[1].exp(), q, n, vm: lm.params[2].exp() };
    let dof = (used.len() as f64 - 3.0).max(1.0);
    Ok(VolatilityDistribution {
        fit,
        converged: lm.converged,
        reduced_chi_square: lm.cost / dof,
        core: lognormal_core(&hist, CORE_DEPTH).ok(),
        histogram: hist,
    })
}
