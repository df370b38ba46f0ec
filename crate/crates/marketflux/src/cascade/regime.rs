//! Local feedback index alpha = -eps omega, its Gaussian regime statistics,
//! conditioning on past values and the virtual-time picture.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::jumps::relaxation_h;
use crate::error::{param, Error, Result};
use crate::stochastic::RngHandle;

/// Market regime read from the sign and size of alpha.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// alpha above sigma0/2: super-diffusive.
    Trending,
    /// |alpha| <= sigma0/2.
    Brownian,
    /// alpha below -sigma0/2: sub-diffusive.
    MeanReverting,
}

/// Stationary statistics of alpha on the coarse-graining interval tau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeState {
    pub tau: f64,
    pub tau0: f64,
    pub lambda_sq: f64,
    /// 1/ln(tau0/tau).
    pub eps: f64,
    /// Variance 2 eps lambda^2 of alpha.
    pub sigma0_sq: f64,
}

impl RegimeState {
    pub fn new(tau: f64, tau0: f64, lambda_sq: f64) -> Result<Self> {
        if !(tau > 0.0 && tau0 > tau && lambda_sq > 0.0) {
            return Err(param("need 0 < tau < tau0 and lambda_sq > 0"));
        }
        let eps = 1.0 / (tau0 / tau).ln();
        Ok(Self { tau, tau0, lambda_sq, eps, sigma0_sq: 2.0 * eps * lambda_sq })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0_sq.sqrt()
    }

    /// Correlation h(t) of alpha at lag t, with lags below tau treated as tau.
    pub fn h(&self, lag: f64) -> f64 {
        relaxation_h(lag.abs().max(self.tau), self.eps, self.tau0)
    }

    pub fn classify(&self, alpha: f64) -> Regime {
        let half = 0.5 * self.sigma0();
        if alpha > half {
            Regime::Trending
        } else if alpha < -half {
            Regime::MeanReverting
        } else {
            Regime::Brownian
        }
    }
}

/// Conditional law of alpha a time dt1 after the value alpha0, and the
/// persistence time of that regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSwitch {
    pub h: f64,
    pub mean: f64,
    pub sigma: f64,
    /// Lag at which the conditional mean equals the conditional standard deviation.
    pub switch_time: f64,
}

/// Mean alpha0 h(dt1), variance sigma0^2 (1 - h^2) and the switch time
/// tau0 (tau/tau0)^{1/sqrt(1 + z)}, z = alpha0^2/(4 eps^2 lambda^2).
pub fn regime_switch_stats(alpha0: f64, dt1: f64, state: &RegimeState) -> RegimeSwitch {
    let h = state.h(dt1);
    let z = alpha0 * alpha0 / (4.0 * state.eps * state.eps * state.lambda_sq);
    RegimeSwitch {
        h,
        mean: alpha0 * h,
        sigma: (state.sigma0_sq * (1.0 - h * h)).max(0.0).sqrt(),
        switch_time: state.tau0 * (state.tau / state.tau0).powf(1.0 / (1.0 + z).sqrt()),
    }
}

/// Conditional mean and standard deviation of alpha at t_k given earlier values
/// (t_i, alpha_i): mean sum_i K_i alpha_i with K_i = -a_ki/a_kk and variance
/// sigma0^2 det h/a_kk, where a are cofactors of the matrix h(t_i - t_j).
pub fn regime_multi_conditional(history: &[(f64, f64)], t_k: f64, state: &RegimeState) -> Result<(f64, f64)> {
    if history.is_empty() {
        return Ok((0.0, state.sigma0()));
    }
    let times: Vec<f64> = history.iter().map(|p| p.0).chain(std::iter::once(t_k)).collect();
    let n = times.len();
    let h = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { state.h(times[i] - times[j]) });
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::Degenerate("correlation matrix of the history is not positive definite".into()))?;
    let inv = chol.inverse();
    let last = n - 1;
    let akk = inv[(last, last)];
    if !(akk.is_finite() && akk > 0.0) {
        return Err(Error::Degenerate("singular correlation matrix".into()));
    }
    let mean: f64 = history.iter().enumerate().map(|(i, p)| -inv[(last, i)] / akk * p.1).sum();
    Ok((mean, (state.sigma0_sq / akk).sqrt()))
}

/// Probability that alpha keeps the sign of a after being observed equal to a at
/// lags 0 and dt1, evaluated dt2 later.
pub fn persistence_probability(a: f64, dt1: f64, dt2: f64, state: &RegimeState) -> Result<f64> {
    let (m, s) = regime_multi_conditional(&[(0.0, a), (dt1, a)], dt1 + dt2, state)?;
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(n.cdf(m.abs() / s))
}

/// Moment exponent q alpha + q^2 lambda^2 (1 + h(t))/2 including the fluctuation of alpha.
pub fn fluctuation_corrected_exponent(q: f64, t: f64, alpha: f64, state: &RegimeState) -> f64 {
    q * alpha + 0.5 * q * q * state.lambda_sq * (1.0 + state.h(t))
}

/// Virtual time Theta - Theta0 = (t - t0)^{1 + alpha} and its Hurst exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualTime {
    pub theta: f64,
    pub hurst: f64,
}

pub fn virtual_time(t: f64, t0: f64, alpha: f64) -> Result<VirtualTime> {
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("virtual time needs alpha > -1, got {alpha}")));
    }
    if !(t > t0) {
        return Err(Error::Domain("virtual time needs t > t0".into()));
    }
    Ok(VirtualTime { theta: (t - t0).powf(1.0 + alpha), hurst: 0.5 * (1.0 + alpha) })
}

/// Increments sqrt(Theta(i + 1) - Theta(i)) N(0, 1) of Brownian motion in the
/// virtual time Theta(s) = s^{1 + alpha}, for i = 0..n.
pub fn virtual_time_segment(n: usize, alpha: f64, rng: &mut RngHandle) -> Result<Vec<f64>> {
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("virtual time needs alpha > -1, got {alpha}")));
    }
    let e = 1.0 + alpha;
    Ok((0..n)
        .map(|i| {
            let d = ((i + 1) as f64).powf(e) - (i as f64).powf(e);
            d.sqrt() * rng.normal()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switch_time_example() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let r = regime_switch_stats(s.sigma0(), 10.0, &s);
        assert!((r.switch_time - 37.9).abs() < 0.05, "{}", r.switch_time);
    }

    #[test]
    fn switch_time_is_where_mean_meets_sigma() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let a0 = 1.5 * s.sigma0();
        let t = regime_switch_stats(a0, 1.0, &s).switch_time;
        let r = regime_switch_stats(a0, t, &s);
        // mean = sigma at the switch time to leading order in (1 - h)
        assert!((r.mean / r.sigma - 1.0).abs() < 0.5, "{r:?}");
    }

    #[test]
    fn conditional_width_example() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let sigma0 = 0.2;
        assert!((sigma0 * (1.0 - 0.9f64 * 0.9).sqrt() - 0.0872).abs() < 1e-4);
        assert_eq!(regime_switch_stats(0.3, 0.5, &s).sigma, 0.0);
    }

    #[test]
    fn two_point_conditioning_matches_closed_form() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let (m, sd) = regime_multi_conditional(&[(0.0, 0.2)], 16.0, &s).unwrap();
        let r = regime_switch_stats(0.2, 16.0, &s);
        assert!((m - r.mean).abs() < 1e-12 && (sd - r.sigma).abs() < 1e-12);
    }

    #[test]
    fn three_point_conditioning_by_cofactors() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let (t0, t1, t2) = (0.0, 20.0, 60.0);
        let (a0, a1) = (0.1, 0.15);
        let (m, sd) = regime_multi_conditional(&[(t0, a0), (t1, a1)], t2, &s).unwrap();
        let (h01, h02, h12) = (s.h(t1 - t0), s.h(t2 - t0), s.h(t2 - t1));
        // cofactors of the last row of [[1, h01, h02], [h01, 1, h12], [h02, h12, 1]]
        let a20 = h01 * h12 - h02;
        let a21 = -(h12 - h01 * h02);
        let a22 = 1.0 - h01 * h01;
        let det = 1.0 - h01 * h01 - h02 * h02 - h12 * h12 + 2.0 * h01 * h02 * h12;
        assert!((m - (-(a20 * a0 + a21 * a1) / a22)).abs() < 1e-12);
        assert!((sd * sd - s.sigma0_sq * det / a22).abs() < 1e-12);
    }

    #[test]
    fn repeated_time_is_degenerate() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        assert!(matches!(
            regime_multi_conditional(&[(0.0, 0.1), (0.0, 0.1)], 5.0, &s),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn virtual_time_exponents() {
        let v = virtual_time(11.0, 1.0, 0.4).unwrap();
        assert!((v.theta - 10f64.powf(1.4)).abs() < 1e-12 && (v.hurst - 0.7).abs() < 1e-15);
        assert!(virtual_time(2.0, 1.0, -1.0).is_err());
        let v = virtual_time(2.0, 1.0, 0.0).unwrap();
        assert_eq!(v.hurst, 0.5);
    }

    #[test]
    fn segment_variance_grows_as_theta() {
        let alpha = 0.3;
        let (n, reps) = (64, 4000);
        let mut rng = RngHandle::new(12, 0);
        let mut s2 = 0.0;
        for _ in 0..reps {
            let x: f64 = virtual_time_segment(n, alpha, &mut rng).unwrap().iter().sum();
            s2 += x * x;
        }
        let want = (n as f64).powf(1.0 + alpha);
        assert!((s2 / reps as f64 / want - 1.0).abs() < 0.08);
    }

    #[test]
    fn corrected_exponent() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let e = fluctuation_corrected_exponent(2.0, 1.0, 0.1, &s);
        assert!((e - (0.2 + 2.0 * 0.1 * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn classification_thresholds() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let h = 0.5 * s.sigma0();
        assert_eq!(s.classify(h), Regime::Brownian);
        assert_eq!(s.classify(-h), Regime::Brownian);
        assert_eq!(s.classify(1.01 * h), Regime::Trending);
        assert_eq!(s.classify(-1.01 * h), Regime::MeanReverting);
    }

    #[test]
    fn conditional_mean_is_linear_in_history() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let h = [(0.0, 0.3), (5.0, -0.1), (20.0, 0.2)];
        let h2: Vec<(f64, f64)> = h.iter().map(|p| (p.0, 2.5 * p.1)).collect();
        let (m1, s1) = regime_multi_conditional(&h, 40.0, &s).unwrap();
        let (m2, s2) = regime_multi_conditional(&h2, 40.0, &s).unwrap();
        assert!((m2 - 2.5 * m1).abs() < 1e-12 && (s1 - s2).abs() < 1e-15);
    }

    #[test]
    fn persistence_grows_with_confirmation_lag() {
        let s = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
        let a = s.sigma0();
        let p: Vec<f64> = [2.0, 5.0, 15.0].iter().map(|&d| persistence_probability(a, d, 5.0, &s).unwrap()).collect();
        assert!(p.iter().all(|v| *v > 0.5 && *v < 1.0), "{p:?}");
        assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
    }
}
