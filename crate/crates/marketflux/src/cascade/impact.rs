//! Price impact of volume: logarithmic kernel, coarse-grained law and the
//! conditional response to a volume trigger.

use crate::error::{param, Result};

/// Propagator G0(t) sgn(dV) ln(1 + |dV|/V_k) with G0 = sigma_k tau_k/(t + tau_k); zero for t < 0.
pub fn impact_price_shift(dv: f64, t: f64, sigma_k: f64, vk: f64, tauk: f64) -> f64 {
    if t < 0.0 || dv == 0.0 {
        return 0.0;
    }
    let g0 = sigma_k * tauk / (t + tauk);
    g0 * dv.signum() * (dv.abs() / vk).ln_1p()
}

/// Volume scale on the interval tau, V_tau = V_k sqrt(tau/tau_k).
pub fn volume_scale(tau: f64, vk: f64, tauk: f64) -> f64 {
    vk * (tau / tauk).sqrt()
}

/// Coarse-grained impact sigma_tau sgn(dV) ln(1 + |dV|/V_tau).
pub fn coarse_impact(dv: f64, tau: f64, sigma_tau: f64, vk: f64, tauk: f64) -> f64 {
    if dv == 0.0 {
        return 0.0;
    }
    sigma_tau * dv.signum() * (dv.abs() / volume_scale(tau, vk, tauk)).ln_1p()
}

/// Local exponent upsilon = (1 + V_tau/|dV|) ln(1 + |dV|/V_tau) of dP ~ dV^{1/upsilon}.
pub fn apparent_exponent(dv: f64, v_tau: f64) -> f64 {
    let x = dv.abs() / v_tau;
    if x < 1e-8 {
        return 1.0 + 0.5 * x;
    }
    (1.0 + 1.0 / x) * x.ln_1p()
}

/// Exponent upsilon fitted by least squares to ln dP against ln dV over
/// `n` log-spaced volumes in [v_lo, v_hi].
pub fn fitted_apparent_exponent(v_lo: f64, v_hi: f64, v_tau: f64, n: usize) -> Result<f64> {
    if !(v_lo > 0.0 && v_hi > v_lo && v_tau > 0.0 && n >= 2) {
        return Err(param("need 0 < v_lo < v_hi, v_tau > 0 and n >= 2"));
    }
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let lv = v_lo.ln() + (v_hi / v_lo).ln() * i as f64 / (n - 1) as f64;
            (lv, (lv.exp() / v_tau).ln_1p().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxx / sxy)
}

/// Conditional response R(l) = ln(1 + l)/l^gamma after a volume trigger, in units of tau_k.
pub fn response_conditioned(l: f64, gamma: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    l.ln_1p() / l.powf(gamma)
}

/// Response to a trigger of volume V, R(l) ln|V/V_k|.
pub fn response_to_volume(l: f64, gamma: f64, v: f64, vk: f64) -> f64 {
    response_conditioned(l, gamma) * (v / vk).abs().ln()
}

/// Lag of the maximum of R(l), found by golden-section search in ln l.
pub fn response_peak(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(param("gamma must lie in (0, 1)"));
    }
    let f = |s: f64| -response_conditioned(s.exp(), gamma);
    let (mut a, mut b) = (0.0, 4.0 / gamma);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    Ok((0.5 * (a + b)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn propagator_at_origin() {
        let v = impact_price_shift(3.0, 0.0, 0.7, 1.0, 1.0);
        assert!((v - 0.7 * 4f64.ln()).abs() < 1e-15);
        assert_eq!(impact_price_shift(3.0, -1.0, 0.7, 1.0, 1.0), 0.0);
        let w = impact_price_shift(-3.0, 9.0, 0.7, 1.0, 1.0);
        assert!((w + 0.07 * 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn exponent_limits() {
        assert!((apparent_exponent(1e-6, 1.0) - 1.0).abs() < 1e-6);
        // upsilon = 3 at |dV|/V_tau near 15.8
        let x = 15.78;
        assert!((apparent_exponent(x, 1.0) - 3.0).abs() < 0.01);
        assert!(apparent_exponent(1e6, 1.0) > 10.0);
    }

    #[test]
    fn fitted_exponent_short_and_long_intervals() {
        // volumes spanning one decade around 16 V_tau at the short interval
        let (lo, hi) = (16.0 / 10f64.sqrt(), 16.0 * 10f64.sqrt());
        let short = fitted_apparent_exponent(lo, hi, volume_scale(1.0, 1.0, 1.0), 41).unwrap();
        assert!((short - 3.0).abs() < 0.3, "{short}");
        let long = fitted_apparent_exponent(lo, hi, volume_scale(1e6, 1.0, 1.0), 41).unwrap();
        assert!((long - 1.0).abs() < 0.05, "{long}");
    }

    #[test]
    fn response_peak_near_exp_inverse_gamma() {
        let l = response_peak(0.2).unwrap();
        // stationarity: l/(1 + l) = gamma ln(1 + l)
        assert!((l / (1.0 + l) - 0.2 * l.ln_1p()).abs() < 1e-6, "{l}");
        assert!((l / 0.2f64.recip().exp() - 1.0).abs() < 0.1, "{l}");
    }

    proptest! {
        #[test]
        fn impact_is_odd_and_monotone(v in 0.01..1e4f64, w in 0.01..1e4f64, t in 0.0..100.0f64) {
            let a = impact_price_shift(v, t, 1.0, 1.0, 1.0);
            prop_assert_eq!(a, -impact_price_shift(-v, t, 1.0, 1.0, 1.0));
            prop_assert_eq!(v <= w, a <= impact_price_shift(w, t, 1.0, 1.0, 1.0));
        }

        #[test]
        fn exponent_at_least_one(x in 1e-6..1e8f64) {
            prop_assert!(apparent_exponent(x, 1.0) >= 1.0);
        }
    }
}
