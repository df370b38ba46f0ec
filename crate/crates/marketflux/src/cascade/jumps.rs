//! Relaxation of log-volatility after news and stock-specific jumps and the
//! conditional probability of a following jump.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpKind {
    /// Exogenous shock relaxing through the whole ladder.
    News,
    /// Endogenous burst relaxing as t^{-1/2}.
    Stock,
}

/// Persistence h(t) = eps ln(tau0/|t|) clamped to [0, 1].
pub fn relaxation_h(t: f64, eps: f64, tau0: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    (eps * (tau0 / t.abs()).ln()).clamp(0.0, 1.0)
}

/// Deterministic relaxation omega(t0) h(t - t0) of a log-volatility excursion.
pub fn deterministic_relaxation(omega_t0: f64, lag: f64, eps: f64, tau0: f64) -> f64 {
    omega_t0 * relaxation_h(lag, eps, tau0)
}

/// Log-volatility pattern omega(t) after a jump of size omega0 at t = 0.
/// News: omega0/(1 - eps) [tau/t - eps (tau/t)^eps] for t > tau; stock: omega0 (t/tau)^{-1/2}.
pub fn jump_pattern(kind: JumpKind, omega0: f64, t: f64, tau: f64, eps: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("jump pattern needs t > 0, got {t}")));
    }
    if !(tau > 0.0) {
        return Err(param("tau must be positive"));
    }
    match kind {
        JumpKind::News => {
            if t <= tau {
                return Err(Error::Domain(format!("news pattern needs t > tau, got t = {t}")));
            }
            if !(eps > 0.0 && eps < 1.0) {
                return Err(param("eps must lie in (0, 1)"));
            }
            let r = tau / t;
            Ok(omega0 / (1.0 - eps) * (r - eps * r.powf(eps)))
        }
        JumpKind::Stock => Ok(omega0 * (t / tau).powf(-0.5)),
    }
}

/// Stationary log-normal density of V1 with ln(V1/a0) of variance 2 lambda^2/eps.
pub fn volatility_lognormal_pdf(v1: f64, a0: f64, eps: f64, lambda_sq: f64) -> f64 {
    if v1 <= 0.0 {
        return 0.0;
    }
    let s2 = 2.0 * lambda_sq / eps;
    let z = (v1 / a0).ln();
    (-z * z / (2.0 * s2)).exp() / (v1 * (2.0 * std::f64::consts::PI * s2).sqrt())
}

/// Inputs of the conditional jump probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpCondition {
    pub kind: JumpKind,
    pub omega0: f64,
    /// Probability weight of the initial jump.
    pub pn: f64,
    pub v1: f64,
    pub a0: f64,
    pub tau: f64,
    pub eps: f64,
    pub lambda_sq: f64,
}

/// P_n P(V1) exp[eps omega(t) ln(V1/a0)/(2 lambda^2)]: the log-normal weight of V1
/// with its centre displaced by the relaxing pattern omega(t), to first order.
pub fn jump_conditional_probability(c: &JumpCondition, t: f64) -> Result<f64> {
    if !(c.lambda_sq > 0.0 && c.eps > 0.0 && c.a0 > 0.0 && c.v1 > 0.0 && c.pn >= 0.0) {
        return Err(param("need lambda_sq, eps, a0, v1 > 0 and pn >= 0"));
    }
    let w = jump_pattern(c.kind, c.omega0, t, c.tau, c.eps)?;
    let base = c.pn * volatility_lognormal_pdf(c.v1, c.a0, c.eps, c.lambda_sq);
    Ok(base * (c.eps * w * (c.v1 / c.a0).ln() / (2.0 * c.lambda_sq)).exp())
}

/// Relative excess of the conditional probability over the unconditional one.
pub fn jump_excess(c: &JumpCondition, t: f64) -> Result<f64> {
    let base = c.pn * volatility_lognormal_pdf(c.v1, c.a0, c.eps, c.lambda_sq);
    Ok(jump_conditional_probability(c, t)? / base - 1.0)
}
