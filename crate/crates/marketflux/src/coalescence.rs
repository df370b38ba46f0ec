//! Mean-field coalescence of firm sizes: Zipf and stretched-exponential laws,
//! critical size, firm and market entropy, and the characteristics solver.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{param, Error, Result};
use crate::numerics::quad::integrate_with;

/// Rank-plot exponent of US business firms reported alongside the model value.
pub const EMPIRICAL_US_FIRM_GAMMA: f64 = 1.059;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceParams {
    /// Size-effect exponent, 0 < beta <= 1.
    pub beta: f64,
    /// Logarithmic supply rate d ln Q / d ln t.
    pub m: f64,
    /// Hiring coefficient in r_G = q * Delta.
    pub q: f64,
    /// Job-destruction coefficient.
    pub p: f64,
    /// Supply scale in Q(t) = Q0 t^m.
    pub q0: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// Natural unemployment.
    pub u_star: f64,
    /// Coalescent start time.
    pub t0: f64,
}

impl Default for CoalescenceParams {
    fn default() -> Self {
        Self { beta: 0.5, m: 1.0, q: 0.01, p: 1.0, q0: 1e6, g_min: 1.0, g_max: 1e6, u_star: 10.0, t0: 10.0 }
    }
}

impl CoalescenceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(param(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.g_min >= 1.0 && self.g_max > self.g_min) {
            return Err(param("need 1 <= g_min < g_max"));
        }
        if self.stretch() <= 0.0 {
            return Err(param("1/beta - m must be positive"));
        }
        if !(self.q > 0.0 && self.p > 0.0 && self.q0 > 0.0 && self.t0 > 0.0 && self.u_star >= 0.0) {
            return Err(param("q, p, q0, t0 must be positive and u_star non-negative"));
        }
        Ok(())
    }

    /// 1/beta - m, the coefficient of the stretched exponent.
    pub fn stretch(&self) -> f64 {
        1.0 / self.beta - self.m
    }

    /// Supply Q(t) = Q0 t^m.
    pub fn supply(&self, t: f64) -> f64 {
        self.q0 * t.powf(self.m)
    }
}

/// Zipf density Q / ln(Gmax/Gmin) * G^-2 on [Gmin, Gmax].
pub fn zipf_density(g: f64, p: &CoalescenceParams, q: f64) -> Result<f64> {
    if !(g >= p.g_min && g <= p.g_max) {
        return Err(Error::Domain(format!("size {g} outside [{}, {}]", p.g_min, p.g_max)));
    }
    Ok(q / (p.g_max / p.g_min).ln() / (g * g))
}

/// Fraction of firms larger than G under the Zipf law.
pub fn zipf_cdf(g: f64, p: &CoalescenceParams) -> Result<f64> {
    if !(g >= p.g_min && g <= p.g_max) {
        return Err(Error::Domain(format!("size {g} outside [{}, {}]", p.g_min, p.g_max)));
    }
    Ok((1.0 / g - 1.0 / p.g_max) / (1.0 / p.g_min - 1.0 / p.g_max))
}

/// Stretched exponent exp[-(1/beta - m)(G/Gc)^beta].
pub fn stretched_exponent_cdf(g: f64, p: &CoalescenceParams, gc: f64) -> Result<f64> {
    if !(g > 0.0 && gc > 0.0) {
        return Err(Error::Domain("sizes must be positive".into()));
    }
    let s = p.stretch();
    if s <= 0.0 {
        return Err(param("1/beta - m must be positive"));
    }
    Ok((-s * (g / gc).powf(p.beta)).exp())
}

/// Pareto exponent 1 - beta*m of the small-beta limit.
pub fn pareto_exponent(beta: f64, m: f64) -> f64 {
    1.0 - beta * m
}

/// Income temperature T = p / [r_G (1 - m)].
pub fn income_temperature(p: f64, r_g: f64, m: f64) -> Result<f64> {
    let t = p / (r_g * (1.0 - m));
    if !(t > 0.0) || !t.is_finite() {
        return Err(param("income temperature must be positive"));
    }
    Ok(t)
}

/// Income density: exponential for one source, G^n e^{-G/T} for n > 1 sources.
pub fn income_pdf(g: f64, t: f64, n: u32) -> Result<f64> {
    if !(t > 0.0) {
        return Err(param("temperature must be positive"));
    }
    if n == 0 {
        return Err(param("source count must be at least 1"));
    }
    if g < 0.0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok((-g / t).exp() / t);
    }
    let nf = n as f64;
    Ok((nf * (g / t).ln() - g / t - ln_gamma(nf + 1.0)).exp() / t)
}

/// Critical size (p / r_G)^{1/beta}.
pub fn critical_size(p: &CoalescenceParams, r_g: f64) -> Result<f64> {
    if !(r_g > 0.0) {
        return Err(param("Gibrat rate must be positive"));
    }
    if !(p.p > 0.0) {
        return Err(param("job-destruction coefficient must be positive"));
    }
    Ok((p.p / r_g).powf(1.0 / p.beta))
}

/// Growth-rate dispersion sigma * G^-beta.
pub fn size_dependent_dispersion(g: f64, sigma: f64, beta: f64) -> f64 {
    sigma * g.powf(-beta)
}

/// Linear-in-log time dependence beta(tau) = beta0 - beta1 ln tau.
pub fn beta_of_tau(beta0: f64, beta1: f64, tau: f64) -> f64 {
    beta0 - beta1 * tau.ln()
}

/// Slope beta1 through two (tau, beta) observations.
pub fn beta_slope(tau_a: f64, beta_a: f64, tau_b: f64, beta_b: f64) -> f64 {
    (beta_a - beta_b) / (tau_b / tau_a).ln()
}

/// Critical size Gc(t) = (beta p t / gamma0)^{1/beta} and excess unemployment
/// Delta(t) = gamma0/(q beta t), so that Gc = (p / (q Delta))^{1/beta}.
pub fn critical_size_at(p: &CoalescenceParams, t: f64, gamma0: f64) -> (f64, f64) {
    let gc = (p.beta * p.p * t / gamma0).powf(1.0 / p.beta);
    (gc, gamma0 / (p.q * p.beta * t))
}

/// Scaled velocity du/dtau = gamma (u - u^{1-beta}) - u.
pub fn scaled_velocity(u: f64, gamma: f64, beta: f64) -> f64 {
    gamma * (u - u.powf(1.0 - beta)) - u
}

/// Locking point of the scaled velocity searched for u <= u_cap: the smallest
/// gamma with sup v >= 0 and the tangency location. As u_cap grows the result
/// tends to gamma0 = 1 with u0 at the cap.
pub fn locking_point(beta: f64, u_cap: f64) -> (f64, f64) {
    let sup = |g: f64| {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let n = 400;
        for i in 1..=n {
            let u = (u_cap.ln() * i as f64 / n as f64).exp();
            let v = scaled_velocity(u, g, beta);
            if v > best.0 {
                best = (v, u);
            }
        }
        best
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    while sup(hi).0 < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sup(mid).0 >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, sup(hi).1)
}

/// Scaled u beyond which the stationary CDF falls below 1e-12.
pub fn scaled_cutoff(p: &CoalescenceParams) -> f64 {
    (27.631_021_115_928_547 / p.stretch()).powf(1.0 / p.beta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirmDistribution {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoalescenceSolution {
    pub distribution: FirmDistribution,
    /// Scaled sizes u = G / Gc(t) of the grid.
    pub scaled: Vec<f64>,
    /// Fraction of firms above each grid size, obtained by integrating the solution.
    pub cdf: Vec<f64>,
    pub gc: f64,
    pub delta: f64,
    pub delta_times_t: f64,
    pub tau: f64,
    pub gamma0: f64,
    pub u0: f64,
    /// (U + int G f dG - Q) / Q at the output time.
    pub balance_residual: f64,
}

/// Trace a characteristic of du/dtau = -u^{1-beta} back over `tau` with RK4,
/// step limited to a 0.5% relative change in u.
fn trace_back(u: f64, tau: f64, beta: f64) -> f64 {
    let f = |x: f64| x.powf(1.0 - beta);
    let mut x = u;
    let mut left = tau;
    while left > 0.0 {
        let h = left.min(0.005 * x / f(x)).max(1e-12);
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        left -= h;
    }
    x
}

/// Scaled density at coalescent start, proportional to -dF/du.
fn initial_scaled(u: f64, p: &CoalescenceParams) -> f64 {
    let s = p.stretch();
    s * p.beta * u.powf(p.beta - 1.0) * (-s * u.powf(p.beta)).exp()
}

/// Transport of the start profile to scaled time tau; the flux v*phi is
/// conserved along each characteristic.
fn transported(u: f64, tau: f64, p: &CoalescenceParams) -> f64 {
    let u0 = trace_back(u, tau, p.beta);
    let v = |x: f64| x.powf(1.0 - p.beta);
    initial_scaled(u0, p) * v(u0) / v(u)
}

/// Integrate the coalescence kinetics with gamma locked at 1 from t0 to t_end
/// and return the firm distribution on the given size grid.
pub fn solve_coalescence(p: &CoalescenceParams, t_end: f64, grid: &[f64]) -> Result<CoalescenceSolution> {
    p.validate()?;
    if !(t_end > p.t0) {
        return Err(param("t_end must exceed the coalescent start time"));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] <= 0.0 {
        return Err(Error::Domain("size grid must be positive and strictly increasing".into()));
    }
    let gamma0 = 1.0;
    let (gc0, _) = critical_size_at(p, p.t0, gamma0);
    let (gc, delta) = critical_size_at(p, t_end, gamma0);
    let tau = (gc / gc0).ln();
    let scaled: Vec<f64> = grid.iter().map(|g| g / gc).collect();
    let u_max = scaled_cutoff(p);
    if *scaled.last().unwrap() < u_max {
        return Err(Error::Domain(format!(
            "grid reaches u = {:.4} but must cover u_max = {:.4}",
            scaled.last().unwrap(),
            u_max
        )));
    }

    // Amplitude fixed by the balance at t0, where int u phi du = (Q - U) / Gc.
    let first_moment = |tau: f64| -> f64 {
        let b = p.beta;
        // substitute u = w^{1/beta} to remove the u^{beta-1} endpoint behaviour
        integrate_with(
            |w: f64| {
                if w <= 0.0 {
                    return 0.0;
                }
                let u = w.powf(1.0 / b);
                u * transported(u, tau, p) * u.powf(1.0 - b) / b
            },
            0.0,
            u_max.powf(b),
            1e-14,
            1e-11,
        )
        .value
    };
    let u_t0 = p.u_star + gamma0 / (p.q * p.beta * p.t0);
    let amp = (p.supply(p.t0) - u_t0) / (gc0 * first_moment(0.0));

    let density: Vec<f64> = scaled.iter().map(|&u| amp * transported(u, tau, p) / gc).collect();

    // Fraction above each grid point by integrating the transported profile in w = u^beta.
    let b = p.beta;
    let mass_between = |a: f64, c: f64| {
        integrate_with(
            |w: f64| {
                if w <= 0.0 {
                    return 0.0;
                }
                let u = w.powf(1.0 / b);
                transported(u, tau, p) * u.powf(1.0 - b) / b
            },
            a.powf(b),
            c.powf(b),
            1e-15,
            1e-12,
        )
        .value
    };
    let total = mass_between(0.0, u_max);
    let mut cdf = vec![0.0; scaled.len()];
    let mut above = 0.0;
    let mut upper = u_max.max(*scaled.last().unwrap());
    for i in (0..scaled.len()).rev() {
        let u = scaled[i];
        if u < upper {
            above += mass_between(u, upper);
            upper = u;
        }
        cdf[i] = (above / total).min(1.0);
    }

    let u_now = p.u_star + delta;
    let employed = amp * gc * first_moment(tau) * 1.0;
    let q = p.supply(t_end);
    let balance_residual = (u_now + employed - q) / q;
    let (gamma_lock, u_lock) = (gamma0, f64::INFINITY);

    Ok(CoalescenceSolution {
        distribution: FirmDistribution { grid: grid.to_vec(), density, time: t_end },
        scaled,
        cdf,
        gc,
        delta,
        delta_times_t: delta * t_end,
        tau,
        gamma0: gamma_lock,
        u0: u_lock,
        balance_residual,
    })
}

/// Log-spaced size grid covering [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Firm entropy S(G) = int_0^G ln[p_c/p_d] dG' with p_c = qUG and
/// p_d = qU*G + pG^{1-beta}; the constant is fixed by S(0) = 0.
pub fn firm_entropy(g: f64, p: &CoalescenceParams, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(param("unemployment must be positive"));
    }
    if !(g >= 0.0) {
        return Err(Error::Domain("size must be non-negative".into()));
    }
    Ok(entropy_between(0.0, g, p, u))
}

fn entropy_integrand(g: f64, p: &CoalescenceParams, u: f64) -> f64 {
    if g <= 0.0 {
        return f64::NEG_INFINITY;
    }
    // ln[U / (U* + (p/q) G^-beta)], written to stay finite as G -> 0
    let u0 = p.p / p.q;
    let gb = g.powf(p.beta);
    (u * gb).ln() - (p.u_star * gb + u0).ln()
}

fn entropy_between(a: f64, b: f64, p: &CoalescenceParams, u: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // w = G^{1/2} smooths the logarithmic endpoint at zero
    integrate_with(|w| 2.0 * w * entropy_integrand(w * w, p, u), a.sqrt(), b.sqrt(), 1e-13, 1e-12).value
}

/// Firm entropy on an increasing grid, accumulated interval by interval.
pub fn firm_entropy_grid(grid: &[f64], p: &CoalescenceParams, u: f64) -> Result<Vec<f64>> {
    if !(u > 0.0) {
        return Err(param("unemployment must be positive"));
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &g in grid {
        acc += entropy_between(prev, g, p, u);
        prev = g;
        out.push(acc);
    }
    Ok(out)
}

/// Market entropy S = -U ln(U/(e U0)) + int S(G) f dG - mu (Q - U), mu = ln(U/U0), U0 = p/q.
pub fn market_entropy(dist: &FirmDistribution, p: &CoalescenceParams, u: f64, q_supply: f64) -> Result<f64> {
    let u0 = p.p / p.q;
    let s = firm_entropy_grid(&dist.grid, p, u)?;
    let weighted: Vec<f64> = s.iter().zip(&dist.density).map(|(s, f)| s * f).collect();
    let firms = trapezoid(&dist.grid, &weighted);
    let mu = (u / u0).ln();
    Ok(-u * (u / (std::f64::consts::E * u0)).ln() + firms - mu * (q_supply - u))
}

/// Trapezoid rule on a non-uniform grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FillipsReport {
    /// Phillips-curve constant a = eta q.
    pub a: f64,
    /// Wage decay exponent zeta = a/(beta q).
    pub zeta: f64,
    /// Growth exponent zeta/eta of the optimal size.
    pub gc_exponent: f64,
    /// |zeta/eta - 1/beta|, zero when the closure holds.
    pub closure_error: f64,
}

/// Consistency of the profit-maximum size with the wage law and the critical-size growth.
pub fn fillips_consistency(eta: f64, q: f64, beta: f64) -> Result<FillipsReport> {
    if !(eta > 0.0 && q > 0.0 && beta > 0.0) {
        return Err(param("eta, q and beta must be positive"));
    }
    let a = eta * q;
    let zeta = a / (beta * q);
    let gc_exponent = zeta / eta;
    Ok(FillipsReport { a, zeta, gc_exponent, closure_error: (gc_exponent - 1.0 / beta).abs() })
}

/// Wage path from d ln w/dt = -a Delta(t), Delta = gamma0/(q beta t), integrated by RK4
/// from t0 with w(t0) = 1. Returns (t, w) pairs on a log grid.
pub fn wage_path(a: f64, q: f64, beta: f64, gamma0: f64, t0: f64, t1: f64, n: usize) -> Vec<(f64, f64)> {
    let rate = |t: f64| -a * gamma0 / (q * beta * t);
    let ts = log_grid(t0, t1, n);
    let mut out = Vec::with_capacity(n);
    let mut lw = 0.0;
    out.push((ts[0], 1.0));
    for w in ts.windows(2) {
        let sub = 64;
        let h = (w[1] - w[0]) / sub as f64;
        let mut t = w[0];
        for _ in 0..sub {
            let k1 = rate(t);
            let k2 = rate(t + 0.5 * h);
            let k4 = rate(t + h);
            lw += h / 6.0 * (k1 + 4.0 * k2 + k4);
            t += h;
        }
        out.push((w[1], lw.exp()));
    }
    out
}
