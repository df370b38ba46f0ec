use marketflux::coalescence::{
    critical_size_at, firm_entropy_grid, log_grid, pareto_exponent, scaled_cutoff, solve_coalescence, CoalescenceParams,
};
use serde::Serialize;

use crate::config::CoalesceConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, OutputDir};

#[derive(Serialize)]
struct Summary {
    params: CoalescenceParams,
    t_end: f64,
    gc: f64,
    /// Zipf exponent 1 - beta m of the small-beta limit.
    gamma_effective: f64,
    gamma0: f64,
    u0_infinite: bool,
    delta: f64,
    delta_times_t: f64,
    unemployment: f64,
    balance_residual: f64,
    /// Largest |F - exp[-(1/beta - m) u^beta]| on the grid.
    stationary_sup_error: f64,
}

pub fn run(c: &CoalesceConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if c.points < 2 {
        return Err(CliError::input("size grid needs at least 2 points"));
    }
    let p = CoalescenceParams {
        beta: c.beta,
        m: c.m,
        q: c.q,
        p: c.p,
        q0: c.q0,
        u_star: c.u_star,
        t0: c.t0,
        ..CoalescenceParams::default()
    };
    p.validate()?;
    if !(c.t_end > c.t0) {
        return Err(CliError::input("t_end must exceed t0"));
    }
    let (gc, _) = critical_size_at(&p, c.t_end, 1.0);
    let grid = log_grid(1e-6 * gc, 1.05 * scaled_cutoff(&p) * gc, c.points);
    let sol = solve_coalescence(&p, c.t_end, &grid)?;
    let u = p.u_star + sol.delta;
    let s = firm_entropy_grid(&grid, &p, u)?;
    let rows = (0..grid.len()).map(|i| vec![grid[i], sol.distribution.density[i], sol.cdf[i], s[i]]);
    out.write_csv("coalesce.csv", &["G", "f", "F", "S"], rows)?;
    let sup = sol
        .scaled
        .iter()
        .zip(&sol.cdf)
        .map(|(u, f)| (f - (-p.stretch() * u.powf(p.beta)).exp()).abs())
        .fold(0.0, f64::max);
    let summary = Summary {
        params: p,
        t_end: c.t_end,
        gc: sol.gc,
        gamma_effective: pareto_exponent(p.beta, p.m),
        gamma0: sol.gamma0,
        u0_infinite: sol.u0.is_infinite(),
        delta: sol.delta,
        delta_times_t: sol.delta_times_t,
        unemployment: u,
        balance_residual: sol.balance_residual,
        stationary_sup_error: sup,
    };
    out.write_json("summary.json", &summary)?;
    Ok(Vec::new())
}
