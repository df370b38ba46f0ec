use marketflux::cascade::{crossover_time, simulate_replicas, CascadeParams};
use serde::Serialize;

use super::finite_or_none;
use crate::config::SimulateConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, OutputDir};

#[derive(Serialize)]
struct Summary {
    params: CascadeParams,
    generations: usize,
    tau0_effective: f64,
    diffusion: f64,
    crossover_time: Option<f64>,
    steps: usize,
    replicas: usize,
    warmup: usize,
    files: Vec<String>,
}

pub fn params(c: &SimulateConfig) -> CliResult<CascadeParams> {
    let mut p = CascadeParams::new(c.tau0, c.tauk, c.branches, c.lambda0_sq, c.lambda_sq, c.d0, c.l)?;
    p.gamma = c.gamma;
    p.vk = c.vk;
    p.validate()?;
    Ok(p)
}

pub fn run(c: &SimulateConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if c.steps == 0 || c.replicas == 0 {
        return Err(CliError::input("steps and replicas must be positive"));
    }
    let p = params(c)?;
    let reps = simulate_replicas(&p, c.steps, c.seed, c.replicas)?;
    let mut files = Vec::new();
    for (r, s) in reps.iter().enumerate() {
        let name = if c.replicas == 1 { "series.csv".to_string() } else { format!("series_{r:03}.csv") };
        let rows = (0..s.len()).map(|i| {
            vec![i as f64 * s.dt, s.price_increments[i], s.volume_increments[i], s.volatility_log[i]]
        });
        out.write_csv(&name, &["t", "dP", "dV", "omega"], rows)?;
        files.push(name);
    }
    let summary = Summary {
        params: p,
        generations: p.generations(),
        tau0_effective: p.tau0_effective(),
        diffusion: p.diffusion(),
        crossover_time: finite_or_none(crossover_time(&p)),
        steps: c.steps,
        replicas: c.replicas,
        warmup: reps[0].warmup,
        files,
    };
    out.write_json("summary.json", &summary)?;
    Ok(Vec::new())
}
