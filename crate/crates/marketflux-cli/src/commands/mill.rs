use marketflux::pdf::mill::mill_report;
use marketflux::pdf::{BladeReport, DoubleGaussianParams, MillAxis};
use serde::Serialize;

use crate::config::MillConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, OutputDir};

#[derive(Serialize)]
struct Summary {
    params: DoubleGaussianParams,
    eps: f64,
    axis: MillAxis,
    blades: BladeReport,
}

pub fn run(c: &MillConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if c.points < 3 || !(c.extent > 0.0) {
        return Err(CliError::input("mill grid needs at least 3 points and a positive extent"));
    }
    let p = DoubleGaussianParams::new(c.sigma, c.nu, c.phi_minus, c.phi_plus)?;
    let (g, blades) = mill_report(&p, c.axis, c.extent, c.points)?;
    let ny = g.ys.len();
    let rows = g.values.iter().enumerate().map(|(k, v)| vec![g.xs[k / ny], g.ys[k % ny], *v]);
    out.write_csv("grid.csv", &["x", "y", "value"], rows)?;
    out.write_json("summary.json", &Summary { params: p, eps: p.eps(), axis: c.axis, blades })?;
    Ok(Vec::new())
}
