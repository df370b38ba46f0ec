//! Pipelines behind each subcommand.

mod coalesce;
mod estimate;
mod impact;
mod mill;
mod pdf;
mod simulate;

use std::path::Path;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::{Manifest, OutputDir};

/// Executes the configured pipeline, writing its artifacts and manifest under `out`.
pub fn run(config: &RunConfig, out: &Path) -> CliResult<Manifest> {
    let mut dir = OutputDir::create(out)?;
    let inputs = match config {
        RunConfig::Simulate(c) => simulate::run(c, &mut dir)?,
        RunConfig::Pdf(c) => pdf::run(c, &mut dir)?,
        RunConfig::Mill(c) => mill::run(c, &mut dir)?,
        RunConfig::Coalesce(c) => coalesce::run(c, &mut dir)?,
        RunConfig::Estimate(c) => estimate::run(c, &mut dir)?,
        RunConfig::Impact(c) => impact::run(c, &mut dir)?,
    };
    dir.finish(config, inputs)
}

/// Infinite values become null in JSON; this keeps them explicit.
pub(crate) fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}
