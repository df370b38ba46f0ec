//! Asymmetry of the push-response density under reflections: mill patterns.

use std::f64::consts::PI;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bivariate::DoubleGaussian;
use super::{BivariateGrid, DoubleGaussianParams};
use crate::error::{param, Error, Result};

/// Reflection axis of the push-response plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MillAxis {
    /// y = 0
    Horizontal,
    /// y = x
    Diagonal,
    /// x = 0
    Vertical,
    /// y = -x
    AntiDiagonal,
}

impl MillAxis {
    pub fn reflect(&self, x: f64, y: f64) -> (f64, f64) {
        match self {
            MillAxis::Horizontal => (x, -y),
            MillAxis::Diagonal => (y, x),
            MillAxis::Vertical => (-x, y),
            MillAxis::AntiDiagonal => (-y, -x),
        }
    }
}

impl FromStr for MillAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace(' ', "").as_str() {
            "y=0" | "horizontal" => Ok(MillAxis::Horizontal),
            "y=x" | "diagonal" => Ok(MillAxis::Diagonal),
            "x=0" | "vertical" => Ok(MillAxis::Vertical),
            "y=-x" | "antidiagonal" => Ok(MillAxis::AntiDiagonal),
            other => Err(param(format!("unknown mill axis {other:?}"))),
        }
    }
}

/// Signed asymmetry P^a(x, y) = [P(x, y) - P(reflected)]/2 on the grid.
pub fn antisymmetric_grid(p: &DoubleGaussianParams, axis: MillAxis, xs: &[f64], ys: &[f64]) -> Result<BivariateGrid> {
    let dg = DoubleGaussian::new(p)?;
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| {
            ys.iter().map(move |&y| {
                let (u, v) = axis.reflect(x, y);
                0.5 * (dg.density(x, y) - dg.density(u, v))
            })
        })
        .collect();
    Ok(BivariateGrid { xs: xs.to_vec(), ys: ys.to_vec(), values })
}

/// Positive part (P^a + |P^a|)/2 of the asymmetry.
pub fn mill_asymmetry_grid(p: &DoubleGaussianParams, axis: MillAxis, xs: &[f64], ys: &[f64]) -> Result<BivariateGrid> {
    let mut g = antisymmetric_grid(p, axis, xs, ys)?;
    for v in g.values.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(g)
}

/// Blade structure of a signed asymmetry grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BladeReport {
    pub positive_blades: usize,
    pub negative_blades: usize,
    /// Mass fractions of the positive blades, largest first.
    pub blade_fractions: Vec<f64>,
    /// Blades holding at least DOMINANT_FRACTION of the positive mass.
    pub dominant_blades: usize,
    /// Sign changes of the asymmetry along a circle through the blades.
    pub sign_changes: usize,
    /// Largest |P^a| on the grid.
    pub peak: f64,
}

/// Level below which the asymmetry counts as zero, relative to its peak.
pub const BLADE_THRESHOLD: f64 = 0.01;

/// Mass fraction that makes a blade dominant.
pub const DOMINANT_FRACTION: f64 = 0.1;

/// Connected regions (4-neighbour) of P^a above and below the threshold, and the
/// angular sign sequence on the circle of the given radius.
pub fn blade_report(g: &BivariateGrid, radius: f64) -> BladeReport {
    let peak = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let level = BLADE_THRESHOLD * peak;
    let (nx, ny) = (g.xs.len(), g.ys.len());
    let mut masses = Vec::new();
    let mut negative = 0;
    if peak > 0.0 {
        for sign in [1.0, -1.0] {
            let mut seen = vec![false; nx * ny];
            for start in 0..nx * ny {
                if seen[start] || sign * g.values[start] <= level {
                    continue;
                }
                let mut stack = vec![start];
                seen[start] = true;
                let mut mass = 0.0;
                while let Some(c) = stack.pop() {
                    mass += sign * g.values[c];
                    let (i, j) = (c / ny, c % ny);
                    let mut push = |ii: usize, jj: usize| {
                        let n = ii * ny + jj;
                        if !seen[n] && sign * g.values[n] > level {
                            seen[n] = true;
                            stack.push(n);
                        }
                    };
                    if i > 0 {
                        push(i - 1, j);
                    }
                    if i + 1 < nx {
                        push(i + 1, j);
                    }
                    if j > 0 {
                        push(i, j - 1);
                    }
                    if j + 1 < ny {
                        push(i, j + 1);
                    }
                }
                if sign > 0.0 {
                    masses.push(mass);
                } else {
                    negative += 1;
                }
            }
        }
    }
    let total: f64 = masses.iter().sum();
    let mut fractions: Vec<f64> = masses.iter().map(|m| m / total).collect();
    fractions.sort_by(|a, b| b.total_cmp(a));
    let dominant = fractions.iter().filter(|&&f| f >= DOMINANT_FRACTION).count();
    BladeReport {
        positive_blades: fractions.len(),
        negative_blades: negative,
        blade_fractions: fractions,
        dominant_blades: dominant,
        sign_changes: if peak > 0.0 { ring_sign_changes(g, radius, level) } else { 0 },
        peak,
    }
}

fn bilinear(g: &BivariateGrid, x: f64, y: f64) -> Option<f64> {
    let locate = |v: &[f64], t: f64| -> Option<(usize, f64)> {
        if t < v[0] || t > v[v.len() - 1] {
            return None;
        }
        let i = v.partition_point(|&a| a <= t).clamp(1, v.len() - 1) - 1;
        Some((i, (t - v[i]) / (v[i + 1] - v[i])))
    };
    let (i, a) = locate(&g.xs, x)?;
    let (j, b) = locate(&g.ys, y)?;
    Some(
        (1.0 - a) * (1.0 - b) * g.get(i, j)
            + a * (1.0 - b) * g.get(i + 1, j)
            + (1.0 - a) * b * g.get(i, j + 1)
            + a * b * g.get(i + 1, j + 1),
    )
}

fn ring_sign_changes(g: &BivariateGrid, radius: f64, level: f64) -> usize {
    let n = 1440;
    let signs: Vec<f64> = (0..n)
        .filter_map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            bilinear(g, radius * t.cos(), radius * t.sin())
        })
        .filter(|v| v.abs() > level)
        .map(f64::signum)
        .collect();
    if signs.is_empty() {
        return 0;
    }
    let mut changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if signs[0] != signs[signs.len() - 1] {
        changes += 1;
    }
    changes
}

/// Asymmetry grid on the square [-extent, extent]^2 with n points per side and its blades.
pub fn mill_report(p: &DoubleGaussianParams, axis: MillAxis, extent: f64, n: usize) -> Result<(BivariateGrid, BladeReport)> {
    if !(extent > 0.0 && n >= 3) {
        return Err(param("need extent > 0 and at least 3 grid points"));
    }
    let xs = super::linear_grid(-extent, extent, n);
    let g = antisymmetric_grid(p, axis, &xs, &xs)?;
    let r = blade_report(&g, p.sigma);
    Ok((g, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_market_has_no_asymmetry() {
        let p = DoubleGaussianParams::new(1.0, 0.95, 0.0, 0.0).unwrap();
        let xs = super::super::linear_grid(-3.0, 3.0, 13);
        for axis in [MillAxis::Horizontal, MillAxis::Diagonal, MillAxis::Vertical, MillAxis::AntiDiagonal] {
            let g = antisymmetric_grid(&p, axis, &xs, &xs).unwrap();
            assert!(g.values.iter().all(|&v| v == 0.0));
            assert_eq!(blade_report(&g, 1.0).positive_blades, 0);
        }
    }

    #[test]
    fn mill_has_four_blades() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.95, 8.0, 8.7).unwrap();
        for axis in [MillAxis::Horizontal, MillAxis::Diagonal] {
            let (_, r) = mill_report(&p, axis, 4.0, 81).unwrap();
            assert_eq!(r.positive_blades, 4);
            assert_eq!(r.dominant_blades, 4);
            assert_eq!(r.negative_blades, 4);
            assert_eq!(r.sign_changes, 8);
        }
    }

    #[test]
    fn acor_has_two_dominant_blades() {
        for p in [
            DoubleGaussianParams::from_degrees(1.0, 0.95, 14.0, 8.0).unwrap(),
            DoubleGaussianParams::from_degrees(1.0, 0.97, 12.5, 8.0).unwrap(),
        ] {
            let (_, r) = mill_report(&p, MillAxis::Horizontal, 4.0, 81).unwrap();
            assert_eq!(r.dominant_blades, 2, "{r:?}");
        }
    }

    #[test]
    fn positive_part_is_nonnegative() {
        let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 9.0, 8.0).unwrap();
        let xs = super::super::linear_grid(-2.0, 2.0, 9);
        let g = mill_asymmetry_grid(&p, MillAxis::Vertical, &xs, &xs).unwrap();
        assert!(g.values.iter().all(|&v| v >= 0.0));
        assert!(g.values.iter().any(|&v| v > 0.0));
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("y=-x".parse::<MillAxis>().unwrap(), MillAxis::AntiDiagonal);
        assert!("z=0".parse::<MillAxis>().is_err());
    }
}
