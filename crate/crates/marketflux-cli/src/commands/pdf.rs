use std::f64::consts::{FRAC_PI_2, PI};

use marketflux::numerics::quad::{integrate_pieces, integrate_polar, integrate_to_inf};
use marketflux::pdf::bivariate::DoubleGaussian;
use marketflux::pdf::{
    asym_fat_tail_pdf, asym_tent_pdf, conditional_response, conditional_sigma, fat_tail_pdf, linear_grid,
    markovian_bivariate_pdf, tent_pdf, univariate_pdf, AsymTentParams, DoubleGaussianParams, EffectiveMarket,
};
use serde::Serialize;

use crate::config::{PdfConfig, PdfModel};
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, OutputDir};

/// Mass tolerance of one-dimensional and planar densities.
pub const UNIVARIATE_TOL: f64 = 1e-6;
pub const BIVARIATE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Normalization {
    pub mass: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub ok: bool,
}

impl Normalization {
    fn new(mass: f64, tolerance: f64) -> Self {
        let abs_error = (mass - 1.0).abs();
        Self { mass, abs_error, tolerance, ok: abs_error < tolerance }
    }
}

#[derive(Serialize)]
struct Summary {
    model: PdfModel,
    normalization: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_warning: Option<bool>,
}

type Density = Box<dyn Fn(f64, f64) -> f64>;

struct Bivariate {
    density: Density,
    /// Angles of kink lines through the origin.
    kinks: Vec<f64>,
    /// Kink locations in y along the column x.
    column_breaks: Box<dyn Fn(f64) -> Vec<f64>>,
    response: Option<DoubleGaussianParams>,
}

fn univariate(c: &PdfConfig) -> CliResult<Box<dyn Fn(f64) -> f64>> {
    Ok(match c.model {
        PdfModel::Tent => {
            tent_pdf(0.0, c.sigma)?;
            let s = c.sigma;
            Box::new(move |x| tent_pdf(x, s).expect("validated"))
        }
        PdfModel::FatTail => {
            fat_tail_pdf(0.0, c.sigma)?;
            let s = c.sigma;
            Box::new(move |x| fat_tail_pdf(x, s).expect("validated"))
        }
        PdfModel::AsymTent => {
            let p = AsymTentParams::new(c.alpha, c.zeta)?;
            Box::new(move |x| asym_tent_pdf(x, &p).expect("validated"))
        }
        PdfModel::AsymFatTail => {
            let p = AsymTentParams::new(c.alpha, c.zeta)?;
            Box::new(move |x| asym_fat_tail_pdf(x, &p).expect("validated"))
        }
        PdfModel::Marginal => {
            let p = DoubleGaussianParams::new(c.sigma, c.nu, c.phi_minus, c.phi_plus)?;
            Box::new(move |x| univariate_pdf(x, &p).expect("validated"))
        }
        _ => unreachable!("bivariate model"),
    })
}

fn bivariate(c: &PdfConfig) -> CliResult<Bivariate> {
    let axes = vec![0.0, FRAC_PI_2, PI, 1.5 * PI];
    Ok(match c.model {
        PdfModel::Markovian => {
            markovian_bivariate_pdf(1.0, 0.0, c.sigma, c.eps)?;
            let (s, e) = (c.sigma, c.eps);
            Bivariate {
                density: Box::new(move |x, y| {
                    if x == 0.0 && y == 0.0 {
                        0.0
                    } else {
                        markovian_bivariate_pdf(x, y, s, e).expect("validated")
                    }
                }),
                kinks: Vec::new(),
                column_breaks: Box::new(move |x| vec![e * x]),
                response: None,
            }
        }
        PdfModel::EffectiveMarket => {
            let em = EffectiveMarket::new(c.sigma, c.nu)?;
            Bivariate {
                density: Box::new(move |x, y| em.density(x, y)),
                kinks: axes,
                column_breaks: Box::new(|_| vec![0.0]),
                response: Some(DoubleGaussianParams::new(c.sigma, c.nu, 0.0, 0.0)?),
            }
        }
        PdfModel::DoubleGaussian => {
            let p = DoubleGaussianParams::new(c.sigma, c.nu, c.phi_minus, c.phi_plus)?;
            let dg = DoubleGaussian::new(&p)?;
            let (sm, cm) = p.phi_minus.sin_cos();
            let (sp, cp) = p.phi_plus.sin_cos();
            Bivariate {
                density: Box::new(move |x, y| dg.density(x, y)),
                kinks: dg.kink_angles().to_vec(),
                column_breaks: Box::new(move |x| {
                    let mut b = Vec::new();
                    if sp.abs() > 1e-12 {
                        b.push(x * cm / sp);
                    }
                    if cp.abs() > 1e-12 {
                        b.push(-x * sm / cp);
                    }
                    b
                }),
                response: Some(p),
            }
        }
        _ => unreachable!("univariate model"),
    })
}

/// Mass of a one-dimensional density by adaptive quadrature on each half line.
pub fn univariate_mass(f: &dyn Fn(f64) -> f64) -> f64 {
    integrate_to_inf(f, 0.0, 1e-14, 1e-12).value + integrate_to_inf(|x| f(-x), 0.0, 1e-14, 1e-12).value
}

pub fn run(c: &PdfConfig, out: &mut OutputDir) -> CliResult<Vec<Artifact>> {
    if c.points < 2 || !(c.x_max > 0.0) {
        return Err(CliError::input("curve needs at least 2 points and a positive x_max"));
    }
    let xs = linear_grid(-c.x_max, c.x_max, c.points);
    let mut summary = Summary { model: c.model, normalization: Normalization::new(f64::NAN, 0.0), eps: None, theta: None, eps_warning: None };
    if !c.model.is_bivariate() {
        let f = univariate(c)?;
        out.write_csv("curve.csv", &["x", "density"], xs.iter().map(|&x| vec![x, f(x)]))?;
        summary.normalization = Normalization::new(univariate_mass(&*f), UNIVARIATE_TOL);
        if c.model == PdfModel::Marginal {
            let p = DoubleGaussianParams::new(c.sigma, c.nu, c.phi_minus, c.phi_plus)?;
            summary.theta = Some(p.theta());
        }
    } else {
        let b = bivariate(c)?;
        let f = &b.density;
        let r_max = 40.0 * c.sigma;
        let mass = integrate_polar(f, &b.kinks, r_max, 1e-10, 1e-8);
        summary.normalization = Normalization::new(mass, BIVARIATE_TOL);
        let rows = xs.iter().flat_map(|&x| xs.iter().map(move |&y| (x, y))).map(|(x, y)| vec![x, y, f(x, y)]);
        out.write_csv("grid.csv", &["x", "y", "value"], rows.collect::<Vec<_>>())?;
        let marginal = |x: f64| {
            let mut pts = vec![-r_max, r_max];
            pts.extend((b.column_breaks)(x).into_iter().filter(|v| v.abs() < r_max));
            pts.sort_by(|a, b| a.total_cmp(b));
            integrate_pieces(|y| f(x, y), &pts, 1e-14, 1e-10)
        };
        out.write_csv("curve.csv", &["x", "density"], xs.iter().map(|&x| vec![x, marginal(x)]))?;
        if let Some(p) = b.response {
            let mut rows = Vec::with_capacity(xs.len());
            for &x in &xs {
                rows.push(vec![x, conditional_response(x, &p)?, conditional_sigma(x, &p)?]);
            }
            out.write_csv("response.csv", &["x", "mean", "sigma"], rows)?;
            summary.eps = Some(p.eps());
            summary.theta = Some(p.theta());
            summary.eps_warning = Some(p.eps_warning());
        } else {
            summary.eps = Some(c.eps);
        }
    }
    out.write_json("summary.json", &summary)?;
    Ok(Vec::new())
}
