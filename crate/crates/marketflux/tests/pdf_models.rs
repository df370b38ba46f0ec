use std::f64::consts::PI;

use marketflux::numerics::quad::{integrate_pieces, integrate_polar};
use marketflux::pdf::bivariate::DoubleGaussian;
use marketflux::pdf::sample::{histogram_chi_square, GenerativeSampler};
use marketflux::pdf::*;

fn mill() -> DoubleGaussianParams {
    DoubleGaussianParams::from_degrees(1.0, 0.95, 8.0, 8.7).unwrap()
}

fn marginal(dg: &DoubleGaussian, x: f64, swap: bool) -> f64 {
    let p = &dg.params;
    let (sm, cm) = p.phi_minus.sin_cos();
    let (sp, cp) = p.phi_plus.sin_cos();
    // kinks of the integrand along the line: u = 0 and v = 0
    let mut pts = vec![-40.0, 40.0, x * cm / sp, -x * sm / cp];
    if swap {
        pts = vec![-40.0, 40.0, -x * cp / sm, x * sp / cm];
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    integrate_pieces(|t| if swap { dg.density(t, x) } else { dg.density(x, t) }, &pts, 1e-13, 1e-10)
}

#[test]
fn double_gaussian_mass_and_correlator() {
    let p = mill();
    let dg = DoubleGaussian::new(&p).unwrap();
    let angles = dg.kink_angles();
    let mass = integrate_polar(|x, y| dg.density(x, y), &angles, 30.0, 1e-8, 1e-7);
    assert!((mass - 1.0).abs() < 1e-4, "mass {mass}");
    let cxy = integrate_polar(|x, y| x * y * dg.density(x, y), &angles, 40.0, 1e-8, 1e-7);
    assert!((cxy / p.eps() - 1.0).abs() < 0.05, "<xy> = {cxy}, eps = {}", p.eps());
}

#[test]
fn stationary_marginals_at_zero_eps() {
    let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 9.0, 9.0).unwrap();
    let dg = DoubleGaussian::new(&p).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=16 {
        let x = -4.0 + 0.5 * i as f64 + 0.01;
        let a = marginal(&dg, x, false);
        let b = marginal(&dg, x, true);
        let u = univariate_pdf(x, &p).unwrap();
        worst = worst.max((a - b).abs()).max((a - u).abs());
    }
    assert!(worst < 1e-6, "sup-norm {worst}");
}

#[test]
fn limit_chain() {
    let em = EffectiveMarket::new(1.0, 0.8).unwrap();
    let flat = DoubleGaussianParams::new(1.0, 0.8, 0.0, 0.0).unwrap();
    let free = EffectiveMarket::new(1.0, 0.0).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let (x, y) = (-2.0 + 0.5 * i as f64, -2.0 + 0.5 * j as f64);
            assert!((double_gaussian_pdf(x, y, &flat).unwrap() - em.density(x, y)).abs() < 1e-10);
            assert!((free.density(x, y) - tent_pdf(x, 1.0).unwrap() * tent_pdf(y, 1.0).unwrap()).abs() < 1e-15);
        }
    }
    // nu -> 1: Markovian form away from its logarithmic singularity at the origin
    let p = DoubleGaussianParams::from_degrees(1.0, 0.999, 8.0, 8.7).unwrap();
    for i in 0..12 {
        for &r in &[0.3, 1.0, 2.5] {
            let t = 2.0 * PI * i as f64 / 12.0 + 0.1;
            let (x, y) = (r * t.cos(), r * t.sin());
            let a = double_gaussian_pdf(x, y, &p).unwrap();
            let b = markovian_bivariate_pdf(x, y, 1.0, p.eps()).unwrap();
            assert!((a / b - 1.0).abs() < 0.02, "({x}, {y}): {a} {b}");
        }
    }
}

#[test]
fn monte_carlo_matches_density_at_zero_eps() {
    let p = DoubleGaussianParams::from_degrees(1.0, 0.9, 9.0, 9.0).unwrap();
    let s = GenerativeSampler::matching(&p).unwrap();
    let xs = s.sample_n(2024, 0, 1_000_000);
    let dg = DoubleGaussian::new(&p).unwrap();
    let t = histogram_chi_square(&xs, |x, y| dg.density(x, y), 3.0, 24).unwrap();
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn monte_carlo_matches_fourier_model() {
    let p = mill();
    let s = GenerativeSampler::matching(&p).unwrap();
    let xs = s.sample_n(11, 3, 200_000);
    let g = s.model().residue_grid(3.0, 3.0);
    let t = histogram_chi_square(&xs, |x, y| g.density(x, y), 3.0, 12).unwrap();
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn effective_market_smile_by_quadrature() {
    let nu = 0.95;
    let em = EffectiveMarket::new(1.0, nu).unwrap();
    for &x in &[0.0, 1.0, 2.5] {
        let pts = [-40.0, 0.0, 40.0];
        let m0 = integrate_pieces(|y| em.density(x, y), &pts, 1e-14, 1e-11);
        let m2 = integrate_pieces(|y| y * y * em.density(x, y), &pts, 1e-14, 1e-11);
        let s = conditional::effective_market_sigma(x, 1.0, nu);
        assert!((m2 / m0 - s * s).abs() < 1e-6, "x={x}: {} {}", m2 / m0, s * s);
    }
}
