//! End-to-end acceptance run. Every criterion prints one PASS or FAIL line on
//! stderr; a FAIL is reported, not raised, so that the whole table is produced.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use marketflux::cascade::impact::{fitted_apparent_exponent, response_peak};
use marketflux::cascade::jumps::jump_excess;
use marketflux::cascade::{
    crossover_time, jump_pattern, regime_switch_stats, simulate_replicas, CascadeParams, JumpCondition, JumpKind,
    MarketSeries, RegimeState,
};
use marketflux::coalescence::{
    critical_size, critical_size_at, firm_entropy_grid, log_grid, market_entropy, scaled_cutoff, solve_coalescence,
    CoalescenceParams,
};
use marketflux::estimators::fit::log_spaced;
use marketflux::estimators::volatility::FiniteVolatility;
use marketflux::estimators::{
    dispersion_scaling_pooled, hill_tail, volatility_distribution, windowed_alpha, VolatilityDistFit,
};
use marketflux::numerics::quad::{integrate_polar, integrate_to_inf};
use marketflux::pdf::bivariate::DoubleGaussian;
use marketflux::pdf::conditional::double_dynamics_quadrature;
use marketflux::pdf::mill::{antisymmetric_grid, mill_report};
use marketflux::pdf::spectral::FourierModel;
use marketflux::pdf::*;
use marketflux::stochastic::{
    normalized_markov_noise, student_noise_component_pdf, student_noise_pdf, NoiseNormalizationConfig, RngHandle,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let line = format!(
        "criterion {n:>2} {name:<28} {}  [{:.1} s] {}",
        if o.pass { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64(),
        o.detail
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    o.pass
}

fn within(t: Instant, limit: u64) -> bool {
    t.elapsed() <= Duration::from_secs(limit)
}

// ---------------------------------------------------------------- noise tails

const NOISE_DRAWS: usize = 10_000_000;
const NOISE_ORDER: usize = 10_000;

fn noise_tail(seed: u64, cfg: NoiseNormalizationConfig) -> (Vec<f64>, f64) {
    let mut rng = RngHandle::new(seed, 0);
    let s = normalized_markov_noise(&mut rng, cfg, NOISE_DRAWS).unwrap();
    let modulus: Vec<f64> = s.steady().iter().map(|v| v.modulus()).collect();
    let mu = hill_tail(&modulus, NOISE_ORDER).unwrap().mu;
    (s.steady().iter().map(|v| v.re).collect(), mu)
}

fn tail_universality() -> Outcome {
    let t = Instant::now();
    let (_, markov) = noise_tail(101, NoiseNormalizationConfig::markovian());
    let (_, plain) = noise_tail(102, NoiseNormalizationConfig::uncorrelated());
    let pass = (markov - 3.0).abs() <= 0.3 && (plain - 2.0).abs() <= 0.3 && within(t, 60);
    outcome(pass, format!("markovian mu = {markov:.3}, uncorrelated mu = {plain:.3}"))
}

fn tail_under_aggregation() -> Outcome {
    let (re, _) = noise_tail(103, NoiseNormalizationConfig::markovian());
    let pairs: Vec<f64> = re.chunks_exact(2).map(|c| c[0] + c[1]).collect();
    let single = hill_tail(&re, NOISE_ORDER).unwrap().mu;
    let summed = hill_tail(&pairs, NOISE_ORDER / 2).unwrap().mu;
    let pass = (summed - 3.0).abs() <= 0.3;
    outcome(pass, format!("component mu = {single:.3}, pair sums mu = {summed:.3}"))
}

// --------------------------------------------------------------- normalization

fn line_mass(f: impl Fn(f64) -> f64) -> f64 {
    integrate_to_inf(&f, 0.0, 1e-14, 1e-12).value + integrate_to_inf(|x| f(-x), 0.0, 1e-14, 1e-12).value
}

fn normalization_suite() -> Outcome {
    let t = Instant::now();
    let asym = AsymTentParams::new(1.3, 0.4).unwrap();
    let dg = DoubleGaussianParams::from_degrees(1.0, 0.95, 8.0, 8.7).unwrap();
    let fit = VolatilityDistFit { mu: 3.0, c: 0.6, q: 1.0, n: 4, vm: 1.7 };
    let finite = FiniteVolatility::new(4, 3.0, 0.6, 1.0, 1.7).unwrap();
    let uni: Vec<(&str, f64)> = vec![
        ("tent", line_mass(|x| tent_pdf(x, 1.4).unwrap())),
        ("asym tent", line_mass(|x| asym_tent_pdf(x, &asym).unwrap())),
        ("fat tail", line_mass(|x| fat_tail_pdf(x, 0.8).unwrap())),
        ("asym fat tail", line_mass(|x| asym_fat_tail_pdf(x, &asym).unwrap())),
        ("noise component", line_mass(student_noise_component_pdf)),
        ("marginal", line_mass(|x| univariate_pdf(x, &dg).unwrap())),
        ("volatility law", integrate_to_inf(|v| fit.pdf(v), 0.0, 1e-14, 1e-12).value),
        ("finite-n volatility", integrate_to_inf(|v| finite.pdf(v), 0.0, 1e-14, 1e-12).value),
    ];
    let planar = |f: &dyn Fn(f64, f64) -> f64, kinks: &[f64]| integrate_polar(f, kinks, 40.0, 1e-10, 1e-8);
    let axes = [0.0, 0.5 * PI, PI, 1.5 * PI];
    let em = EffectiveMarket::new(1.0, 0.95).unwrap();
    let d = DoubleGaussian::new(&dg).unwrap();
    let markov = |x: f64, y: f64| if x == 0.0 && y == 0.0 { 0.0 } else { markovian_bivariate_pdf(x, y, 1.0, 0.3).unwrap() };
    let bi: Vec<(&str, f64)> = vec![
        ("planar noise", planar(&|x, y| student_noise_pdf(x.hypot(y)), &[])),
        ("markovian", planar(&markov, &[])),
        ("effective market", planar(&|x, y| em.density(x, y), &axes)),
        ("double gaussian", planar(&|x, y| d.density(x, y), &d.kink_angles())),
    ];
    let worst_uni = uni.iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);
    let worst_bi = bi.iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);
    let failed: Vec<&str> = uni
        .iter()
        .filter(|(_, m)| (m - 1.0).abs() >= 1e-6)
        .chain(bi.iter().filter(|(_, m)| (m - 1.0).abs() >= 1e-4))
        .map(|(n, _)| *n)
        .collect();
    let pass = failed.is_empty() && within(t, 30);
    outcome(pass, format!("{} densities, worst |1 - mass| = {worst_uni:.1e} (1d), {worst_bi:.1e} (2d) {failed:?}", uni.len() + bi.len()))
}

// ------------------------------------------------------- closed forms vs oracles

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn closed_forms() -> Outcome {
    let points = [
        ("MILL", DoubleGaussianParams::from_degrees(1.0, 0.95, 8.0, 8.7).unwrap()),
        ("ACOR", DoubleGaussianParams::from_degrees(1.0, 0.97, 12.5, 8.0).unwrap()),
        ("COR", DoubleGaussianParams::from_degrees(1.0, 0.9, 6.0, 12.0).unwrap()),
        ("symmetric", DoubleGaussianParams::from_degrees(1.0, 0.9, 9.0, 9.0).unwrap()),
        ("weak", DoubleGaussianParams::from_degrees(1.0, 0.8, 4.5, 8.0).unwrap()),
    ];
    let y_max = 20.0;
    let mut worst = 0.0f64;
    for (_, p) in &points {
        let m = FourierModel::from_double_gaussian(p);
        for &x in &[0.5, 2.0] {
            // direct quadrature over y of the reference density
            let c = m.residue_grid(x, y_max).column_moments(x, 2, &[], y_max, 1e-7);
            let mean = c[1] / c[0];
            let sigma = (c[2] / c[0] - mean * mean).sqrt();
            worst = worst.max(rel(conditional_response(x, p).unwrap(), mean));
            worst = worst.max(rel(conditional_sigma(x, p).unwrap(), sigma));
            // the spectral moments used below must agree with the same columns
            worst = worst.max(rel(m.moment(1, x), c[1])).max(rel(m.moment(0, x), c[0]));
        }
        for &r in &[0.0, 1.0] {
            let num = integrate_to_inf(|x| m.moment(1, x), r, 1e-13, 1e-9).value;
            let den = integrate_to_inf(|x| m.moment(0, x), r, 1e-13, 1e-9).value;
            let (ym, yp) = double_dynamics(r, p).unwrap();
            worst = worst.max(rel(yp, num / den)).max(rel(-ym, num / den));
            worst = worst.max(rel(double_dynamics_quadrature(r, p, true).unwrap(), num / den));
        }
    }
    let names: Vec<&str> = points.iter().map(|p| p.0).collect();
    outcome(worst < 1e-3, format!("worst relative deviation {worst:.2e} over {names:?}"))
}

fn limit_chain() -> Outcome {
    let em = EffectiveMarket::new(1.0, 0.8).unwrap();
    let flat = DoubleGaussianParams::new(1.0, 0.8, 0.0, 0.0).unwrap();
    let mut sup = 0.0f64;
    for i in 0..=16 {
        for j in 0..=16 {
            let (x, y) = (-4.0 + 0.5 * i as f64, -4.0 + 0.5 * j as f64);
            sup = sup.max((double_gaussian_pdf(x, y, &flat).unwrap() - em.density(x, y)).abs());
        }
    }
    let p = DoubleGaussianParams::from_degrees(1.0, 0.999, 8.0, 8.7).unwrap();
    let mut worst = 0.0f64;
    for i in 0..24 {
        for &r in &[0.3, 1.0, 2.5] {
            let t = 2.0 * PI * i as f64 / 24.0 + 0.1;
            let (x, y) = (r * t.cos(), r * t.sin());
            let a = double_gaussian_pdf(x, y, &p).unwrap();
            let b = markovian_bivariate_pdf(x, y, 1.0, p.eps()).unwrap();
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    outcome(sup < 1e-10 && worst < 0.02, format!("phi = 0 sup-norm {sup:.1e}, nu = 0.999 worst ratio {worst:.4}"))
}

fn mill_pattern() -> Outcome {
    let p = DoubleGaussianParams::from_degrees(1.0, 0.95, 8.0, 8.7).unwrap();
    let (_, r) = mill_report(&p, MillAxis::Horizontal, 4.0, 81).unwrap();
    let em = DoubleGaussianParams::new(1.0, 0.95, 0.0, 0.0).unwrap();
    let xs = linear_grid(-4.0, 4.0, 81);
    let g = antisymmetric_grid(&em, MillAxis::Horizontal, &xs, &xs).unwrap();
    let zero = g.values.iter().all(|&v| v == 0.0);
    let pass = r.positive_blades == 4 && r.negative_blades == 4 && r.sign_changes == 8 && zero;
    outcome(
        pass,
        format!(
            "MILL: {}+{} blades, {} sign changes; effective market asymmetry identically zero: {zero}",
            r.positive_blades, r.negative_blades, r.sign_changes
        ),
    )
}

// ------------------------------------------------------------ cascade statistics

const CASCADE_STEPS: usize = 1_250_000;
const CASCADE_REPLICAS: usize = 8;

fn steady(s: &MarketSeries) -> &[f64] {
    &s.price_increments[s.warmup..]
}

fn concatenated(runs: &[MarketSeries]) -> Vec<f64> {
    runs.iter().flat_map(|s| steady(s).iter().copied()).collect()
}

fn log_volatility_covariance(runs: &[MarketSeries], lag: usize) -> f64 {
    let all: Vec<&[f64]> = runs.iter().map(|s| &s.volatility_log[s.warmup..]).collect();
    let n: usize = all.iter().map(|w| w.len()).sum();
    let m = all.iter().flat_map(|w| w.iter()).sum::<f64>() / n as f64;
    let (mut s, mut k) = (0.0, 0usize);
    for w in &all {
        for (a, b) in w.iter().zip(&w[lag..]) {
            s += (a - m) * (b - m);
            k += 1;
        }
    }
    s / k as f64
}

fn mrw_scaling() -> Outcome {
    let t = Instant::now();
    let mut p = CascadeParams::new(65_536.0, 1.0, 3, 0.9, 0.1, 1.0, 0.0).unwrap();
    let tau0 = p.tau0_effective();
    p.l = p.diffusion() * tau0 * (tau0 / 1024.0).powf(p.lambda0_sq);
    p.validate().unwrap();
    let runs = simulate_replicas(&p, CASCADE_STEPS, 7, CASCADE_REPLICAS).unwrap();
    let lags = [16usize, 32, 64, 128, 256, 512];
    let cov_err = lags
        .iter()
        .map(|&d| rel(log_volatility_covariance(&runs, d), p.lambda_sq * (tau0 / d as f64).ln()))
        .fold(0.0, f64::max);
    let slices: Vec<&[f64]> = runs.iter().map(steady).collect();
    let fit = dispersion_scaling_pooled(&slices, runs[0].dt, &log_spaced(1, 131_072, 8), tau0).unwrap();
    let theory = crossover_time(&p);
    let tx_ok = fit.tau_x.is_finite() && fit.tau_x / theory < 2.0 && theory / fit.tau_x < 2.0;
    let pass = cov_err < 0.1 && (fit.h_large - 0.95).abs() <= 0.05 && tx_ok && within(t, 300);
    outcome(
        pass,
        format!(
            "covariance worst rel. error {cov_err:.3} (lags 16..512), H_large = {:.3}, tau_x = {:.0} vs {theory:.0}",
            fit.h_large, fit.tau_x
        ),
    )
}

fn volatility_law() -> Outcome {
    let (n, mu) = (4usize, 3.0);
    let tau0 = 65_536.0;
    let eps = 1.0 / (tau0 / n as f64).ln();
    // intermittency chosen so that the predicted shape constant is 2/3
    let lambda_sq = (2.0 / 3.0) * eps / (mu + 1.0);
    let p = CascadeParams::new(tau0, 1.0, 3, 0.9, lambda_sq, 1.0, 0.0).unwrap();
    let runs = simulate_replicas(&p, CASCADE_STEPS, 8, CASCADE_REPLICAS).unwrap();
    let x = concatenated(&runs);
    let r = volatility_distribution(&x, n, 1.0).unwrap();
    let core = r.core.map_or(0.0, |c| c.r_squared);
    let pass = r.converged && (r.fit.mu - 3.0).abs() <= 0.3 && (0.4..=1.0).contains(&r.fit.c) && core > 0.9;
    outcome(
        pass,
        format!(
            "mu = {:.3}, c = {:.3}, reduced chi2 = {:.2}, converged {}, log-normal core R2 = {core:.3}",
            r.fit.mu, r.fit.c, r.reduced_chi_square, r.converged
        ),
    )
}

fn impact_curves() -> Outcome {
    let short = fitted_apparent_exponent(4.0, 64.0, 1.0, 41).unwrap();
    let taus: [f64; 4] = [1.0, 1e2, 1e4, 1e6];
    let ups: Vec<f64> =
        taus.iter().map(|&t| fitted_apparent_exponent(10.0, 100.0, t.sqrt(), 41).unwrap()).collect();
    let falling = ups.windows(2).all(|w| w[1] < w[0]);
    let peak = response_peak(0.2).unwrap();
    let target = 5f64.exp();
    let pass = (short - 3.0).abs() <= 0.3 && falling && ups[ups.len() - 1] < 1.1 && rel(peak, target) <= 0.1;
    outcome(
        pass,
        format!("upsilon = {short:.3} near dV = 16 V_tau, {ups:.3?} over tau = {taus:?}; l* = {peak:.1} vs {target:.1}"),
    )
}

fn jump_patterns() -> Outcome {
    let slope = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| (f(b) / f(a)).ln() / (b / a).ln();
    let relax = |t: f64| jump_pattern(JumpKind::Stock, 1.0, t, 1.0, 0.1).unwrap();
    let s1 = slope(&relax, 10.0, 1e4);
    let c = JumpCondition { kind: JumpKind::Stock, omega0: 1.0, pn: 0.01, v1: 5.0, a0: 1.0, tau: 1.0, eps: 0.15, lambda_sq: 0.1 };
    let excess = |t: f64| jump_excess(&c, t).unwrap();
    let s2 = slope(&excess, 1e3, 1e5);
    outcome((s1 + 0.5).abs() <= 0.05 && (s2 + 0.5).abs() <= 0.1, format!("relaxation slope {s1:.4}, excess slope {s2:.4}"))
}

fn moments(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let c = |k: i32| x.iter().map(|v| (v - m).powi(k)).sum::<f64>() / n;
    let var = c(2);
    (var, c(3) / var.powf(1.5), c(4) / (var * var))
}

fn regime_switching() -> Outcome {
    let (n, tau0, lambda_sq) = (64usize, 65_536.0, 0.1);
    let p = CascadeParams::new(tau0, 1.0, 3, 0.9, lambda_sq, 1.0, 0.0).unwrap();
    let runs = simulate_replicas(&p, CASCADE_STEPS, 9, CASCADE_REPLICAS).unwrap();
    let eps = 1.0 / (p.tau0_effective() / n as f64).ln();
    let alphas: Vec<f64> = runs.iter().flat_map(|s| windowed_alpha(steady(s), n, eps).unwrap()).collect();
    let (var, skew, kurt) = moments(&alphas);
    let target = 2.0 * eps * lambda_sq;
    let gaussian = skew.abs() < 0.1 && (kurt - 3.0).abs() < 0.3;
    let state = RegimeState::new(1.0, 1000.0, 0.1).unwrap();
    let dt1 = regime_switch_stats(state.sigma0(), 10.0, &state).switch_time;
    let pass = gaussian && rel(var, target) <= 0.2 && (dt1 - 38.0).abs() <= 1.0;
    outcome(
        pass,
        format!(
            "alpha skew {skew:.3}, kurtosis {kurt:.3}, variance/(2 eps lambda^2) = {:.3}; switch time {dt1:.2} days",
            var / target
        ),
    )
}

fn coalescence() -> Outcome {
    let p = CoalescenceParams::default();
    let t_end = 50.0;
    let (gc, _) = critical_size_at(&p, t_end, 1.0);
    let grid = log_grid(1e-6 * gc, 1.05 * scaled_cutoff(&p) * gc, 200);
    let sol = solve_coalescence(&p, t_end, &grid).unwrap();
    let sup = sol
        .scaled
        .iter()
        .zip(&sol.cdf)
        .map(|(u, c)| (c - (-(1.0 / p.beta - p.m) * u.powf(p.beta)).exp()).abs())
        .fold(0.0, f64::max);
    let products: Vec<f64> = [20.0, 80.0, 320.0].iter().map(|&t| t * critical_size_at(&p, t, 1.0).1).collect();
    let constant = products.iter().all(|v| rel(*v, products[0]) < 1e-12);

    let u = p.u_star + 5.0;
    let gc_u = critical_size(&p, p.q * (u - p.u_star)).unwrap();
    let g = log_grid(gc_u / 50.0, gc_u * 50.0, 801);
    let s = firm_entropy_grid(&g, &p, u).unwrap();
    let imin = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let minimum_ok = (g[imin] / gc_u - 1.0).abs() < 0.02;

    let mut entropies = Vec::new();
    for &t in &[20.0, 40.0, 80.0, 160.0] {
        let (gc, delta) = critical_size_at(&p, t, 1.0);
        let grid = log_grid(1e-6 * gc, 1.05 * scaled_cutoff(&p) * gc, 300);
        let sol = solve_coalescence(&p, t, &grid).unwrap();
        entropies.push(market_entropy(&sol.distribution, &p, p.u_star + delta, p.supply(t)).unwrap());
    }
    let growing = entropies.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        sup < 1e-3 && constant && minimum_ok && growing,
        format!(
            "CDF sup-norm {sup:.1e}; Delta t = {:.3}; entropy minimum at {:.3} Gc; S(t) nondecreasing: {growing}",
            products[0],
            g[imin] / gc_u
        ),
    )
}

// ------------------------------------------------------------------ determinism

fn cli(args: &[&str], cwd: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_marketflux"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MARKETFLUX_OUT")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("marketflux-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("simulate", vec!["simulate", "--steps", "2e4", "--tau0", "4096", "--seed", "42", "--replicas", "2"]),
        ("pdf", vec!["pdf", "--model", "double-gaussian", "--phi-minus", "8deg", "--phi-plus", "8.7deg", "--points", "21"]),
        ("mill", vec!["mill", "--points", "41"]),
        ("coalesce", vec!["coalesce"]),
        ("impact", vec!["impact"]),
        ("estimate", vec!["estimate", "--input", "simulate-a/series_000.csv", "--generations", "12"]),
    ];
    let mut bad = Vec::new();
    for (name, args) in &runs {
        let mut manifests = Vec::new();
        for tag in ["a", "b"] {
            let out = format!("{name}-{tag}");
            let mut a = args.clone();
            a.extend(["--out", out.as_str()]);
            if !cli(&a, &dir) {
                bad.push(format!("{name} failed"));
                continue;
            }
            manifests.push(marketflux_cli::output::Manifest::read(&dir.join(&out).join("manifest.json")).unwrap());
        }
        if manifests.len() == 2 && manifests[0].artifacts != manifests[1].artifacts {
            bad.push(format!("{name} differs"));
        }
    }
    let p = CascadeParams::new(4096.0, 1.0, 3, 0.9, 0.1, 1.0, 0.0).unwrap();
    let a = simulate_replicas(&p, 10_000, 5, 3).unwrap();
    let b = simulate_replicas(&p, 10_000, 5, 3).unwrap();
    let same = a.iter().zip(&b).all(|(x, y)| {
        x.price_increments.iter().zip(&y.price_increments).all(|(u, v)| u.to_bits() == v.to_bits())
            && x.volume_increments == y.volume_increments
    });
    if !same {
        bad.push("library replicas differ".into());
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(bad.is_empty(), format!("{} pipelines run twice, library replicas bitwise equal: {same} {bad:?}", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("tail universality", tail_universality),
        ("tail under aggregation", tail_under_aggregation),
        ("normalization", normalization_suite),
        ("closed forms vs quadrature", closed_forms),
        ("limit chain", limit_chain),
        ("mill pattern", mill_pattern),
        ("cascade scaling", mrw_scaling),
        ("volatility distribution", volatility_law),
        ("impact curves", impact_curves),
        ("jump patterns", jump_patterns),
        ("regime switching", regime_switching),
        ("coalescence", coalescence),
        ("determinism", determinism),
    ];
    let passed = criteria.into_iter().enumerate().filter(|(i, (name, f))| report(*i + 1, name, *f)).count();
    let _ = writeln!(std::io::stderr(), "acceptance: {passed}/13 criteria pass");
}
