//! Special functions needed by the closed-form densities.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

/// Modified Bessel function K0 for x > 0, from the trapezoid rule on
/// K0(x) = int_0^inf exp(-x cosh t) dt, which converges geometrically.
pub fn bessel_k0(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    let h = 0.05;
    let mut sum = 0.5 * (-x).exp();
    let mut k = 1;
    loop {
        let t = h * k as f64;
        let term = (-x * t.cosh()).exp();
        sum += term;
        if term < 1e-18 * sum || term == 0.0 {
            break;
        }
        k += 1;
    }
    sum * h
}

/// K0(x) multiplied by exp(x), finite for large x.
pub fn bessel_k0_scaled(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    let h = 0.05;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = h * k as f64;
        let term = (-x * (t.cosh() - 1.0)).exp();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}

/// Nodes and weights of the n-point generalized Gauss-Laguerre rule with
/// weight x^alpha e^{-x}, by Newton iteration on the three-term recurrence.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n {
        if i == 0 {
            z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nf + 1.8 * alpha);
        } else if i == 1 {
            z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) / (1.0 + 0.3 * alpha)
                * (z - x[i - 2]);
        }
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf + 1.0 + alpha - z) * p2 - (jf + alpha) * p3) / (jf + 1.0);
            }
            pp = (nf * p1 - (nf + alpha) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        let lw = ln_gamma(alpha + nf) - ln_gamma(nf);
        w[i] = -(lw).exp() / (pp * nf * p2);
    }
    (x, w)
}

fn laguerre64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_laguerre(64, 3.0))
}

/// I3(z) = int_0^inf t^3 exp(-t^2/2 - z t) dt for z >= 0, by 64-node
/// Gauss-Laguerre quadrature with weight u^3 e^{-u} after t = u/s, s = z + 1.
pub fn gauss_moment3(z: f64) -> f64 {
    let (nodes, weights) = laguerre64();
    let s = z + 1.0;
    let mut acc = 0.0;
    for (u, w) in nodes.iter().zip(weights) {
        let r = u / s;
        acc += w * (r - 0.5 * r * r).exp();
    }
    acc / s.powi(4)
}

/// Parabolic cylinder function D_{-4}(z) for z >= 0 from its integral representation.
pub fn parabolic_cylinder_dm4(z: f64) -> f64 {
    (-0.25 * z * z).exp() * gauss_moment3(z) / 6.0
}

/// Taylor series of I3 around z = 0; accurate for small z only.
pub fn gauss_moment3_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..60 {
        if k > 0 {
            fact *= k as f64;
        }
        let n = (3 + k) as f64;
        let m = (0.5 * (n - 1.0) * std::f64::consts::LN_2 + ln_gamma(0.5 * (n + 1.0))).exp();
        let term = (-z).powi(k) / fact * m;
        sum += term;
        if k > 8 && term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}
