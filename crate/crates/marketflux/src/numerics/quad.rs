//! Adaptive Gauss-Kronrod (7/15) quadrature on finite and semi-infinite ranges.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Integral estimate with its absolute error bound.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive integration of `f` over [a, b] to `max(abs_tol, rel_tol*|I|)`.
pub fn integrate_with<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quad {
    if a == b {
        return Quad { value: 0.0, error: 0.0 };
    }
    let (v, e) = kronrod(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) && parts.len() < MAX_INTERVALS {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            parts.push((lo, hi, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    let value: f64 = parts.iter().map(|p| p.2).sum();
    let error: f64 = parts.iter().map(|p| p.3).sum();
    Quad { value, error }
}

/// Integral of `f` over [a, b] with a default tolerance pair.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate_with(f, a, b, 1e-13, 1e-12).value
}

/// Integral of `f` over [a, inf) using the map x = a + t/(1-t).
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Quad {
    integrate_with(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integral of `f` over the whole real line, split at the origin.
pub fn integrate_line<F: FnMut(f64) -> f64>(mut f: F, abs_tol: f64, rel_tol: f64) -> Quad {
    integrate_to_inf(|x| if x == 0.0 { f(0.0) } else { f(x) + f(-x) }, 0.0, abs_tol, rel_tol)
}

/// Integral over an interval split at the given interior breakpoints.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    points
        .windows(2)
        .map(|w| integrate_with(&mut f, w[0], w[1], abs_tol, rel_tol).value)
        .sum()
}

/// Fixed Gauss-Legendre-Kronrod panels: nodes and weights covering [a, b] with `panels` subintervals.
pub fn kronrod_panels(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * 15);
    let w = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + w * p as f64;
        let c = lo + 0.5 * w;
        let h = 0.5 * w;
        out.push((c, WGK[7] * h));
        for j in 0..7 {
            out.push((c - h * XGK[j], WGK[j] * h));
            out.push((c + h * XGK[j], WGK[j] * h));
        }
    }
    out
}

/// Kernel of a one-sided Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

/// Integral of f(k) trig(omega k) over [0, inf) for f decaying to zero.
/// Half-period panels are integrated adaptively and the partial sums are
/// accelerated by repeated neighbour averaging.
pub fn oscillatory_integral<F: FnMut(f64) -> f64>(mut f: F, omega: f64, trig: Trig, abs_tol: f64, rel_tol: f64) -> f64 {
    let omega = omega.abs();
    if omega < 1e-300 {
        return match trig {
            Trig::Cos => integrate_to_inf(f, 0.0, abs_tol, rel_tol).value,
            Trig::Sin => 0.0,
        };
    }
    let h = std::f64::consts::PI / omega;
    let mut g = |k: f64| {
        let t = omega * k;
        f(k) * match trig {
            Trig::Sin => t.sin(),
            Trig::Cos => t.cos(),
        }
    };
    const DEPTH: usize = 12;
    let mut sums: Vec<f64> = Vec::new();
    let mut total = 0.0;
    let mut last = f64::NAN;
    let mut stable = 0;
    for j in 0..200_000usize {
        let lo = h * j as f64;
        let part = integrate_with(&mut g, lo, lo + h, 0.1 * abs_tol, 0.1 * rel_tol).value;
        total += part;
        sums.push(total);
        if sums.len() > DEPTH + 1 {
            sums.remove(0);
        }
        if sums.len() == DEPTH + 1 {
            let mut s = sums.clone();
            for level in 0..DEPTH {
                for i in 0..DEPTH - level {
                    s[i] = 0.5 * (s[i] + s[i + 1]);
                }
            }
            let est = s[0];
            if (est - last).abs() <= abs_tol.max(rel_tol * est.abs()) {
                stable += 1;
                if stable >= 2 {
                    return est;
                }
            } else {
                stable = 0;
            }
            last = est;
        }
    }
    last
}

/// Integral of f(x, y) over the disc of radius r_max in polar coordinates,
/// with the angular range split at the given angles (radians, any order).
pub fn integrate_polar<F: FnMut(f64, f64) -> f64>(mut f: F, angles: &[f64], r_max: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut cuts: Vec<f64> = angles.iter().map(|a| a.rem_euclid(two_pi)).collect();
    cuts.push(0.0);
    cuts.push(two_pi);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_with(
            |psi| {
                let (s, c) = psi.sin_cos();
                integrate_with(|r| r * f(r * c, r * s), 0.0, r_max, 0.1 * abs_tol, rel_tol).value
            },
            w[0],
            w[1],
            abs_tol,
            rel_tol,
        )
        .value;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0);
        assert!((v - (20.0 - 8.0 + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_line() {
        let q = integrate_line(|x| (-0.5 * x * x).exp(), 1e-14, 1e-13);
        assert!((q.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn kink_handled_by_split() {
        let v = integrate_pieces(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-14, 1e-13);
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn log_singularity() {
        let q = integrate_with(|x: f64| -x.ln(), 0.0, 1.0, 1e-12, 1e-12);
        assert!((q.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_known_transforms() {
        // int cos(kx)/(1+k^2) = (pi/2) e^{-x}; int k sin(kx)/(1+k^2)^2 = (pi/4) x e^{-x}
        for &x in &[0.3, 1.0, 4.0] {
            let c = oscillatory_integral(|k| 1.0 / (1.0 + k * k), x, Trig::Cos, 1e-13, 1e-11);
            assert!((c - 0.5 * std::f64::consts::PI * (-x).exp()).abs() < 1e-10, "x={x}");
            let s = oscillatory_integral(|k| k / (1.0 + k * k).powi(2), x, Trig::Sin, 1e-13, 1e-11);
            assert!((s - 0.25 * std::f64::consts::PI * x * (-x).exp()).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn polar_gaussian_mass() {
        let v = integrate_polar(|x, y| (-(x * x + y * y) / 2.0).exp(), &[0.3, 2.0], 12.0, 1e-12, 1e-11);
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn panels_integrate_smooth() {
        let s: f64 = kronrod_panels(0.0, 2.0, 4).iter().map(|(x, w)| w * x.cos()).sum();
        assert!((s - 2f64.sin()).abs() < 1e-14);
    }
}
