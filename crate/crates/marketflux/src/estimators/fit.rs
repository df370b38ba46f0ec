//! Small Levenberg-Marquardt solver with a central-difference Jacobian and
//! ordinary least-squares helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a nonlinear least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes sum r_i(p)^2 starting from `p0`.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], max_iter: usize) -> Result<LmFit>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p0.len();
    let mut p = DVector::from_column_slice(p0);
    let eval = |p: &DVector<f64>| DVector::from_vec(residuals(p.as_slice()));
    let mut r = eval(&p);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Estimation("residuals are not finite at the starting point".into()));
    }
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    for it in 0..max_iter {
        let mut jac = DMatrix::zeros(r.len(), n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + p[j].abs());
            let mut pp = p.clone();
            pp[j] += h;
            let mut pm = p.clone();
            pm[j] -= h;
            let col = (eval(&pp) - eval(&pm)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() < 1e-14 * (1.0 + cost) {
            return Ok(LmFit { params: p.as_slice().to_vec(), cost, iterations: it, converged: true });
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &p + &step;
            let rt = eval(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let small = step.norm() < 1e-10 * (1.0 + p.norm()) || cost - ct < 1e-14 * cost;
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if small {
                    return Ok(LmFit { params: p.as_slice().to_vec(), cost, iterations: it + 1, converged: true });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: a (local) minimum
            return Ok(LmFit { params: p.as_slice().to_vec(), cost, iterations: it + 1, converged: true });
        }
    }
    Ok(LmFit { params: p.as_slice().to_vec(), cost, iterations: max_iter, converged: false })
}

/// Ordinary least-squares line y = a + b x; returns (a, b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Estimation("a line fit needs at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Estimation("a line fit needs distinct abscissae".into()));
    }
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Log-spaced integers in [lo, hi] with `per_decade` points per decade, deduplicated.
pub fn log_spaced(lo: usize, hi: usize, per_decade: usize) -> Vec<usize> {
    if lo == 0 || hi < lo {
        return Vec::new();
    }
    let n = (((hi as f64 / lo as f64).log10() * per_decade as f64).ceil() as usize).max(1);
    let mut out: Vec<usize> = (0..=n)
        .map(|i| (lo as f64 * (hi as f64 / lo as f64).powf(i as f64 / n as f64)).round() as usize)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exponential_decay() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp() + 0.1).collect();
        let f = |p: &[f64]| xs.iter().zip(&ys).map(|(x, y)| p[0] * (-p[1] * x).exp() + p[2] - y).collect();
        let fit = levenberg_marquardt(f, &[1.0, 0.5, 0.0], 200).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 2.5).abs() < 1e-6 && (fit.params[1] - 1.3).abs() < 1e-6);
    }

    #[test]
    fn line_fit() {
        let (a, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(1, 100, 8);
        assert_eq!(v[0], 1);
        assert_eq!(*v.last().unwrap(), 100);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
