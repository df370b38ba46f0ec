//! Hill estimator of the power-law tail exponent of |values|.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest number of order statistics accepted by `hill_tail`.
pub const MIN_TAIL_ORDER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Tail exponent (scale invariant).
    pub mu: f64,
    /// mu/sqrt(k_order).
    pub stderr: f64,
    pub k_order: usize,
    /// |value| of the (k+1)-th largest observation (scales with the data).
    pub threshold: f64,
}

/// Hill estimate mu = k / sum_{i<k} ln(X_(i)/X_(k)) from the k largest |values|.
pub fn hill_tail(values: &[f64], k_order: usize) -> Result<TailFit> {
    if k_order < MIN_TAIL_ORDER {
        return Err(Error::Estimation(format!("k_order must be at least {MIN_TAIL_ORDER}, got {k_order}")));
    }
    if values.len() < 10 * k_order {
        return Err(Error::Estimation(format!(
            "{} samples are too few for k_order = {k_order} (need {})",
            values.len(),
            10 * k_order
        )));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| v.is_finite()).collect();
    if abs.len() < 10 * k_order {
        return Err(Error::Estimation("too many non-finite values".into()));
    }
    let n = abs.len();
    // after this the k + 1 largest values occupy the tail of the buffer
    abs.select_nth_unstable_by(n - k_order - 1, |a, b| a.total_cmp(b));
    let threshold = abs[n - k_order - 1];
    if !(threshold > 0.0) {
        return Err(Error::Estimation("tail threshold is zero".into()));
    }
    let s: f64 = abs[n - k_order..].iter().map(|v| (v / threshold).ln()).sum();
    if !(s > 0.0) {
        return Err(Error::Estimation("degenerate tail".into()));
    }
    let mu = k_order as f64 / s;
    Ok(TailFit { mu, stderr: mu / (k_order as f64).sqrt(), k_order, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::RngHandle;
    use proptest::prelude::*;

    fn pareto(mu: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngHandle::new(seed, 0);
        (0..n).map(|_| (1.0 - rng.uniform()).powf(-1.0 / mu)).collect()
    }

    #[test]
    fn pareto_sample() {
        let xs = pareto(3.0, 1_000_000, 1);
        let f = hill_tail(&xs, 10_000).unwrap();
        assert!((f.mu - 3.0).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn unbiased_within_two_stderr() {
        let mut hits = 0;
        for seed in 0..20 {
            let f = hill_tail(&pareto(3.0, 20_000, seed), 1000).unwrap();
            if (f.mu - 3.0).abs() < 2.0 * f.stderr {
                hits += 1;
            }
        }
        assert!(hits >= 17, "{hits}/20");
    }

    #[test]
    fn too_few_samples() {
        assert!(hill_tail(&[1.0; 400], 50).is_err());
        assert!(hill_tail(&[1.0; 4000], 10).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariant(scale in 1e-3..1e3f64, seed in 0u64..1000) {
            let xs = pareto(2.5, 2000, seed);
            let ys: Vec<f64> = xs.iter().map(|x| -scale * x).collect();
            let a = hill_tail(&xs, 100).unwrap();
            let b = hill_tail(&ys, 100).unwrap();
            prop_assert!((a.mu - b.mu).abs() < 1e-9 * a.mu);
            prop_assert!((b.threshold / a.threshold - scale).abs() < 1e-9 * scale);
        }
    }
}
