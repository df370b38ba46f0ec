//! Truncated power series arithmetic.

/// Coefficients of (1 - t)^{-1/2} up to order n.
pub fn inv_sqrt_one_minus(n: usize) -> Vec<f64> {
    let mut b = vec![1.0; n + 1];
    for k in 1..=n {
        b[k] = b[k - 1] * (2 * k - 1) as f64 / (2 * k) as f64;
    }
    b
}

/// exp(h(t)) for a series with h[0] = 0, via E' = h' E.
pub fn exp(h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let mut e = vec![0.0; n];
    if n == 0 {
        return e;
    }
    e[0] = h[0].exp();
    for m in 1..n {
        let mut s = 0.0;
        for k in 1..=m {
            s += k as f64 * h[k] * e[m - k];
        }
        e[m] = s / m as f64;
    }
    e
}

/// Product of two series truncated to the length of the shorter.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|m| (0..=m).map(|k| a[k] * b[m - k]).sum()).collect()
}

/// Reciprocal 1/a of a series with a[0] != 0.
pub fn recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut r = vec![0.0; n];
    r[0] = 1.0 / a[0];
    for m in 1..n {
        let s: f64 = (1..=m).map(|k| a[k] * r[m - k]).sum();
        r[m] = -s / a[0];
    }
    r
}
