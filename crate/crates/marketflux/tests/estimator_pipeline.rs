use marketflux::estimators::fit::log_spaced;
use marketflux::estimators::{aggregate, dispersion_scaling, generalized_hurst, hill_tail};
use marketflux::stochastic::RngHandle;
use proptest::prelude::*;

fn gaussian(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = RngHandle::new(seed, 0);
    (0..n).map(|_| rng.normal()).collect()
}

#[test]
fn brownian_series_has_half_hurst() {
    let x = gaussian(31, 1_000_000);
    for (q, h) in generalized_hurst(&[&x], &[1.0, 2.0, 3.0], &log_spaced(1, 1000, 6)).unwrap() {
        assert!((h - 0.5).abs() < 0.03, "q={q}: H={h}");
    }
}

#[test]
fn pareto_tail_recovered_within_errors() {
    let mut rng = RngHandle::new(32, 0);
    for &mu in &[1.5, 3.0] {
        let x: Vec<f64> = (0..500_000).map(|_| (1.0 - rng.uniform()).powf(-1.0 / mu)).collect();
        let t = hill_tail(&x, 5_000).unwrap();
        assert!((t.mu - mu).abs() < 4.0 * t.stderr, "{mu}: {t:?}");
    }
}

#[test]
fn dispersion_fit_on_brownian_motion() {
    // without a trend term the large-scale exponent stays at one half
    let x: Vec<f64> = gaussian(33, 2_000_000).iter().map(|v| 1.5 * v).collect();
    let f = dispersion_scaling(&x, 1.0, &log_spaced(1, 20_000, 8), 2e6).unwrap();
    assert!((f.d / 2.25 - 1.0).abs() < 0.03, "{f:?}");
    assert!((f.h_small - 0.5).abs() < 0.02 && (f.h_large - 0.5).abs() < 0.05, "{f:?}");
}

proptest! {
    #[test]
    fn aggregation_preserves_block_sums(x in prop::collection::vec(-1e3..1e3f64, 1..300), m in 1usize..20) {
        let a = aggregate(&x, m);
        prop_assert_eq!(a.len(), x.len() / m);
        let kept: f64 = x[..a.len() * m].iter().sum();
        prop_assert!((a.iter().sum::<f64>() - kept).abs() < 1e-9 * (1.0 + kept.abs()) + 1e-6);
    }
}
