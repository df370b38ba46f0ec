use marketflux::estimators::hill_tail;
use marketflux::numerics::quad::integrate_to_inf;
use marketflux::stochastic::{normalized_markov_noise, student_noise_component_pdf, NoiseNormalizationConfig, RngHandle};
use proptest::prelude::*;

fn steady_re(seed: u64, cfg: NoiseNormalizationConfig, n: usize) -> Vec<f64> {
    let mut rng = RngHandle::new(seed, 0);
    normalized_markov_noise(&mut rng, cfg, n).unwrap().steady().iter().map(|v| v.re).collect()
}

#[test]
fn markovian_component_tail_is_cubic() {
    let x = steady_re(17, NoiseNormalizationConfig::markovian(), 2_000_000);
    let t = hill_tail(&x, 2_000).unwrap();
    assert!((t.mu - 3.0).abs() < 0.3, "{t:?}");
}

#[test]
fn uncorrelated_component_tail_is_quadratic() {
    let x = steady_re(18, NoiseNormalizationConfig::uncorrelated(), 2_000_000);
    let t = hill_tail(&x, 2_000).unwrap();
    assert!((t.mu - 2.0).abs() < 0.3, "{t:?}");
}

#[test]
fn component_exceedances_follow_density() {
    let x = steady_re(19, NoiseNormalizationConfig::markovian(), 1_000_000);
    for &a in &[0.5, 1.0, 2.0] {
        let expected = 2.0 * integrate_to_inf(student_noise_component_pdf, a, 1e-14, 1e-12).value;
        let seen = x.iter().filter(|v| v.abs() > a).count() as f64 / x.len() as f64;
        let se = (expected * (1.0 - expected) / x.len() as f64).sqrt();
        assert!((seen - expected).abs() < 0.05 * expected + 5.0 * se, "a={a}: {seen} vs {expected}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn hill_is_scale_invariant(seed in 0u64..1000, scale in 1e-3..1e3f64) {
        let x = steady_re(seed, NoiseNormalizationConfig::markovian(), 20_000);
        let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let (a, b) = (hill_tail(&x, 200).unwrap(), hill_tail(&y, 200).unwrap());
        prop_assert!((a.mu - b.mu).abs() < 1e-9 * a.mu);
        prop_assert!((b.threshold / a.threshold / scale - 1.0).abs() < 1e-12);
    }
}
