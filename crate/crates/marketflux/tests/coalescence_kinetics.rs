use marketflux::coalescence::{
    critical_size, critical_size_at, firm_entropy_grid, log_grid, scaled_cutoff, solve_coalescence, trapezoid,
    CoalescenceParams,
};
use proptest::prelude::*;

#[test]
fn cdf_is_tail_integral_of_density() {
    let p = CoalescenceParams::default();
    let t = 80.0;
    let (gc, _) = critical_size_at(&p, t, 1.0);
    let grid = log_grid(1e-6 * gc, 1.05 * scaled_cutoff(&p) * gc, 2000);
    let sol = solve_coalescence(&p, t, &grid).unwrap();
    let d = &sol.distribution;
    let total = trapezoid(&d.grid, &d.density);
    for i in (0..grid.len()).step_by(97) {
        let above = trapezoid(&d.grid[i..], &d.density[i..]) / total;
        assert!((above - sol.cdf[i]).abs() < 2e-3, "G={}: {above} vs {}", grid[i], sol.cdf[i]);
    }
}

#[test]
fn scaled_shape_is_time_independent() {
    let p = CoalescenceParams::default();
    let shape = |t: f64| {
        let (gc, _) = critical_size_at(&p, t, 1.0);
        let grid: Vec<f64> = [0.1, 0.5, 1.0, 2.0].iter().map(|u| u * gc).chain([1.05 * scaled_cutoff(&p) * gc]).collect();
        solve_coalescence(&p, t, &grid).unwrap().cdf
    };
    let (a, b) = (shape(30.0), shape(300.0));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn entropy_minimum_tracks_critical_size(excess in 0.5..30.0f64) {
        let p = CoalescenceParams::default();
        let u = p.u_star + excess;
        let gc = critical_size(&p, p.q * excess).unwrap();
        let grid = log_grid(gc / 30.0, gc * 30.0, 681);
        let s = firm_entropy_grid(&grid, &p, u).unwrap();
        let i = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert!((grid[i] / gc - 1.0).abs() < 0.02);
    }
}
