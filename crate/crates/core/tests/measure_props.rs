use occlp::expr::parse;
use occlp::geometry::{build_spatial_grid, ControlGrid, Domain, Point, SpatialGrid};
use occlp::measure::{DiscretizedSystem, MeasureLp, OptimalMeasure};
use proptest::prelude::*;

fn disk_lp(n: usize, n_u: usize, degree: usize, q: &str) -> MeasureLp {
    let d = Domain::disk(2.0).unwrap();
    let sys = DiscretizedSystem::new(build_spatial_grid(&d, n, n).unwrap(), ControlGrid::circle(n_u).unwrap());
    MeasureLp::assemble(sys, &parse("x1*u2").unwrap(), &parse(q).unwrap(), &[], degree).unwrap()
}

/// Occupational measure of the unit circle traversed at unit speed, snapped
/// to the nearest cell and the nearest control direction.
fn circle_atoms(lp: &MeasureLp, samples: usize) -> Vec<(usize, f64)> {
    let sys = lp.system();
    let mut w = vec![0.0; sys.n_cols()];
    for k in 0..samples {
        let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / samples as f64;
        let x: Point = [t.cos(), t.sin()];
        let u: Point = [-t.sin(), t.cos()];
        let cell = sys.grid().nearest_cell(x);
        let j = (0..sys.controls().len())
            .max_by(|&a, &b| {
                let (ua, ub) = (sys.controls().get(a), sys.controls().get(b));
                (ua[0] * u[0] + ua[1] * u[1]).total_cmp(&(ub[0] * u[0] + ub[1] * u[1]))
            })
            .unwrap();
        w[sys.column(cell, j)] += 1.0 / samples as f64;
    }
    w.into_iter().enumerate().filter(|(_, v)| *v > 0.0).collect()
}

#[test]
fn closed_curve_is_nearly_stationary_and_improves_under_refinement() {
    let coarse = circle_atoms(&disk_lp(32, 16, 4, "1"), 20000);
    let fine_lp = disk_lp(64, 32, 4, "1");
    let fine = circle_atoms(&fine_lp, 20000);
    let r_coarse = disk_lp(32, 16, 4, "1").stationarity_residual(&coarse);
    let r_fine = fine_lp.stationarity_residual(&fine);
    assert!(r_fine <= 0.05, "residual {r_fine}");
    assert!(r_fine < r_coarse, "{r_fine} vs {r_coarse}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resting_columns_are_exactly_stationary(n in 3usize..40, cell in 0usize..1000, degree in 1usize..9) {
        let grid = SpatialGrid::strip(n).unwrap();
        let sys = DiscretizedSystem::new(grid, ControlGrid::segment(5).unwrap());
        let cell = cell % sys.grid().len();
        let lp = MeasureLp::assemble(sys, &parse("x1").unwrap(), &parse("1").unwrap(), &[], degree).unwrap();
        // The middle control of an odd segment lattice is zero.
        let col = lp.system().column(cell, 2);
        prop_assert_eq!(lp.system().dynamics(cell, 2), [0.0, 0.0]);
        prop_assert_eq!(lp.stationarity_residual(&[(col, 1.0)]), 0.0);
    }

    #[test]
    fn positive_denominators_integrate_positively(
        c in 0.01f64..2.0,
        a in -1.0f64..1.0,
        w in prop::collection::vec((0usize..100_000, 0.0f64..1.0), 1..30),
    ) {
        let q = format!("{c} + abs({a}*x1*u2) + x2^2");
        let lp = disk_lp(16, 8, 2, &q);
        let n = lp.n_cols();
        let total: f64 = w.iter().map(|(_, v)| v).sum();
        prop_assume!(total > 0.0);
        let atoms: Vec<(usize, f64)> = w.iter().map(|(j, v)| (j % n, v / total)).collect();
        let m = OptimalMeasure::new(&lp, atoms);
        prop_assert!(m.mu_q > 0.0);
        prop_assert!((m.total_mass() - 1.0).abs() <= 1e-12);
    }
}
