use occlp::geometry::{build_spatial_grid, polygon_area, polygon_perimeter, ControlGrid, Domain, Point};
use proptest::prelude::*;

/// Convex polygons: points on an ellipse in angular order.
fn convex_polygon() -> impl Strategy<Value = Vec<Point>> {
    (
        prop::collection::vec(0.0f64..1.0, 3..9),
        0.5f64..3.0,
        0.5f64..3.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_filter_map("needs spread vertices", |(gaps, a, b, cx, cy)| {
            let total: f64 = gaps.iter().map(|g| g + 0.2).sum();
            let mut t = 0.0;
            let mut pts = Vec::new();
            for g in &gaps {
                let th = 2.0 * std::f64::consts::PI * t / total;
                pts.push([cx + a * th.cos(), cy + b * th.sin()]);
                t += g + 0.2;
            }
            let max_gap = gaps.iter().map(|g| (g + 0.2) / total).fold(0.0, f64::max);
            (max_gap < 0.45).then_some(pts)
        })
}

fn convex_domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        (0.5f64..5.0, 0.5f64..5.0, -2.0f64..2.0, -2.0f64..2.0)
            .prop_map(|(w, h, x, y)| Domain::rectangle_at(w, h, [x, y]).unwrap()),
        (0.2f64..3.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(r, x, y)| Domain::disk_at(r, [x, y]).unwrap()),
        convex_polygon().prop_map(|p| Domain::convex_polygon(p).unwrap()),
    ]
}

fn exact_area(d: &Domain) -> f64 {
    match d {
        Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        _ => polygon_area(&d.as_polygon().unwrap()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inner_parallel_area_starts_at_area_and_decreases(d in convex_domain()) {
        let a0 = d.inner_parallel_area(0.0).unwrap();
        prop_assert!((a0 - exact_area(&d)).abs() <= 1e-9 * (1.0 + a0));
        let rho = d.inradius().unwrap();
        let per = d.perimeter().unwrap();
        let mut prev = a0;
        for k in 1..=40 {
            let r = rho * k as f64 / 40.0;
            let a = d.inner_parallel_area(r).unwrap();
            prop_assert!(a <= prev + 1e-9, "area rose from {prev} to {a} at r = {r}");
            // Lipschitz in r with constant at most the perimeter.
            prop_assert!(prev - a <= per * rho / 40.0 + 1e-9);
            prev = a;
        }
        prop_assert!(prev <= 1e-6 * a0);
    }

    #[test]
    fn midpoints_of_members_are_members(
        d in convex_domain(),
        s in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 40),
    ) {
        let b = d.bbox();
        let pts: Vec<Point> = s
            .iter()
            .map(|(u, v)| [b.min[0] + u * b.width(), b.min[1] + v * b.height()])
            .filter(|p| d.membership(*p).unwrap())
            .collect();
        for a in &pts {
            for c in &pts {
                let m = [0.5 * (a[0] + c[0]), 0.5 * (a[1] + c[1])];
                prop_assert!(d.membership(m).unwrap());
            }
        }
    }

    #[test]
    fn grid_cells_are_unique_members(d in convex_domain(), nx in 2usize..40, ny in 2usize..40) {
        let Ok(g) = build_spatial_grid(&d, nx, ny) else { return Ok(()) };
        prop_assert_eq!(g.bbox(), d.bbox());
        let mut seen = std::collections::HashSet::new();
        for c in g.cells() {
            prop_assert!(d.membership(c.center).unwrap());
            prop_assert!(seen.insert((c.ix, c.iy)));
            prop_assert!(c.ix < nx && c.iy < ny);
        }
    }

    #[test]
    fn control_directions_are_unit_and_distinct(n in 2usize..200) {
        let u = ControlGrid::circle(n).unwrap();
        prop_assert_eq!(u.len(), n);
        for (k, a) in u.controls().iter().enumerate() {
            prop_assert!((a[0].hypot(a[1]) - 1.0).abs() <= 1e-12);
            for b in &u.controls()[..k] {
                prop_assert!(a != b);
            }
        }
    }

    #[test]
    fn translation_and_scaling_act_on_area(d in convex_domain(), s in 0.25f64..4.0, t in prop::array::uniform2(-3.0f64..3.0)) {
        let a = d.area().unwrap();
        prop_assert!((d.translated(t).unwrap().area().unwrap() - a).abs() <= 1e-9 * a);
        prop_assert!((d.scaled(s).unwrap().area().unwrap() - s * s * a).abs() <= 1e-9 * s * s * a);
        prop_assert!((d.scaled(s).unwrap().perimeter().unwrap() - s * d.perimeter().unwrap()).abs() <= 1e-9 * s * a.max(1.0) * 10.0);
    }
}

#[test]
fn grid_area_within_five_percent_at_64() {
    for d in [Domain::rectangle(6.0, 4.0).unwrap(), Domain::disk(1.0).unwrap()] {
        let g = build_spatial_grid(&d, 64, 64).unwrap();
        let h = g.cell_size();
        let a = g.len() as f64 * h[0] * h[1];
        let exact = d.area().unwrap();
        assert!((a - exact).abs() <= 0.05 * exact, "{a} vs {exact}");
    }
}

#[test]
fn polygon_perimeter_of_unit_square() {
    assert_eq!(polygon_perimeter(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), 4.0);
}
