use std::f64::consts::PI;

use occlp::geometry::{polygon_area, polygon_perimeter, Domain, Point};
use occlp::oracle::{cheeger_constant, cheeger_set_boundary, cheeger_set_perimeter, double_well_oracle};
use proptest::prelude::*;

fn convex_polygon() -> impl Strategy<Value = Vec<Point>> {
    (prop::collection::vec(0.2f64..1.2, 3..9), 0.5f64..3.0, 0.5f64..3.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_filter_map("needs spread vertices", |(gaps, a, b, cx, cy)| {
            let total: f64 = gaps.iter().sum();
            if gaps.iter().any(|g| g / total >= 0.45) {
                return None;
            }
            let mut t = 0.0;
            Some(
                gaps.iter()
                    .map(|g| {
                        let th = 2.0 * PI * t / total;
                        t += g;
                        [cx + a * th.cos(), cy + b * th.sin()]
                    })
                    .collect(),
            )
        })
}

/// `true` when `p` is inside the closed convex polygon up to `tol`.
fn in_closed_polygon(poly: &[Point], p: Point, tol: f64) -> bool {
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / len >= -tol
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn offset_set_has_ratio_equal_to_radius(poly in convex_polygon()) {
        let d = Domain::convex_polygon(poly).unwrap();
        let r = cheeger_constant(&d).unwrap().r_star;
        let inner = d.inner_parallel_polygon(r).unwrap();
        let (a, p) = (polygon_area(&inner), polygon_perimeter(&inner));
        prop_assert!((a - PI * r * r).abs() <= 1e-9 * (1.0 + a));
        let ratio = (a + r * p + PI * r * r) / (p + 2.0 * PI * r);
        prop_assert!((ratio - r).abs() <= 1e-9);
        let o = cheeger_constant(&d).unwrap();
        prop_assert!((o.v_star - o.r_star).abs() <= 1e-12);
        let per = cheeger_set_perimeter(&d).unwrap();
        prop_assert!((per - (p + 2.0 * PI * r)).abs() <= 1e-9 * per);
    }

    #[test]
    fn boundary_lies_in_the_closed_domain(poly in convex_polygon()) {
        let d = Domain::convex_polygon(poly.clone()).unwrap();
        for p in cheeger_set_boundary(&d, 500).unwrap() {
            prop_assert!(in_closed_polygon(&poly, p, 1e-9));
        }
    }

    #[test]
    fn radius_scales_with_the_domain(poly in convex_polygon(), s in prop::sample::select(vec![0.5, 2.0])) {
        let d = Domain::convex_polygon(poly).unwrap();
        let r = cheeger_constant(&d).unwrap().r_star;
        let rs = cheeger_constant(&d.scaled(s).unwrap()).unwrap().r_star;
        prop_assert!((rs - s * r).abs() <= 1e-9 * s * r);
    }

    #[test]
    fn radius_ignores_translation(w in 0.5f64..6.0, h in 0.5f64..6.0, t in prop::array::uniform2(-5.0f64..5.0)) {
        let d = Domain::rectangle(w, h).unwrap();
        let a = cheeger_constant(&d).unwrap().r_star;
        let b = cheeger_constant(&d.translated(t).unwrap()).unwrap().r_star;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        let bd = cheeger_set_boundary(&d.translated(t).unwrap(), 200).unwrap();
        prop_assert!(bd.iter().all(|p| (p[0] - t[0]).abs() <= 0.5 * w + 1e-9 && (p[1] - t[1]).abs() <= 0.5 * h + 1e-9));
    }

    #[test]
    fn double_well_mixture_has_the_mean(m in -0.999f64..0.999) {
        let o = double_well_oracle(m).unwrap();
        prop_assert_eq!(o.v_star, 0.0);
        prop_assert!((o.lambda * o.support[0] + (1.0 - o.lambda) * o.support[1] - m).abs() <= 1e-12);
    }
}
