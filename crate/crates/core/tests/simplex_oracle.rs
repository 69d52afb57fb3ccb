mod common;

use common::{enumerate_bases, random_lp};
use occlp::lp::{solve, LpStatus, StandardLp};

fn check_instance(seed: u64) {
    let r = random_lp(seed, 6, 14);
    let lp = StandardLp::new(&r.rows, r.b.clone(), r.c.clone()).unwrap();
    let s = solve(&lp).unwrap();
    match enumerate_bases(&r) {
        None => assert_eq!(s.status, LpStatus::Infeasible, "seed {seed}"),
        Some(best) => {
            assert_eq!(s.status, LpStatus::Optimal, "seed {seed}");
            assert!(
                (s.objective - best).abs() <= 1e-8 * (1.0 + best.abs()),
                "seed {seed}: simplex {} vs enumeration {best}",
                s.objective
            );
            let bmax = r.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let res = lp.residual(&s.x);
            assert!(res.iter().all(|v| v.abs() <= 1e-8 * (1.0 + bmax)), "seed {seed}");
            assert!(s.x.iter().all(|v| *v >= -1e-10));
            assert!(s.support().len() <= lp.n_rows());
        }
    }
}

#[test]
fn matches_basis_enumeration_on_200_seeds() {
    for seed in 0..200 {
        check_instance(seed);
    }
}

#[test]
fn five_by_twelve_instances() {
    for seed in 1000..1200 {
        let r = random_lp(seed, 5, 12);
        let lp = StandardLp::new(&r.rows, r.b.clone(), r.c.clone()).unwrap();
        let s = solve(&lp).unwrap();
        match enumerate_bases(&r) {
            None => assert_eq!(s.status, LpStatus::Infeasible),
            Some(best) => assert!((s.objective - best).abs() <= 1e-8 * (1.0 + best.abs())),
        }
    }
}

#[test]
fn duality_gap_and_complementary_slackness() {
    for seed in 0..200 {
        let r = random_lp(seed, 6, 14);
        let lp = StandardLp::new(&r.rows, r.b.clone(), r.c.clone()).unwrap();
        let s = solve(&lp).unwrap();
        if !s.is_optimal() {
            continue;
        }
        let dual_obj: f64 = s.duals.iter().zip(&r.b).map(|(y, b)| y * b).sum();
        assert!((s.objective - dual_obj).abs() <= 1e-7 * (1.0 + s.objective.abs()), "seed {seed}");
        for j in 0..lp.n_cols() {
            let d = r.c[j] - (0..lp.n_rows()).map(|i| s.duals[i] * lp.entry(i, j)).sum::<f64>();
            assert!(d >= -1e-7, "seed {seed}: reduced cost {d} at {j}");
            assert!((d * s.x[j]).abs() <= 1e-7, "seed {seed}");
        }
    }
}

#[test]
fn identical_input_gives_identical_output() {
    for seed in 0..50 {
        let r = random_lp(seed, 6, 14);
        let lp = StandardLp::new(&r.rows, r.b.clone(), r.c.clone()).unwrap();
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
