use occlp::curve::StationaryPoint;
use occlp::expr::parse;
use occlp::oracle::scalar_system;
use occlp::schedule::{synthesize_schedule, verify_schedule, SchedulePiece};
use proptest::prelude::*;

fn rest(x: f64) -> SchedulePiece {
    SchedulePiece::Stationary(StationaryPoint {
        x: [x, 0.0],
        control: [0.0, 0.0],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cumulative_constraint_holds_at_every_sample(
        a in 0.1f64..1.0,
        b in 0.1f64..1.0,
        s in 0.0f64..1.0,
        rounds in 1usize..60,
    ) {
        let sys = scalar_system(41).unwrap();
        let lam = b / (a + b) + s * a / (a + b);
        let g = parse("x1").unwrap();
        let sched = synthesize_schedule(vec![rest(-a), rest(b)], &[lam, 1.0 - lam], Some(&g), &sys, 2.0, rounds)
            .unwrap();
        let rep = verify_schedule(&sched, &[&g]).unwrap();
        prop_assert!(rep.max_cumulative[0] <= 1e-12, "max {}", rep.max_cumulative[0]);
    }

    #[test]
    fn running_averages_approach_the_mixture_at_rate_one_over_n(
        xs in prop::collection::vec(-1.0f64..1.0, 2..4),
        raw in prop::collection::vec(0.05f64..1.0, 4),
    ) {
        let sys = scalar_system(41).unwrap();
        let k = xs.len();
        let total: f64 = raw[..k].iter().sum();
        let mut w: Vec<f64> = raw[..k].iter().map(|v| v / total).collect();
        w[k - 1] = 1.0 - w[..k - 1].iter().sum::<f64>();
        let g = parse("x1").unwrap();
        let t_k = 2.0;
        let sched = synthesize_schedule(xs.iter().map(|x| rest(*x)).collect(), &w, None, &sys, t_k, 400).unwrap();
        let rep = verify_schedule(&sched, &[&g]).unwrap();
        // Steering takes at most k·T_K per round and the dwell of round n is
        // n, so n·distance stays below 4·k·T_K·max|g|.
        let bound = 4.0 * k as f64 * t_k;
        for r in &rep.rounds {
            prop_assert!(r.n as f64 * r.distances[0] <= bound, "round {}: {}", r.n, r.distances[0]);
        }
    }
}
