use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use occlp::cheeger::{solve_cheeger, Resolution};
use occlp::expr::parse;
use occlp::geometry::Domain;
use occlp::lp::SimplexOptions;
use occlp::measure::{FnIntegrand, MeasureLp};
use occlp::ratio::{pinned_sweep, Goal, Pin, RatioOptions, SweepObjective};
use occlp::scalar::segment_system;

const BACKEND: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn cheeger(c: &mut Criterion) {
    let mut g = c.benchmark_group("cheeger");
    g.sample_size(10);
    let cases = [
        ("rectangle", Domain::rectangle(6.0, 4.0).unwrap(), Resolution::new(48, 32, 32, 8)),
        ("disk", Domain::disk(1.0).unwrap(), Resolution::new(32, 32, 32, 8)),
    ];
    for (name, d, res) in cases {
        g.bench_with_input(BenchmarkId::new(BACKEND, name), &(d, res), |b, (d, res)| {
            b.iter(|| black_box(solve_cheeger(d, *res, &RatioOptions::maximize()).unwrap()))
        });
    }
    g.finish();
}

/// 41 independent pinned LPs.
fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("pinned_sweep");
    g.sample_size(10);
    let lp = MeasureLp::assemble(
        segment_system(41, 5).unwrap(),
        &parse("-abs(x1)").unwrap(),
        &FnIntegrand(|_, _| 1.0),
        &[],
        8,
    )
    .unwrap();
    let pin = Pin {
        values: lp.system().sample(&parse("x1").unwrap()).unwrap(),
        lattice: None,
    };
    g.bench_function(BenchmarkId::new(BACKEND, "segment41"), |b| {
        b.iter(|| {
            black_box(
                pinned_sweep(
                    &lp,
                    std::slice::from_ref(&pin),
                    SweepObjective::Linear,
                    Goal::Minimize,
                    |c, mp, _| c[0].abs() + mp,
                    &SimplexOptions::default(),
                )
                .unwrap(),
            )
        })
    });
    g.finish();
}

criterion_group!(benches, cheeger, sweep);
criterion_main!(benches);
