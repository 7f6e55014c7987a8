//! Parallel and sequential paths over the same workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use feigen2d::cascade::{cascade, Precision};
use feigen2d::regions::FixedPointSetting;
use feigen2d::renorm::{solve_fixed_point, NewtonOptions};
use feigen2d::stableset::build_pieces;
use feigen2d::{ExecPolicy, Mode};

const POLICIES: [(&str, ExecPolicy); 2] = [("parallel", ExecPolicy::Parallel), ("sequential", ExecPolicy::Sequential)];

fn setting() -> FixedPointSetting {
    let reps = solve_fixed_point(20, &NewtonOptions::default()).expect("fixed point");
    FixedPointSetting::new(&reps.last().unwrap().s, Mode::Float).expect("setting")
}

fn pieces(c: &mut Criterion) {
    let set = setting();
    let mut g = c.benchmark_group("build_pieces_depth5");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| {
            b.iter(|| build_pieces(&set, 5, 3, p).unwrap())
        });
    }
    g.finish();
}

fn norms(c: &mut Criterion) {
    let set = setting();
    let mut g = c.benchmark_group("norm_constants_depth4");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| {
            b.iter(|| set.norm_constants(4, p).unwrap())
        });
    }
    g.finish();
}

fn bifurcations(c: &mut Criterion) {
    let mut g = c.benchmark_group("cascade_kmax5");
    g.sample_size(10);
    for (name, policy) in POLICIES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &policy, |b, &p| {
            b.iter(|| cascade(5, Precision::Double, p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pieces, norms, bifurcations);
criterion_main!(benches);
