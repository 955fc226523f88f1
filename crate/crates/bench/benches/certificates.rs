use std::sync::Arc;

use coarsescope::covers::brick_cover;
use coarsescope::filler::build_filler;
use coarsescope::fixtures::{self, filler_line_fixture, random_push_fixture};
use coarsescope::pu_maps::{barycentric_map, check_lipschitz};
use coarsescope::skeleton_push::push_to_skeleton;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn barycentric(c: &mut Criterion) {
    let mut g = c.benchmark_group("barycentric_map");
    for n in [500, 2000] {
        let space = Arc::new(fixtures::path_line(n));
        let cover = brick_cover(&space, 20.0, 1).unwrap().cover;
        g.bench_with_input(BenchmarkId::from_parameter(n), &cover, |b, cover| b.iter(|| barycentric_map(cover).unwrap()));
    }
    g.finish();
}

fn lipschitz(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_lipschitz");
    g.sample_size(20);
    for (name, space) in [("line_1000", fixtures::path_line(1000)), ("grid_30x30", fixtures::grid(30, 30, 1.0))] {
        let space = Arc::new(space);
        let f = barycentric_map(&brick_cover(&space, 8.0, space.euclidean_dim().unwrap_or(1)).unwrap().cover).unwrap();
        g.bench_function(name, |b| b.iter(|| check_lipschitz(&f, 1.0, 0.0).unwrap()));
    }
    g.finish();
}

fn push(c: &mut Criterion) {
    let px = random_push_fixture(&mut fixtures::rng(3), 200);
    c.bench_function("push_to_skeleton", |b| b.iter(|| push_to_skeleton(&px.f, &px.a, px.r, px.n, px.eps).unwrap()));
}

fn filler(c: &mut Criterion) {
    let fx = filler_line_fixture(0, 1.0, 1500).unwrap();
    let mut g = c.benchmark_group("build_filler");
    g.sample_size(10);
    g.bench_function("line_n0", |b| b.iter(|| build_filler(&fx.f, &fx.a, &fx.schedule, &fx.cover).unwrap()));
    g.finish();
}

criterion_group!(benches, barycentric, lipschitz, push, filler);
criterion_main!(benches);
