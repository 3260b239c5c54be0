use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ghzlab_core::landscape::{max_violation, scan, AngleGrid};
use ghzlab_core::lhv::{enumerate_parity, ghz_system, system_slots};
use ghzlab_core::sgsim::run_sequence;
use ghzlab_core::stabilizer::{hardy_table, verify_ghz_relations};
use ghzlab_core::states::GoldsteinParams;

fn stabilizers(c: &mut Criterion) {
    c.bench_function("ghz relations", |b| b.iter(verify_ghz_relations));
    let p = GoldsteinParams::real(0.4, 0.5, 0.6).unwrap();
    c.bench_function("hardy table", |b| b.iter(|| hardy_table(black_box(&p)).unwrap()));
}

fn lhv(c: &mut Criterion) {
    let system = ghz_system();
    let slots = system_slots(&system);
    c.bench_function("enumerate ghz", |b| b.iter(|| enumerate_parity(black_box(&system), &slots).unwrap()));
}

fn landscape(c: &mut Criterion) {
    let mut g = c.benchmark_group("landscape");
    g.sample_size(10);
    let grid = AngleGrid::new(400).unwrap();
    g.bench_function("scan 400", |b| b.iter(|| scan(black_box(grid)).unwrap()));
    g.bench_function("max violation 400", |b| b.iter(|| max_violation(black_box(grid)).unwrap()));
    g.finish();
}

fn stern_gerlach(c: &mut Criterion) {
    let mut g = c.benchmark_group("stern-gerlach");
    g.sample_size(10);
    g.bench_function("1e5 shots", |b| b.iter(|| run_sequence(black_box(100_000), 1).unwrap()));
    g.finish();
}

criterion_group!(benches, stabilizers, lhv, landscape, stern_gerlach);
criterion_main!(benches);
