use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hubqc_bench::register;
use hubqc_core::mbqc::{cnot_pattern, run_cnot_unit, UnitPads, WireFrame};
use hubqc_core::quantum::{rotation, Axis, PlanarBasis};
use hubqc_core::rng::seeded;
use hubqc_core::Angle;

fn gates(c: &mut Criterion) {
    let mut g = c.benchmark_group("gates");
    for n in [8usize, 12, 16] {
        let s = register(n, 1);
        let u = rotation(Axis::Y, 0.3);
        g.bench_with_input(BenchmarkId::new("single", n), &n, |b, _| {
            b.iter_batched(|| s.clone(), |mut s| s.apply_single(n / 2, black_box(&u)).unwrap(), criterion::BatchSize::LargeInput)
        });
        g.bench_with_input(BenchmarkId::new("cz", n), &n, |b, _| {
            b.iter_batched(|| s.clone(), |mut s| s.apply_cz(0, n - 1).unwrap(), criterion::BatchSize::LargeInput)
        });
        g.bench_with_input(BenchmarkId::new("measure_planar", n), &n, |b, _| {
            let mut rng = seeded(2);
            b.iter(|| s.measure_planar(1, PlanarBasis::from(Angle::quarters(3)), &mut rng).unwrap())
        });
    }
    g.finish();
}

fn cnot_unit(c: &mut Criterion) {
    let pattern = cnot_pattern().unwrap();
    let s = register(2, 3);
    let mut rng = seeded(4);
    c.bench_function("cnot_unit", |b| {
        b.iter(|| {
            let pads = UnitPads::random(&mut rng);
            let frames = [WireFrame::default(); 2];
            run_cnot_unit(&s, [0, 1], pattern, frames, &pads, [[false; 4]; 2], &mut rng).unwrap()
        })
    });
}

criterion_group!(benches, gates, cnot_unit);
criterion_main!(benches);
