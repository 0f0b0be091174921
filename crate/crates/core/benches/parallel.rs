//! Rayon vs sequential comparison for the symbolic hot paths.
//!
//! Run with the default features to get both paths in one binary:
//! the dispatching entry points use rayon, the `*_seq` twins never do.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use dsred_core::hierarchy::{generate_flow_kdv, prolong_apply, prolong_apply_seq, KdvMethod};
use dsred_core::lie::make_sln;
use dsred_core::poly::{DiffPoly, DiffRing};

fn big_poly(ring: &DiffRing, span: u32) -> DiffPoly {
    let mut p = DiffPoly::one();
    for k in 0..span {
        p = p.add(&ring.jet(0, k).pow(k % 3 + 1));
    }
    p.mul_seq(&p)
}

fn bench_poly_mul(c: &mut Criterion) {
    let ring = DiffRing::indexed("u", 1, 1);
    let a = big_poly(&ring, 7);
    let b = big_poly(&ring, 6);
    let mut g = c.benchmark_group("poly_mul");
    g.bench_function("dispatch", |bench| {
        bench.iter_batched(|| (a.clone(), b.clone()), |(a, b)| a.mul(&b), BatchSize::SmallInput)
    });
    g.bench_function("seq", |bench| {
        bench.iter_batched(|| (a.clone(), b.clone()), |(a, b)| a.mul_seq(&b), BatchSize::SmallInput)
    });
    g.finish();
}

fn bench_prolongation(c: &mut Criterion) {
    let sl2 = make_sln(2).unwrap();
    let f5 = generate_flow_kdv(&sl2, 5, KdvMethod::GaugeProjection).unwrap();
    let target = f5.rhs[0].mul_seq(&f5.rhs[0]);
    let mut g = c.benchmark_group("prolongation");
    g.bench_function("dispatch", |bench| {
        bench.iter(|| prolong_apply(&f5.ring, &f5.rhs, &target))
    });
    g.bench_function("seq", |bench| {
        bench.iter(|| prolong_apply_seq(&f5.ring, &f5.rhs, &target))
    });
    g.finish();
}

fn bench_flow_generation(c: &mut Criterion) {
    let sl2 = make_sln(2).unwrap();
    let mut g = c.benchmark_group("derive_kdv_m5");
    g.sample_size(10);
    g.bench_function("full_pipeline", |bench| {
        bench.iter(|| generate_flow_kdv(&sl2, 5, KdvMethod::GaugeProjection).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_poly_mul, bench_prolongation, bench_flow_generation);
criterion_main!(benches);
