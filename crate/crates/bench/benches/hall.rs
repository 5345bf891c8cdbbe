use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use iqhall::hall_engine::{generic_structure_constants, HallContext};
use iqhall::iquiver::examples::{a2_split, a3_tau};
use iqhall::repmod::{ext1_dim, hom_dim};
use iqhall::scalars::{laurent_fit, LaurentV};
use iqhall::verify_qsp::serre_suite;
use iqhall_bench::{a2_serre, laurent_samples, matrix, modules};

fn linear_algebra(c: &mut Criterion) {
    let m = matrix(5, 40, 40, 7);
    c.bench_function("rank 40x40 F5", |b| b.iter(|| black_box(&m).rank()));
    c.bench_function("kernel 40x40 F5", |b| {
        b.iter(|| black_box(&m).kernel_basis())
    });
}

fn scalars(c: &mut Criterion) {
    let p = LaurentV::from_ints(&[(3, -1), (1, 2), (-1, -1)]);
    let samples = laurent_samples(&p, 4);
    c.bench_function("laurent fit 4 primes", |b| {
        b.iter(|| laurent_fit(black_box(&samples), 6).unwrap())
    });
}

fn homological(c: &mut Criterion) {
    let ctx = HallContext::new(&a3_tau(), 3).unwrap();
    let ms = modules(&ctx, 16, 5, 11);
    c.bench_function("hom dims a3tau q=3", |b| {
        b.iter(|| {
            ms.iter()
                .zip(ms.iter().rev())
                .map(|(x, y)| hom_dim(x, y))
                .sum::<usize>()
        })
    });
    c.bench_function("ext1 dims a3tau q=3", |b| {
        b.iter(|| {
            ms.iter()
                .zip(ms.iter().rev())
                .map(|(x, y)| ext1_dim(x, y).unwrap())
                .sum::<usize>()
        })
    });
}

fn products(c: &mut Criterion) {
    c.bench_function("S1*S2*S1 split A2 q=3 cold", |b| {
        b.iter_batched(
            || HallContext::new(&a2_split(), 3).unwrap(),
            |ctx| {
                let (s1, s2) = (ctx.simple(0).unwrap(), ctx.simple(1).unwrap());
                ctx.mul_all(&[s1.clone(), s2, s1]).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
    let mut g = c.benchmark_group("suites");
    g.sample_size(10);
    g.bench_function("serre suite split A2 q=3", |b| {
        b.iter(|| serre_suite(&a2_split(), 3).unwrap())
    });
    let (iq, comb) = a2_serre();
    g.bench_function("generic serre constants 2,3,5 check 7", |b| {
        b.iter(|| generic_structure_constants(&iq, &comb, &[2, 3, 5], 7, 6).unwrap())
    });
    g.finish();
}

criterion_group!(benches, linear_algebra, scalars, homological, products);
criterion_main!(benches);
