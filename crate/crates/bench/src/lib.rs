//! Workloads shared by the benchmarks.

use iqhall::hall_engine::{GenericCombination, GenericFactor, HallContext};
use iqhall::iquiver::examples::a2_split;
use iqhall::linalg_ff::FpMatrix;
use iqhall::repmod::{random_module, Rep};
use iqhall::scalars::{LaurentV, QSqrt};
use iqhall::IQuiver;

/// Dense pseudo-random matrix over F_p.
pub fn matrix(p: u64, rows: usize, cols: usize, seed: u64) -> FpMatrix {
    let mut x = seed | 1;
    let data = (0..rows * cols)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x % p
        })
        .collect();
    FpMatrix::from_data(p, rows, cols, data).expect("shape matches")
}

/// Samples of a Laurent polynomial at the first `k` primes.
pub fn laurent_samples(p: &LaurentV, k: usize) -> Vec<(u64, QSqrt)> {
    [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        .iter()
        .take(k)
        .map(|&q| (q, p.eval(q)))
        .collect()
}

/// `count` random modules of total dimension at most `max_dim`.
pub fn modules(ctx: &HallContext, count: usize, max_dim: usize, seed: u64) -> Vec<Rep> {
    let mut rng = iqhall::seeded_rng(seed);
    (0..count)
        .map(|_| random_module(&ctx.alg, ctx.p, &mut rng, max_dim))
        .collect()
}

/// The Serre combination S2 S1 S1 − [2] S1 S2 S1 + S1 S1 S2 over split A2.
pub fn a2_serre() -> (IQuiver, GenericCombination) {
    let iq = a2_split();
    let (s1, s2) = (
        GenericFactor::simple(&iq, 0).unwrap(),
        GenericFactor::simple(&iq, 1).unwrap(),
    );
    let comb = vec![
        (LaurentV::one(), vec![s2.clone(), s1.clone(), s1.clone()]),
        (LaurentV::qint(-2), vec![s1.clone(), s2.clone(), s1.clone()]),
        (LaurentV::one(), vec![s1.clone(), s1, s2]),
    ];
    (iq, comb)
}
