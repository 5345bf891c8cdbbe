use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use iqhall::boundalg::{iquiver_algebra, path_algebra, BoundAlgebra};
use iqhall::dynkin_bases::{KqDynkin, Word};
use iqhall::hall_engine::{HallContext, HallElement, ReducedParams, XKey};
use iqhall::iquiver::examples::*;
use iqhall::iquiver::IQuiver;
use iqhall::linalg_ff::{FpMatrix, Subspace};
use iqhall::repmod::{
    enumerate_reps, random_module, torus_class, torus_class_ordered, Rep, ENUMERATION_LIMIT,
};
use iqhall::scalars::{int, laurent_fit, LaurentV, QSqrt};
use iqhall::verify_qsp::{reduced_suite, sample_p_leq1, serre_suite};

const FIT_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn laurent() -> impl Strategy<Value = LaurentV> {
    prop::collection::vec((-8i64..=8, -5i64..=5), 0..6).prop_map(|t| {
        let mut p = LaurentV::zero();
        for (k, c) in t {
            p.add_term(k, int(c));
        }
        p
    })
}

fn qsqrt(q: u64) -> impl Strategy<Value = QSqrt> {
    (-20i64..=20, 1i64..=6, -20i64..=20, 1i64..=6).prop_map(move |(a, b, c, d)| {
        QSqrt::new(iqhall::scalars::rat(a, b), iqhall::scalars::rat(c, d), q)
    })
}

fn matrix(p: u64) -> impl Strategy<Value = FpMatrix> {
    (1usize..6, 1usize..6).prop_flat_map(move |(r, c)| {
        prop::collection::vec(0..p, r * c)
            .prop_map(move |d| FpMatrix::from_data(p, r, c, d).unwrap())
    })
}

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laurent_fit_round_trip(p in laurent()) {
        let samples: Vec<(u64, QSqrt)> = FIT_PRIMES.iter().map(|&q| (q, p.eval(q))).collect();
        prop_assert_eq!(laurent_fit(&samples, 8).unwrap(), p);
    }

    #[test]
    fn qsqrt_is_a_commutative_ring(a in qsqrt(3), b in qsqrt(3), c in qsqrt(3)) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, QSqrt::zero(3));
        if !b.is_zero() {
            prop_assert_eq!((&a * &b).try_div(&b).unwrap(), a);
        }
    }

    #[test]
    fn rank_nullity_and_transpose(m in matrix(3)) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
        prop_assert_eq!(m.rank() + m.kernel_basis().dim(), m.cols);
        let (r, _, _) = m.rref();
        prop_assert_eq!(r.rref().0, r.clone());
        for v in m.kernel_basis().vectors() {
            prop_assert!(m.apply(&v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn modular_dimension_formula(a in prop::collection::vec(prop::collection::vec(0u64..2, 5), 0..4),
                                 b in prop::collection::vec(prop::collection::vec(0u64..2, 5), 0..4)) {
        let (a, b) = (Subspace::from_vectors(2, 5, &a), Subspace::from_vectors(2, 5, &b));
        let s = a.sum(&b).unwrap();
        let i = a.intersect(&b).unwrap();
        prop_assert_eq!(a.dim() + b.dim(), s.dim() + i.dim());
    }

    #[test]
    fn euler_form_is_tau_symmetric(x in prop::collection::vec(-3i64..=3, 3), y in prop::collection::vec(-3i64..=3, 3)) {
        for iq in [a3_tau(), a3_split()] {
            let tx: Vec<i64> = (0..3).map(|i| x[iq.tau[i]]).collect();
            let ty: Vec<i64> = (0..3).map(|i| y[iq.tau[i]]).collect();
            prop_assert_eq!(iq.euler(&tx, &ty), iq.euler(&x, &y));
            let mut direct: i64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            for a in &iq.arrows {
                direct -= x[a.src] * y[a.tgt];
            }
            prop_assert_eq!(iq.euler(&x, &y), direct);
        }
    }
}

fn a2_ctx() -> &'static HallContext {
    use std::sync::OnceLock;
    static CTX: OnceLock<HallContext> = OnceLock::new();
    CTX.get_or_init(|| HallContext::new(&a2_split(), 2).unwrap())
}

fn random_element(ctx: &HallContext, seed: u64) -> HallElement {
    let mut r = rng(seed);
    let a = ctx.random_symbol(&mut r, 2, 1).unwrap();
    let b = ctx.random_symbol(&mut r, 2, 1).unwrap();
    a.add(&b.scale(&QSqrt::from_int(-2, ctx.p)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hall_product_is_associative(s in any::<u64>()) {
        let ctx = a2_ctx();
        let (a, b, c) = (random_element(ctx, s), random_element(ctx, s ^ 1), random_element(ctx, s ^ 2));
        let l = ctx.mul(&ctx.mul(&a, &b).unwrap(), &c).unwrap();
        let r = ctx.mul(&a, &ctx.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn torus_is_laurent(a in prop::collection::vec(-3i64..=3, 2), b in prop::collection::vec(-3i64..=3, 2)) {
        let ctx = a2_ctx();
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(ctx.mul(&ctx.torus(a), &ctx.torus(b)).unwrap(), ctx.torus(sum));
    }

    #[test]
    fn products_respect_grading(s in any::<u64>()) {
        let ctx = a2_ctx();
        let mut r = rng(s);
        let a = ctx.random_symbol(&mut r, 2, 1).unwrap();
        let b = ctx.random_symbol(&mut r, 2, 1).unwrap();
        let grade = |e: &HallElement| {
            let (x, al) = e.terms.keys().next().unwrap();
            ctx.grade(x, al)
        };
        let want: Vec<i64> = grade(&a).iter().zip(grade(&b)).map(|(x, y)| x + y).collect();
        let kq_sum: Vec<i64> = {
            let (xa, _) = a.terms.keys().next().unwrap();
            let (xb, _) = b.terms.keys().next().unwrap();
            ctx.x_dims(xa).iter().zip(ctx.x_dims(xb)).map(|(x, y)| x + y).collect()
        };
        for (x, al) in ctx.mul(&a, &b).unwrap().terms.keys() {
            prop_assert_eq!(ctx.grade(x, al), want.clone());
            // the kQ-part never grows past the sum of the factors' kQ-parts
            prop_assert!(ctx.x_dims(x).iter().zip(&kq_sum).all(|(u, v)| u <= v));
        }
    }

    #[test]
    fn torus_class_ignores_peeling_order(s in any::<u64>()) {
        let ctx = HallContext::new(&a3_tau(), 2).unwrap();
        let mut r = rng(s);
        for k in sample_p_leq1(&ctx, 3, 6, s).unwrap() {
            let mut order: Vec<usize> = (0..3).collect();
            order.shuffle(&mut r);
            prop_assert_eq!(torus_class_ordered(&k, &order).unwrap(), torus_class(&k).unwrap());
        }
    }
}

/// Copies a module over the algebra of a full subquiver into the ambient algebra, by arrow name.
fn embed(m: &Rep, sub: &IQuiver, amb: &IQuiver, amb_alg: &Arc<BoundAlgebra>) -> Rep {
    let vmap: Vec<usize> = sub
        .vertices
        .iter()
        .map(|v| amb.vertex(v).unwrap())
        .collect();
    let mut dims = vec![0; amb.n()];
    for (i, &j) in vmap.iter().enumerate() {
        dims[j] = m.dims[i];
    }
    let maps: Vec<FpMatrix> = amb_alg
        .quiver
        .arrows
        .iter()
        .map(|a| match m.alg.quiver.arrow_by_name(&a.name) {
            Some(k) => m.maps[k].clone(),
            None => FpMatrix::zeros(m.p, dims[a.tgt], dims[a.src]),
        })
        .collect();
    Rep::new(amb_alg.clone(), m.p, dims, maps).unwrap()
}

fn lift_terms(
    e: &HallElement,
    sub_ctx: &HallContext,
    amb_ctx: &HallContext,
    vmap: &[usize],
) -> HallElement {
    let mut out = HallElement::zero(e.q);
    for ((x, al), c) in &e.terms {
        let pad = |v: &[i64]| {
            let mut w = vec![0i64; amb_ctx.iq.n()];
            for (i, &j) in vmap.iter().enumerate() {
                w[j] = v[i];
            }
            w
        };
        let x_amb = embed(&sub_ctx.x_rep(x), &sub_ctx.iq, &amb_ctx.iq, &amb_ctx.alg);
        out.add_term(amb_ctx.classify_kq(&x_amb).unwrap(), pad(al), c.clone());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn subquiver_products_embed(s in any::<u64>()) {
        for (amb, keep) in [(a3_tau(), vec![0usize, 2]), (a3_split(), vec![0, 1]), (a3_tau(), vec![1])] {
            let sub = amb.full_subquiver(&keep).unwrap();
            let (sub_ctx, amb_ctx) = (HallContext::new(&sub, 2).unwrap(), HallContext::new(&amb, 2).unwrap());
            let vmap: Vec<usize> = sub.vertices.iter().map(|v| amb.vertex(v).unwrap()).collect();
            let mut r = rng(s);
            let m = random_module(&sub_ctx.alg, 2, &mut r, 3);
            let n = random_module(&sub_ctx.alg, 2, &mut r, 3);
            let inner = sub_ctx.module_product(&m, &n).unwrap();
            let outer = amb_ctx
                .module_product(&embed(&m, &sub, &amb, &amb_ctx.alg), &embed(&n, &sub, &amb, &amb_ctx.alg))
                .unwrap();
            prop_assert_eq!(lift_terms(&inner, &sub_ctx, &amb_ctx, &vmap), outer);
        }
    }

    #[test]
    fn generic_extension_is_associative(letters in prop::collection::vec(0usize..3, 3)) {
        let kq = KqDynkin::new(&a3_split(), 2).unwrap();
        let s: Vec<Rep> = letters.iter().map(|&i| kq.simple(i)).collect();
        let left = kq.generic_extension(&kq.generic_extension(&s[0], &s[1]).unwrap(), &s[2]).unwrap();
        let right = kq.generic_extension(&s[0], &kq.generic_extension(&s[1], &s[2]).unwrap()).unwrap();
        prop_assert_eq!(kq.partition_of(&left).unwrap(), kq.partition_of(&right).unwrap());
    }
}

#[test]
fn degeneration_is_a_partial_order() {
    let kq = KqDynkin::new(&a3_split(), 2).unwrap();
    for dims in [vec![1, 1, 1], vec![1, 2, 1], vec![2, 1, 1], vec![1, 1, 2]] {
        let mods: Vec<Rep> = kq
            .partitions(dims.iter().sum())
            .into_iter()
            .filter(|l| kq.roots.dims_of(l) == dims)
            .map(|l| kq.module_of(&l))
            .collect();
        assert!(mods.len() > 1);
        let leq: Vec<Vec<bool>> = mods
            .iter()
            .map(|a| {
                mods.iter()
                    .map(|b| kq.degeneration_leq(a, b).unwrap())
                    .collect()
            })
            .collect();
        let n = mods.len();
        for i in 0..n {
            assert!(leq[i][i]);
            for j in 0..n {
                if i != j {
                    assert!(!(leq[i][j] && leq[j][i]), "antisymmetry fails on {dims:?}");
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] {
                        assert!(leq[i][k], "transitivity fails on {dims:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn word_map_is_onto() {
    let kq = KqDynkin::new(&a3_tau(), 2).unwrap();
    for lambda in kq.partitions(3) {
        let dims = kq.roots.dims_of(&lambda);
        let hit = kq
            .words_for(&dims)
            .iter()
            .any(|w| kq.word_to_partition(w).unwrap() == lambda);
        assert!(hit, "no word reaches {lambda:?}");
    }
}

#[test]
fn distinguished_words_agree_across_primes() {
    let kqs: Vec<KqDynkin> = [2, 3, 5]
        .iter()
        .map(|&p| KqDynkin::new(&a2(), p).unwrap())
        .collect();
    for len in 1..=4 {
        for letters in
            (0..2usize.pow(len)).map(|b| (0..len).map(|k| (b >> k) & 1).collect::<Vec<_>>())
        {
            let w = Word::new(letters);
            let shape: Vec<(Vec<u32>, bool, bool)> = kqs
                .iter()
                .map(|k| {
                    let l = k.word_to_partition(&w).unwrap();
                    let g = k.reduced_filtration_count(&l, &w).unwrap();
                    (l, g > 0, g == 1)
                })
                .collect();
            assert!(
                shape.windows(2).all(|p| p[0] == p[1]),
                "word {:?}",
                w.letters
            );
        }
    }
    // γ itself is a polynomial in q: the word 1 1 2 1 over M = S1 ⊕ P1 counts q + 1 chains
    let w = Word::new(vec![0, 0, 1, 0]);
    let counts: Vec<u64> = kqs
        .iter()
        .map(|k| {
            k.reduced_filtration_count(&k.word_to_partition(&w).unwrap(), &w)
                .unwrap()
        })
        .collect();
    assert_eq!(counts, vec![3, 4, 6]);
}

#[test]
fn serre_relation_sets_match_across_primes() {
    for iq in [a2_split(), a3_tau(), swap_pair()] {
        let (r2, r3) = (serre_suite(&iq, 2).unwrap(), serre_suite(&iq, 3).unwrap());
        let ids = |r: &iqhall::verify_qsp::VerificationReport| -> Vec<(String, bool)> {
            r.relations.iter().map(|x| (x.id.clone(), x.pass)).collect()
        };
        assert_eq!(ids(&r2), ids(&r3));
    }
}

#[test]
fn reduced_and_unreduced_agree_without_k() {
    for iq in [a2_split(), a3_tau(), swap_pair()] {
        let full = serre_suite(&iq, 3).unwrap();
        let red = reduced_suite(&iq, 3, &ReducedParams::ones(&iq, 3)).unwrap();
        let pick = |r: &iqhall::verify_qsp::VerificationReport| -> BTreeMap<String, bool> {
            r.relations
                .iter()
                .filter(|x| x.id.starts_with("comm:"))
                .map(|x| (x.id.clone(), x.pass))
                .collect()
        };
        assert_eq!(pick(&full), pick(&red));
        assert!(full.pass && red.pass);
    }
}

#[test]
fn every_enumerated_rep_satisfies_relations() {
    let alg = iquiver_algebra(&swap_pair()).unwrap();
    for dims in [vec![1, 1], vec![2, 1], vec![2, 2]] {
        for m in enumerate_reps(&alg, 2, &dims, ENUMERATION_LIMIT).unwrap() {
            assert!(m.violated_relation().is_none());
            assert_eq!(Rep::from_json(&alg, &m.to_json()).unwrap(), m);
        }
    }
    let kq = path_algebra(&a2()).unwrap();
    assert_eq!(
        enumerate_reps(&kq, 3, &[1, 1], ENUMERATION_LIMIT)
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn qsqrt_json_round_trip() {
    let x = QSqrt::new(iqhall::scalars::rat(-3, 4), iqhall::scalars::rat(5, 7), 5);
    assert_eq!(QSqrt::from_json(&x.to_json()).unwrap(), x);
    let p = LaurentV::from_ints(&[(3, -1), (1, 2), (-1, -1)]);
    assert_eq!(LaurentV::from_json(&p.to_json()).unwrap(), p);
}

#[test]
fn xkeys_of_simples_are_single_roots() {
    let ctx = a2_ctx();
    for i in 0..2 {
        match ctx.simple_key(i).unwrap() {
            XKey::Roots(m) => assert_eq!(m.iter().sum::<u32>(), 1),
            XKey::Class(_) => panic!("Dynkin keys use root multiplicities"),
        }
    }
}
