//! Acceptance suite: one PASS/FAIL line per criterion, exact comparisons throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use iqhall::boundalg::{iquiver_algebra, path_algebra, regular_projective, BoundAlgebra};
use iqhall::dynkin_bases::{monomial_basis_check, pbw_basis_check, WordChoice};
use iqhall::hall_engine::{
    generic_structure_constants, GenericCombination, GenericFactor, HallContext, HallElement, XKey,
};
use iqhall::iquiver::examples::*;
use iqhall::iquiver::{
    diagonal_iquiver, diamond_name, double_framed, enriched_quiver, eps_name, prime_name, IQuiver,
};
use iqhall::repmod::{
    aut_count, enumerate_reps, ext1_classify, ext1_dim, ext2_dim, hom_dim, iso_test,
    make_generalized_simple, submodules, Caps, Registry, Rep, ENUMERATION_LIMIT,
};
use iqhall::scalars::{LaurentV, QSqrt};
use iqhall::verify_qsp::{
    bridgeland_suite, euler_central_suite, rank2_identities, serre_suite, VerificationReport,
};

type Outcome = Result<String, String>;

fn report_outcome(r: iqhall::Result<VerificationReport>) -> Outcome {
    let r = r.map_err(|e| e.to_string())?;
    if r.pass {
        Ok(format!("{} {} relations", r.algebra, r.relations.len()))
    } else {
        Err(format!(
            "{} failing: {}",
            r.algebra,
            r.failures().join(", ")
        ))
    }
}

fn c1_rank2() -> Outcome {
    let mut n = 0;
    for q in [2, 3, 5] {
        report_outcome(rank2_identities(q))?;
        n += 5;
    }
    Ok(format!("{n} identities"))
}

fn c2_serre() -> Outcome {
    let algebras = [a2_split(), a3_split(), a3_tau(), d4_split(), swap_pair()];
    let jobs: Vec<(IQuiver, u64)> = algebras
        .iter()
        .flat_map(|a| [2, 3].map(|q| (a.clone(), q)))
        .collect();
    let out: Vec<Outcome> = jobs
        .par_iter()
        .map(|(a, q)| report_outcome(serre_suite(a, *q)))
        .collect();
    let mut total = 0;
    for o in out {
        o?;
        total += 1;
    }
    Ok(format!("{total} suites"))
}

fn c3_bridgeland() -> Outcome {
    for base in [a1(), a2()] {
        for q in [2, 3] {
            report_outcome(bridgeland_suite(&base, q))?;
        }
    }
    Ok("A1, A2 at q=2,3".into())
}

fn all_kq_keys(ctx: &HallContext, max_dim: usize) -> Vec<XKey> {
    let roots = ctx.root_modules().expect("Dynkin");
    let heights: Vec<usize> = roots.roots.iter().map(|b| b.iter().sum()).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; heights.len()];
    fn rec(k: usize, left: usize, h: &[usize], cur: &mut Vec<u32>, out: &mut Vec<XKey>) {
        if k == h.len() {
            out.push(XKey::Roots(cur.clone()));
            return;
        }
        let mut m = 0;
        while m * h[k] <= left {
            cur[k] = m as u32;
            rec(k + 1, left - m * h[k], h, cur, out);
            m += 1;
        }
        cur[k] = 0;
    }
    rec(0, max_dim, &heights, &mut cur, &mut out);
    out
}

fn total(x: &[i64]) -> i64 {
    x.iter().sum()
}

fn c4_normal_form() -> Outcome {
    let iq = a2_split();
    let ctx = HallContext::new(&iq, 2)
        .map_err(|e| e.to_string())?
        .with_peeling_check();
    let keys = all_kq_keys(&ctx, 4);
    let mut products = 0;
    for x in &keys {
        for y in &keys {
            if total(&ctx.x_dims(x)) + total(&ctx.x_dims(y)) > 4 {
                continue;
            }
            let (m, n) = (ctx.x_rep(x), ctx.x_rep(y));
            ctx.module_product(&m, &n)
                .map_err(|e| format!("{x:?}*{y:?}: {e}"))?;
            // generalized simples enter through the torus; mix them into the factors too
            for i in 0..iq.n() {
                let e = make_generalized_simple(&ctx.alg, 2, i);
                if total(&ctx.x_dims(x)) + 2 + total(&ctx.x_dims(y)) <= 6 {
                    ctx.module_product(&m.direct_sum(&e), &n)
                        .map_err(|e| e.to_string())?;
                    ctx.module_product(&m, &n.direct_sum(&e))
                        .map_err(|e| e.to_string())?;
                    products += 2;
                }
            }
            products += 1;
        }
    }
    let one = QSqrt::one(2);
    for x in &keys {
        let (c, k, a) = ctx.normalize(&ctx.x_rep(x)).map_err(|e| e.to_string())?;
        if c != one || &k != x || a.iter().any(|&t| t != 0) {
            return Err(format!("normalize not idempotent on {x:?}"));
        }
    }
    let mut rng = iqhall::seeded_rng(200);
    for t in 0..200 {
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<HallElement, String> {
            let mut e = ctx.random_symbol(rng, 2, 1).map_err(|e| e.to_string())?;
            if rng.gen_bool(0.5) {
                let f = ctx.random_symbol(rng, 2, 1).map_err(|e| e.to_string())?;
                e = e.add(&f.scale(&QSqrt::v(2)));
            }
            Ok(e)
        };
        let (a, b, c) = (pick(&mut rng)?, pick(&mut rng)?, pick(&mut rng)?);
        let l = ctx
            .mul(&ctx.mul(&a, &b).map_err(|e| e.to_string())?, &c)
            .map_err(|e| e.to_string())?;
        let r = ctx
            .mul(&a, &ctx.mul(&b, &c).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if l != r {
            return Err(format!("associativity fails on triple {t}"));
        }
    }
    Ok(format!(
        "{} kQ classes, {products} products, {} peeling cross-checks, 200 triples",
        keys.len(),
        ctx.peel_checked()
    ))
}

fn c5_generic() -> Outcome {
    let iq = a2_split();
    let (s1, s2) = (
        GenericFactor::simple(&iq, 0).unwrap(),
        GenericFactor::simple(&iq, 1).unwrap(),
    );
    let serre: GenericCombination = vec![
        (LaurentV::one(), vec![s2.clone(), s1.clone(), s1.clone()]),
        (LaurentV::qint(-2), vec![s1.clone(), s2.clone(), s1.clone()]),
        (LaurentV::one(), vec![s1.clone(), s1.clone(), s2.clone()]),
    ];
    let got =
        generic_structure_constants(&iq, &serre, &[2, 3, 5], 7, 6).map_err(|e| e.to_string())?;
    let want = LaurentV::from_ints(&[(3, -1), (1, 2), (-1, -1)]);
    let key = (XKey::Roots(s2.roots.clone()), vec![1, 0]);
    if got.get(&key) != Some(&want) {
        return Err(format!(
            "Serre coefficient {:?}",
            got.get(&key).map(|c| c.to_string())
        ));
    }
    let prod: GenericCombination = vec![(LaurentV::one(), vec![s1.clone(), s2.clone()])];
    let got =
        generic_structure_constants(&iq, &prod, &[2, 3, 5], 7, 6).map_err(|e| e.to_string())?;
    let table = iq.root_table().unwrap();
    let mut p1 = vec![0u32; table.positive_roots.len()];
    p1[table
        .positive_roots
        .iter()
        .position(|b| *b == vec![1, 1])
        .unwrap()] = 1;
    let want = LaurentV::from_ints(&[(1, 1), (-1, -1)]);
    if got.get(&(XKey::Roots(p1), vec![0, 0])) != Some(&want) {
        return Err("non-split coefficient of [S1]*[S2] differs from v - v^-1".into());
    }
    let tor: GenericCombination = vec![(
        LaurentV::one(),
        vec![
            GenericFactor::torus(&iq, vec![1, -1]).unwrap(),
            GenericFactor::torus(&iq, vec![2, 1]).unwrap(),
        ],
    )];
    let got =
        generic_structure_constants(&iq, &tor, &[2, 3, 5], 7, 6).map_err(|e| e.to_string())?;
    let zero_roots = XKey::Roots(vec![0; table.positive_roots.len()]);
    if got.len() != 1 || got.get(&(zero_roots, vec![3, 0])) != Some(&LaurentV::one()) {
        return Err("torus product is not E_(a+b) with constant 1".into());
    }
    Ok("-v^3+2v-v^-1, v-v^-1, 1".into())
}

fn c6_euler() -> Outcome {
    let algebras = [a2_split(), a3_split(), a3_tau(), swap_pair(), d4_split()];
    let out: Vec<Outcome> = algebras
        .par_iter()
        .map(|a| report_outcome(euler_central_suite(a, 2, 50)))
        .collect();
    for o in out {
        o?;
    }
    Ok(format!("{} algebras, 50 samples each", algebras.len()))
}

fn dim_vectors(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let used: usize = v.iter().sum();
                (0..=max_total - used).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().sum::<usize>() > 0);
    out
}

fn all_reps(alg: &Arc<BoundAlgebra>, p: u64, max_total: usize) -> Result<Vec<Rep>, String> {
    let mut out = Vec::new();
    for d in dim_vectors(alg.n(), max_total) {
        out.extend(enumerate_reps(alg, p, &d, ENUMERATION_LIMIT).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn c7_gorenstein() -> Outcome {
    let iq = a2_split();
    let alg = iquiver_algebra(&iq).map_err(|e| e.to_string())?;
    let lambda = Rep::direct_sum_all(
        &alg,
        2,
        &(0..iq.n())
            .map(|i| regular_projective(&alg, 2, i))
            .collect::<Vec<_>>(),
    );
    let reps = all_reps(&alg, 2, 4)?;
    let bad: Vec<String> = reps
        .par_iter()
        .filter_map(|m| {
            let e1 = ext1_dim(m, &lambda).ok()?;
            let e2 = ext2_dim(m, &lambda).ok()?;
            let g = m.predicates().is_gproj;
            (g != (e1 == 0) || e2 != 0)
                .then(|| format!("{:?} gproj={g} ext1={e1} ext2={e2}", m.dims))
        })
        .collect();
    if let Some(b) = bad.first() {
        return Err(format!("{} mismatches, first {b}", bad.len()));
    }
    let gproj = reps.iter().filter(|m| m.predicates().is_gproj).count();
    Ok(format!(
        "{} representations, {gproj} Gorenstein projective",
        reps.len()
    ))
}

fn c8_bases() -> Outcome {
    let mut n = 0;
    for (iq, cap) in [(a2_split(), 4), (a3_tau(), 3)] {
        let r = monomial_basis_check(&iq, 2, cap, WordChoice::First).map_err(|e| e.to_string())?;
        if !r.pass {
            return Err(format!(
                "monomial basis fails over {}",
                iq.vertices.join(",")
            ));
        }
        n += r.grades.len();
        let nr = iq.root_table().unwrap().positive_roots.len();
        let fwd: Vec<usize> = (0..nr).collect();
        let rev: Vec<usize> = (0..nr).rev().collect();
        for ord in [fwd, rev] {
            let r = pbw_basis_check(&iq, 2, &ord, cap).map_err(|e| e.to_string())?;
            if !r.pass {
                return Err(format!("PBW basis fails for ordering {ord:?}"));
            }
            n += r.grades.len();
        }
    }
    Ok(format!("{n} grades invertible"))
}

/// Hall numbers from extension counts against direct submodule counts.
fn riedtmann_peng(alg: &Arc<BoundAlgebra>, p: u64) -> Result<usize, String> {
    let reg = Registry::new(alg, p, Caps::default());
    for m in all_reps(alg, p, 3)? {
        reg.intern(&m).map_err(|e| e.to_string())?;
    }
    let classes = reg.all();
    let aut: Vec<u64> = classes.iter().map(|m| aut_count(m, 12).unwrap()).collect();
    let mut checked = 0;
    for (a, m) in classes.iter().enumerate() {
        for (b, n) in classes.iter().enumerate() {
            if m.total_dim() + n.total_dim() > 3 {
                continue;
            }
            let cl = ext1_classify(m, n, &reg).map_err(|e| e.to_string())?;
            let counts: BTreeMap<u32, u64> = cl.classes.iter().map(|(id, c)| (id.0, *c)).collect();
            let dims: Vec<usize> = m.dims.iter().zip(&n.dims).map(|(x, y)| x + y).collect();
            let hom = p.pow(hom_dim(m, n) as u32);
            for (c, l) in classes.iter().enumerate() {
                if l.dims != dims {
                    continue;
                }
                let mut g = 0u64;
                for u in submodules(l, 100_000).map_err(|e| e.to_string())? {
                    if u.dims() == n.dims
                        && iso_test(&l.sub_rep(&u), n).map_err(|e| e.to_string())?
                        && iso_test(&l.quotient(&u), m).map_err(|e| e.to_string())?
                    {
                        g += 1;
                    }
                }
                let ext_l = counts.get(&(c as u32)).copied().unwrap_or(0);
                if ext_l * aut[c] != g * aut[a] * aut[b] * hom {
                    return Err(format!(
                        "M={:?} N={:?} L={:?}: |Ext_L|={ext_l} g={g}",
                        m.dims, n.dims, l.dims
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn c9_riedtmann_peng() -> Outcome {
    let kq = path_algebra(&a2()).map_err(|e| e.to_string())?;
    let lam = iquiver_algebra(&a2_split()).map_err(|e| e.to_string())?;
    let a = riedtmann_peng(&kq, 2)?;
    let b = riedtmann_peng(&lam, 2)?;
    Ok(format!(
        "{a} triples over kQ, {b} triples over the iquiver algebra"
    ))
}

fn c10_structural() -> Outcome {
    let quivers = [
        a1(),
        a2(),
        a2_split(),
        a3_split(),
        a3_tau(),
        swap_pair(),
        d4_split(),
        diagonal_iquiver(&a2()).unwrap(),
    ];
    for iq in &quivers {
        let alg = iquiver_algebra(iq).map_err(|e| e.to_string())?;
        if alg.dim() != 2 * iq.num_paths() {
            return Err(format!(
                "dim {} vs 2*{} paths over {}",
                alg.dim(),
                iq.num_paths(),
                iq.vertices.join(",")
            ));
        }
    }
    for base in [a1(), a2(), a3_split()] {
        let diag = diagonal_iquiver(&base).map_err(|e| e.to_string())?;
        let enriched = enriched_quiver(&diag);
        let mut vmap = BTreeMap::new();
        let mut amap = BTreeMap::new();
        for (i, v) in base.vertices.iter().enumerate() {
            vmap.insert(diamond_name(v), prime_name(v));
            let d = diag.vertex(v).unwrap();
            let dd = diag.vertex(&diamond_name(v)).unwrap();
            amap.insert(eps_name(&diag, d), eps_name(&base, i));
            amap.insert(eps_name(&diag, dd), prime_name(&eps_name(&base, i)));
        }
        for a in &base.arrows {
            amap.insert(diamond_name(&a.id), prime_name(&a.id));
        }
        let renamed = enriched.renamed(&vmap, &amap);
        let df = double_framed(&base);
        if renamed.canonical_form() != df.bound.canonical_form() {
            return Err(format!(
                "diagonal and double framed quivers differ over {}",
                base.vertices.join(",")
            ));
        }
        let tau_names: BTreeSet<(String, String)> = (0..df.tau_sharp.len())
            .map(|v| {
                (
                    df.bound.vertices[v].clone(),
                    df.bound.vertices[df.tau_sharp[v]].clone(),
                )
            })
            .collect();
        let diag_tau: BTreeSet<(String, String)> = (0..diag.n())
            .map(|v| {
                (
                    renamed.vertices[v].clone(),
                    renamed.vertices[diag.tau[v]].clone(),
                )
            })
            .collect();
        if tau_names != diag_tau {
            return Err("involutions differ".into());
        }
    }
    Ok(format!("{} iquivers", quivers.len()))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("rank-2 identities", c1_rank2),
        ("Serre suites", c2_serre),
        ("Bridgeland suite", c3_bridgeland),
        ("Hall basis and normal form", c4_normal_form),
        ("generic Hall polynomials", c5_generic),
        ("Euler form and centrality", c6_euler),
        ("homological predicates", c7_gorenstein),
        ("monomial and PBW bases", c8_bases),
        ("Riedtmann-Peng cross-count", c9_riedtmann_peng),
        ("structural", c10_structural),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|a| a == &id.to_string() || name.contains(a.as_str()))
        {
            continue;
        }
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
