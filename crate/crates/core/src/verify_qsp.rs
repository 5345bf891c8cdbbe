//! Relation suites for the Hall realization of ıquantum groups and of Drinfeld–Jimbo quantum groups.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::boundalg::regular_projective;
use crate::error::{Error, Result};
use crate::hall_engine::{reduce_params, HallContext, HallElement, ReducedParams};
use crate::iquiver::{diagonal_iquiver, diamond_name, examples, IQuiver};
use crate::repmod::{euler_lambda, ext1_middle_terms, make_generalized_simple, random_module, Rep};
use crate::scalars::{int, rat, LaurentV, QSqrt};

#[derive(Clone, Debug, PartialEq)]
pub struct RelationResult {
    pub id: String,
    pub pass: bool,
    pub residual: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub algebra: String,
    pub primes: Vec<u64>,
    pub relations: Vec<RelationResult>,
    pub pass: bool,
}

impl VerificationReport {
    fn new(
        suite: &str,
        algebra: &str,
        primes: Vec<u64>,
        mut relations: Vec<RelationResult>,
    ) -> Self {
        relations.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = relations.iter().all(|r| r.pass);
        VerificationReport {
            suite: suite.into(),
            algebra: algebra.into(),
            primes,
            relations,
            pass,
        }
    }

    pub fn to_json(&self) -> Value {
        let rels: Vec<Value> = self
            .relations
            .iter()
            .map(|r| json!({"id": r.id, "pass": r.pass, "residual": r.residual}))
            .collect();
        json!({"suite": self.suite, "algebra": self.algebra, "primes": self.primes, "relations": rels, "pass": self.pass})
    }

    pub fn failures(&self) -> Vec<&str> {
        self.relations
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.id.as_str())
            .collect()
    }
}

fn hall_result(id: String, residual: &HallElement) -> RelationResult {
    RelationResult {
        id,
        pass: residual.is_zero(),
        residual: residual.to_json(),
    }
}

/// Quantum binomial [n choose s] evaluated at v = √q.
pub fn qbinom(q: u64, n: i64, s: i64) -> QSqrt {
    let fact = |m: i64| -> QSqrt {
        (1..=m).fold(QSqrt::one(q), |acc, k| &acc * &LaurentV::qint(k).eval(q))
    };
    fact(n)
        .try_div(&(&fact(s) * &fact(n - s)))
        .expect("quantum factorials are nonzero")
}

/// Images of the generators B_j and k̃_i of Ũı in the Hall algebra.
pub struct GeneratorImages {
    pub b: Vec<HallElement>,
    pub ktilde: Vec<HallElement>,
    pub q: u64,
}

impl GeneratorImages {
    pub fn new(ctx: &HallContext) -> Result<Self> {
        let q = ctx.p;
        let inv_qm1 = QSqrt::from_int(q as i64 - 1, q).inv()?;
        let mut b = Vec::new();
        let mut ktilde = Vec::new();
        for j in 0..ctx.iq.n() {
            let c = if ctx.iq.in_itau(j) {
                -&inv_qm1
            } else {
                &QSqrt::v(q) * &inv_qm1
            };
            b.push(ctx.simple(j)?.scale(&c));
            let k = ctx.torus_unit(j);
            ktilde.push(if ctx.iq.tau[j] == j {
                k.scale(&QSqrt::from_rational(rat(-1, q as i64), q))
            } else {
                k
            });
        }
        Ok(GeneratorImages { b, ktilde, q })
    }
}

fn v_minus_vinv_inv(q: u64) -> QSqrt {
    (&QSqrt::v(q) - &QSqrt::v_pow(q, -1))
        .inv()
        .expect("v − v⁻¹ ≠ 0")
}

/// Σ_s (−1)^s [n choose s] x^s y x^{n−s} with n = 1 − c.
fn serre_sum(ctx: &HallContext, x: &HallElement, y: &HallElement, c: i64) -> Result<HallElement> {
    let n = 1 - c;
    let mut total = HallElement::zero(ctx.p);
    for s in 0..=n {
        let mut factors = vec![x.clone(); s as usize];
        factors.push(y.clone());
        factors.extend(std::iter::repeat_n(x.clone(), (n - s) as usize));
        let sign = if s % 2 == 0 { 1 } else { -1 };
        let coeff = qbinom(ctx.p, n, s).scale(&int(sign));
        total = total.add(&ctx.mul_all(&factors)?.scale(&coeff));
    }
    Ok(total)
}

fn commutator(ctx: &HallContext, a: &HallElement, b: &HallElement) -> Result<HallElement> {
    Ok(ctx.mul(a, b)?.sub(&ctx.mul(b, a)?))
}

/// B_i²B_j − [2]B_iB_jB_i + B_jB_i².
fn iserre_lhs(ctx: &HallContext, bi: &HallElement, bj: &HallElement) -> Result<HallElement> {
    serre_sum(ctx, bi, bj, -1)
}

fn check_supported(iq: &IQuiver) -> Result<()> {
    if iq.dynkin_type().is_none() {
        return Err(Error::UnsupportedType(
            "quiver is not of Dynkin type".into(),
        ));
    }
    for i in 0..iq.n() {
        let t = iq.tau[i];
        if t != i && iq.cartan_entry(i, t) != 0 {
            return Err(Error::UnsupportedType(format!(
                "vertices {} and {} are swapped by τ and adjacent",
                iq.vertices[i], iq.vertices[t]
            )));
        }
    }
    Ok(())
}

type Job<'a> = Box<dyn Fn() -> Result<RelationResult> + Send + Sync + 'a>;

fn run_jobs(jobs: Vec<Job<'_>>) -> Result<Vec<RelationResult>> {
    jobs.par_iter().map(|j| j()).collect()
}

/// Defining relations of Ũı evaluated on the Hall images.
pub fn serre_suite(iq: &IQuiver, q: u64) -> Result<VerificationReport> {
    check_supported(iq)?;
    serre_suite_in(&HallContext::new(iq, q)?)
}

pub fn serre_suite_in(ctx: &HallContext) -> Result<VerificationReport> {
    let (iq, q) = (&ctx.iq, ctx.p);
    check_supported(iq)?;
    let g = GeneratorImages::new(ctx)?;
    let n = iq.n();
    let name = |i: usize| iq.vertices[i].clone();
    let c = |i: usize, j: usize| iq.cartan_entry(i, j);
    let g = &g;
    let mut jobs: Vec<Job> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            jobs.push(Box::new(move || {
                Ok(hall_result(
                    format!("kk:i={},j={}", name(i), name(j)),
                    &commutator(ctx, &g.ktilde[i], &g.ktilde[j])?,
                ))
            }));
        }
    }
    for l in 0..n {
        for i in 0..n {
            jobs.push(Box::new(move || {
                let e = c(iq.tau[l], i) - c(l, i);
                let lhs = ctx.mul(&g.ktilde[l], &g.b[i])?;
                let rhs = ctx.mul(&g.b[i], &g.ktilde[l])?.scale(&QSqrt::v_pow(q, e));
                Ok(hall_result(
                    format!("kb:l={},i={}", name(l), name(i)),
                    &lhs.sub(&rhs),
                ))
            }));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j && c(i, j) == 0 && iq.tau[i] != j {
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("comm:i={},j={}", name(i), name(j)),
                        &commutator(ctx, &g.b[i], &g.b[j])?,
                    ))
                }));
            }
            if c(i, j) < 0 && iq.tau[i] != i && iq.tau[i] != j {
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("serre:i={},j={}", name(i), name(j)),
                        &serre_sum(ctx, &g.b[i], &g.b[j], c(i, j))?,
                    ))
                }));
            }
            if c(i, j) == -1 && iq.tau[i] == i {
                jobs.push(Box::new(move || {
                    let lhs = iserre_lhs(ctx, &g.b[i], &g.b[j])?;
                    let rhs = ctx.mul(&g.ktilde[i], &g.b[j])?.scale(&QSqrt::v(q));
                    Ok(hall_result(
                        format!("iserre:i={},j={}", name(i), name(j)),
                        &lhs.sub(&rhs),
                    ))
                }));
            }
        }
        if iq.tau[i] != i {
            jobs.push(Box::new(move || {
                let t = iq.tau[i];
                let lhs = commutator(ctx, &g.b[t], &g.b[i])?;
                let rhs = g.ktilde[i].sub(&g.ktilde[t]).scale(&v_minus_vinv_inv(q));
                Ok(hall_result(format!("tau:i={}", name(i)), &lhs.sub(&rhs)))
            }));
        }
    }
    let rels = run_jobs(jobs)?;
    Ok(VerificationReport::new(
        "serre",
        &ctx.alg.hash,
        vec![q],
        rels,
    ))
}

/// Relations of the central reduction Uı, after the substitution of reduce_params.
pub fn reduced_suite(iq: &IQuiver, q: u64, sigma: &ReducedParams) -> Result<VerificationReport> {
    check_supported(iq)?;
    reduced_suite_in(&HallContext::new(iq, q)?, sigma)
}

pub fn reduced_suite_in(ctx: &HallContext, sigma: &ReducedParams) -> Result<VerificationReport> {
    let (iq, q) = (&ctx.iq, ctx.p);
    check_supported(iq)?;
    let g = GeneratorImages::new(ctx)?;
    let n = iq.n();
    let name = |i: usize| iq.vertices[i].clone();
    let c = |i: usize, j: usize| iq.cartan_entry(i, j);
    let red = |e: &HallElement| reduce_params(iq, e, sigma);
    // k_i ↦ ς_i⁻¹ E_{Ŝi}, k_{τi} ↦ ς_i E_{−Ŝi}
    let k: Vec<HallElement> = (0..n)
        .map(|i| {
            let s = &sigma.sigma[i];
            if iq.in_itau(i) {
                Ok(ctx.torus_unit(i).scale(&s.inv()?))
            } else {
                let r = iq.tau[i];
                let mut a = vec![0; n];
                a[r] = -1;
                Ok(ctx.torus(a).scale(s))
            }
        })
        .collect::<Result<_>>()?;
    let (g, k, red) = (&g, &k, &red);
    let mut jobs: Vec<Job> = Vec::new();
    for l in 0..n {
        if !iq.in_itau(l) || iq.tau[l] == l {
            continue;
        }
        for i in 0..n {
            jobs.push(Box::new(move || {
                let e = c(iq.tau[l], i) - c(l, i);
                let lhs = red(&ctx.mul(&k[l], &g.b[i])?)?;
                let rhs = red(&ctx.mul(&g.b[i], &k[l])?.scale(&QSqrt::v_pow(q, e)))?;
                Ok(hall_result(
                    format!("kb:l={},i={}", name(l), name(i)),
                    &lhs.sub(&rhs),
                ))
            }));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j && c(i, j) == 0 && iq.tau[i] != j {
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("comm:i={},j={}", name(i), name(j)),
                        &red(&commutator(ctx, &g.b[i], &g.b[j])?)?,
                    ))
                }));
            }
            if c(i, j) < 0 && iq.tau[i] != i && iq.tau[i] != j {
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("serre:i={},j={}", name(i), name(j)),
                        &red(&serre_sum(ctx, &g.b[i], &g.b[j], c(i, j))?)?,
                    ))
                }));
            }
            if c(i, j) == -1 && iq.tau[i] == i {
                jobs.push(Box::new(move || {
                    let lhs = red(&iserre_lhs(ctx, &g.b[i], &g.b[j])?)?;
                    let rhs = g.b[j].scale(&(&QSqrt::v(q) * &sigma.sigma[i]));
                    Ok(hall_result(
                        format!("iserre:i={},j={}", name(i), name(j)),
                        &lhs.sub(&rhs),
                    ))
                }));
            }
        }
        if iq.tau[i] != i && iq.in_itau(i) {
            jobs.push(Box::new(move || {
                let t = iq.tau[i];
                let lhs = red(&commutator(ctx, &g.b[t], &g.b[i])?)?;
                let rhs = k[i]
                    .sub(&k[t])
                    .scale(&(&sigma.sigma[i] * &v_minus_vinv_inv(q)));
                Ok(hall_result(
                    format!("tau:i={}", name(i)),
                    &lhs.sub(&red(&rhs)?),
                ))
            }));
        }
    }
    let rels = run_jobs(jobs)?;
    Ok(VerificationReport::new(
        "reduced",
        &ctx.alg.hash,
        vec![q],
        rels,
    ))
}

/// x₁x₁y − (v+v⁻¹)x₁yx₁ + yx₁x₁ in the displayed order of the rank-2 identities.
fn rank2_combination(ctx: &HallContext, a: &HallElement, b: &HallElement) -> Result<HallElement> {
    let q = ctx.p;
    let qi2 = LaurentV::qint(2).eval(q);
    Ok(ctx
        .mul_all(&[b.clone(), a.clone(), a.clone()])?
        .sub(&ctx.mul_all(&[a.clone(), b.clone(), a.clone()])?.scale(&qi2))
        .add(&ctx.mul_all(&[a.clone(), a.clone(), b.clone()])?))
}

/// The five identities among simples of the three rank-two ıquivers.
pub fn rank2_identities(q: u64) -> Result<VerificationReport> {
    let coeff = QSqrt::from_int(-((q as i64 - 1) * (q as i64 - 1)), q).try_div(&QSqrt::v(q))?;
    let mut rels = Vec::new();

    let a2 = examples::a2_split();
    let ctx = HallContext::new(&a2, q)?;
    let e = |c: &HallContext, i: usize| c.element_of(&make_generalized_simple(&c.alg, q, i));
    let (s1, s2) = (ctx.simple(0)?, ctx.simple(1)?);
    let lhs = rank2_combination(&ctx, &s1, &s2)?;
    let rhs = ctx.mul(&s2, &e(&ctx, 0)?)?.scale(&coeff);
    rels.push(hall_result("a2split:S211".into(), &lhs.sub(&rhs)));
    let lhs = rank2_combination(&ctx, &s2, &s1)?;
    let rhs = ctx.mul(&s1, &e(&ctx, 1)?)?.scale(&coeff);
    rels.push(hall_result("a2split:S122".into(), &lhs.sub(&rhs)));

    let a3 = examples::a3_tau();
    let ctx = HallContext::new(&a3, q)?;
    let s2 = ctx.simple(1)?;
    let mut homog = Vec::new();
    let mut inhom = Vec::new();
    for i in [0usize, 2] {
        let si = ctx.simple(i)?;
        let r = rank2_combination(&ctx, &si, &s2)?;
        homog.push(r);
        let lhs = rank2_combination(&ctx, &s2, &si)?;
        let rhs = ctx.mul(&si, &e(&ctx, 1)?)?.scale(&coeff);
        inhom.push(lhs.sub(&rhs));
    }
    let first_nonzero = |v: &[HallElement]| {
        v.iter()
            .find(|r| !r.is_zero())
            .cloned()
            .unwrap_or_else(|| v[0].clone())
    };
    rels.push(hall_result("a3tau:Serre112".into(), &first_nonzero(&homog)));
    rels.push(hall_result("a3tau:Serre221".into(), &first_nonzero(&inhom)));

    let sw = examples::swap_pair();
    let ctx = HallContext::new(&sw, q)?;
    let (s1, s2) = (ctx.simple(0)?, ctx.simple(1)?);
    let lhs = commutator(&ctx, &s1, &s2)?;
    let rhs = e(&ctx, 0)?
        .sub(&e(&ctx, 1)?)
        .scale(&QSqrt::from_int(q as i64 - 1, q));
    rels.push(hall_result("swap:commutator".into(), &lhs.sub(&rhs)));

    Ok(VerificationReport::new("rank2", "rank2", vec![q], rels))
}

/// Quantum group relations through the diagonal ıquiver of `base`.
pub fn bridgeland_suite(base: &IQuiver, q: u64) -> Result<VerificationReport> {
    if base.dynkin_type().is_none() {
        return Err(Error::UnsupportedType(
            "quiver is not of Dynkin type".into(),
        ));
    }
    bridgeland_suite_in(base, &HallContext::new(&diagonal_iquiver(base)?, q)?)
}

/// As [`bridgeland_suite`], with `ctx` the Hall algebra of the diagonal ıquiver of `base`.
pub fn bridgeland_suite_in(base: &IQuiver, ctx: &HallContext) -> Result<VerificationReport> {
    let (diag, q) = (&ctx.iq, ctx.p);
    if *diag != diagonal_iquiver(base)? {
        return Err(Error::Input(
            "context is not over the diagonal iquiver of the base".into(),
        ));
    }
    let n = base.n();
    let idx: Vec<usize> = (0..n)
        .map(|i| diag.vertex(&base.vertices[i]))
        .collect::<Result<_>>()?;
    let idx_d: Vec<usize> = (0..n)
        .map(|i| diag.vertex(&diamond_name(&base.vertices[i])))
        .collect::<Result<_>>()?;
    let inv_qm1 = QSqrt::from_int(q as i64 - 1, q).inv()?;
    let k: Vec<HallElement> = idx.iter().map(|&i| ctx.torus_unit(i)).collect();
    let kp: Vec<HallElement> = idx_d.iter().map(|&i| ctx.torus_unit(i)).collect();
    let f: Vec<HallElement> = idx
        .iter()
        .map(|&i| Ok(ctx.simple(i)?.scale(&-&inv_qm1)))
        .collect::<Result<_>>()?;
    let e: Vec<HallElement> = idx_d
        .iter()
        .map(|&i| Ok(ctx.simple(i)?.scale(&(&QSqrt::v(q) * &inv_qm1))))
        .collect::<Result<_>>()?;
    let name = |i: usize| base.vertices[i].clone();
    let c = |i: usize, j: usize| base.cartan_entry(i, j);
    let (k, kp, e, f) = (&k, &kp, &e, &f);
    let mut jobs: Vec<Job> = Vec::new();
    let tori: Vec<(String, &HallElement)> = (0..n)
        .flat_map(|i| {
            [
                (format!("K{}", name(i)), &k[i]),
                (format!("K'{}", name(i)), &kp[i]),
            ]
        })
        .collect();
    for a in 0..tori.len() {
        for b in (a + 1)..tori.len() {
            let (ta, tb) = (tori[a].clone(), tori[b].clone());
            jobs.push(Box::new(move || {
                Ok(hall_result(
                    format!("KK:{},{}", ta.0, tb.0),
                    &commutator(ctx, ta.1, tb.1)?,
                ))
            }));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let twisted = move |id: String,
                                x: &'static str,
                                t: &HallElement,
                                y: &HallElement,
                                ex: i64|
                  -> Result<RelationResult> {
                let lhs = ctx.mul(t, y)?;
                let rhs = ctx.mul(y, t)?.scale(&QSqrt::v_pow(q, ex));
                Ok(hall_result(format!("{x}:{id}"), &lhs.sub(&rhs)))
            };
            let id = format!("i={},j={}", name(i), name(j));
            let id2 = id.clone();
            let id3 = id.clone();
            let id4 = id.clone();
            jobs.push(Box::new(move || {
                twisted(id.clone(), "KE", &k[i], &e[j], c(i, j))
            }));
            jobs.push(Box::new(move || {
                twisted(id2.clone(), "KF", &k[i], &f[j], -c(i, j))
            }));
            jobs.push(Box::new(move || {
                twisted(id3.clone(), "K'E", &kp[i], &e[j], -c(i, j))
            }));
            jobs.push(Box::new(move || {
                twisted(id4.clone(), "K'F", &kp[i], &f[j], c(i, j))
            }));
            jobs.push(Box::new(move || {
                let mut r = commutator(ctx, &e[i], &f[j])?;
                if i == j {
                    r = r.sub(&k[i].sub(&kp[i]).scale(&v_minus_vinv_inv(q)));
                }
                Ok(hall_result(format!("EF:i={},j={}", name(i), name(j)), &r))
            }));
            jobs.push(Box::new(move || {
                let kk = ctx.mul(&k[i], &kp[i])?;
                let r = commutator(ctx, &kk, &e[j])?.add(&commutator(ctx, &kk, &f[j])?);
                Ok(hall_result(
                    format!("central:i={},j={}", name(i), name(j)),
                    &r,
                ))
            }));
            if i != j && c(i, j) < 0 {
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("serreE:i={},j={}", name(i), name(j)),
                        &serre_sum(ctx, &e[i], &e[j], c(i, j))?,
                    ))
                }));
                jobs.push(Box::new(move || {
                    Ok(hall_result(
                        format!("serreF:i={},j={}", name(i), name(j)),
                        &serre_sum(ctx, &f[i], &f[j], c(i, j))?,
                    ))
                }));
            }
        }
    }
    let rels = run_jobs(jobs)?;
    Ok(VerificationReport::new(
        "bridgeland",
        &ctx.alg.hash,
        vec![q],
        rels,
    ))
}

/// Random modules of total dimension at most `max_dim`, starting with the zero module.
pub fn sample_modules(ctx: &HallContext, count: usize, max_dim: usize, seed: u64) -> Vec<Rep> {
    let mut rng = crate::seeded_rng(seed);
    let mut out = vec![Rep::zero(&ctx.alg, ctx.p)];
    while out.len() < count {
        out.push(random_module(&ctx.alg, ctx.p, &mut rng, max_dim));
    }
    out
}

/// Modules of projective dimension ≤ 1, grown from the E_i and projectives by random extensions.
pub fn sample_p_leq1(
    ctx: &HallContext,
    count: usize,
    max_dim: usize,
    seed: u64,
) -> Result<Vec<Rep>> {
    let mut rng = crate::seeded_rng(seed);
    let (alg, p) = (&ctx.alg, ctx.p);
    let mut pool: Vec<Rep> = vec![Rep::zero(alg, p)];
    for i in 0..ctx.iq.n() {
        pool.push(make_generalized_simple(alg, p, i));
        pool.push(regular_projective(alg, p, i));
    }
    let mut tries = 0;
    while pool.len() < count && tries < 50 * count {
        tries += 1;
        let a = &pool[rng.gen_range(0..pool.len())];
        let b = &pool[rng.gen_range(0..pool.len())];
        if a.total_dim() + b.total_dim() > max_dim {
            continue;
        }
        let terms = ext1_middle_terms(a, b, ctx.caps.ext_dim)?.terms;
        let (l, _) = &terms[rng.gen_range(0..terms.len())];
        pool.push(l.clone());
    }
    Ok(pool)
}

/// Euler-form identities for generalized simples and centrality of the [E_i], on sampled modules.
pub fn euler_central_suite(iq: &IQuiver, q: u64, sample_size: usize) -> Result<VerificationReport> {
    euler_central_suite_in(&HallContext::new(iq, q)?, sample_size)
}

pub fn euler_central_suite_in(ctx: &HallContext, sample_size: usize) -> Result<VerificationReport> {
    let (iq, q) = (&ctx.iq, ctx.p);
    let samples = sample_modules(ctx, sample_size, 4, 0xe1e7);
    let pl1 = sample_p_leq1(ctx, sample_size, 6, 0xe1e8)?;
    let n = iq.n();
    let (samples, pl1) = (&samples, &pl1);
    let first_bad = |bad: Option<Value>| match bad {
        Some(v) => (false, v),
        None => (true, Value::Null),
    };
    let mut jobs: Vec<Job> = Vec::new();
    for i in 0..n {
        jobs.push(Box::new(move || {
            let e = make_generalized_simple(&ctx.alg, q, i);
            let unit = iq.unit(i);
            let mut bad = None;
            for m in samples {
                let got = euler_lambda(&e, m)?;
                let want = iq.euler(&unit, &m.dims_i64());
                if got != want {
                    bad = Some(json!({"module": m.to_json(), "got": got, "want": want}));
                    break;
                }
            }
            let (pass, residual) = first_bad(bad);
            Ok(RelationResult {
                id: format!("euler_left:i={}", iq.vertices[i]),
                pass,
                residual,
            })
        }));
        jobs.push(Box::new(move || {
            let e = make_generalized_simple(&ctx.alg, q, i);
            let unit = iq.unit(iq.tau[i]);
            let mut bad = None;
            for m in samples {
                let got = euler_lambda(m, &e)?;
                let want = iq.euler(&m.dims_i64(), &unit);
                if got != want {
                    bad = Some(json!({"module": m.to_json(), "got": got, "want": want}));
                    break;
                }
            }
            let (pass, residual) = first_bad(bad);
            Ok(RelationResult {
                id: format!("euler_right:i={}", iq.vertices[i]),
                pass,
                residual,
            })
        }));
        if iq.in_itau(i) {
            jobs.push(Box::new(move || {
                let r = ctx.centrality_check(i, samples)?;
                let residual = r
                    .counterexample
                    .map(|(m, l, rr)| json!({"module": m.to_json(), "left": l.to_json(), "right": rr.to_json()}))
                    .unwrap_or(Value::Null);
                Ok(RelationResult { id: format!("central:i={}", iq.vertices[i]), pass: r.central, residual })
            }));
        }
    }
    jobs.push(Box::new(move || {
        let mut bad = None;
        'outer: for m in pl1 {
            for nn in pl1 {
                let got = 2 * euler_lambda(m, nn)?;
                let want = iq.euler(&m.dims_i64(), &nn.dims_i64());
                if got != want {
                    bad = Some(json!({"left": m.to_json(), "right": nn.to_json(), "got": got, "want": want}));
                    break 'outer;
                }
            }
        }
        let (pass, residual) = first_bad(bad);
        Ok(RelationResult { id: "euler_half:P<=1".into(), pass, residual })
    }));
    let rels = run_jobs(jobs)?;
    Ok(VerificationReport::new(
        "euler",
        &ctx.alg.hash,
        vec![q],
        rels,
    ))
}
