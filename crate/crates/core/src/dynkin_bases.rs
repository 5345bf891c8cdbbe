//! Dynkin quivers: root modules, generic extensions, distinguished words, degenerations and the
//! monomial and PBW bases of the Hall algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::boundalg::{path_algebra, BoundAlgebra};
use crate::error::{Error, Result};
use crate::hall_engine::{HallContext, HallElement, RootModules, XKey};
use crate::iquiver::IQuiver;
use crate::repmod::{
    end_dim, ext1_middle_terms, hom_dim, make_simple, submodules, Rep, DEFAULT_SUBMODULE_BUDGET,
};
use crate::scalars::QSqrt;

/// A word over the vertices; `tight` groups equal neighbours as (letter, count).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word { letters }
    }

    pub fn tight(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &l in &self.letters {
            match out.last_mut() {
                Some((j, c)) if *j == l => *c += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }

    pub fn tight_len(&self) -> usize {
        self.tight().len()
    }

    pub fn to_names(&self, iq: &IQuiver) -> Vec<String> {
        self.letters
            .iter()
            .map(|&l| iq.vertices[l].clone())
            .collect()
    }
}

/// A Kac partition: multiplicity of each positive root, in root-table order.
pub type KacPartition = Vec<u32>;

/// Representation theory of the path algebra kQ of a Dynkin quiver over F_p.
pub struct KqDynkin {
    pub iq: IQuiver,
    pub alg: Arc<BoundAlgebra>,
    pub p: u64,
    pub roots: RootModules,
    /// Submodules examined per layer when counting filtrations.
    pub submodule_budget: usize,
}

impl KqDynkin {
    pub fn new(iq: &IQuiver, p: u64) -> Result<Self> {
        let alg = path_algebra(iq)?;
        let roots = RootModules::build(iq, &alg, p)?.ok_or(Error::NotDynkin)?;
        Ok(KqDynkin {
            iq: iq.clone(),
            alg,
            p,
            roots,
            submodule_budget: DEFAULT_SUBMODULE_BUDGET,
        })
    }

    pub fn root_module(&self, beta: &[usize]) -> Result<Rep> {
        self.roots
            .index_of(beta)
            .map(|k| self.roots.modules[k].clone())
            .ok_or_else(|| Error::SearchExhausted(beta.to_vec()))
    }

    pub fn partition_of(&self, m: &Rep) -> Result<KacPartition> {
        self.roots.classify(m)
    }

    pub fn module_of(&self, lambda: &[u32]) -> Rep {
        self.roots.module_of(&self.alg, self.p, lambda)
    }

    pub fn simple(&self, i: usize) -> Rep {
        make_simple(&self.alg, self.p, i)
    }

    /// The middle term of minimal dim End among extensions 0 → N → E → M → 0.
    pub fn generic_extension(&self, m: &Rep, n: &Rep) -> Result<Rep> {
        let data = ext1_middle_terms(m, n, usize::MAX)?;
        let mut cands = Vec::with_capacity(data.terms.len());
        for (e, _) in data.terms {
            cands.push((end_dim(&e), self.partition_of(&e)?, e));
        }
        let min = cands
            .iter()
            .map(|c| c.0)
            .min()
            .expect("the split extension is always present");
        let mut best = cands.into_iter().filter(|c| c.0 == min);
        let (_, key, e) = best.next().expect("minimum attained");
        if best.any(|c| c.1 != key) {
            return Err(Error::NonUniqueMinimizer);
        }
        Ok(e)
    }

    /// ℘(w): iterated generic extension of the simples of `w`.
    pub fn word_to_partition(&self, w: &Word) -> Result<KacPartition> {
        let mut acc = Rep::zero(&self.alg, self.p);
        for &l in w.letters.iter().rev() {
            acc = self.generic_extension(&self.simple(l), &acc)?;
        }
        self.partition_of(&acc)
    }

    /// γ_w^λ: chains M(λ) = M₀ ⊃ M₁ ⊃ … ⊃ M_t = 0 with M_{r−1}/M_r of dimension c_r·e_{j_r}, top first.
    pub fn reduced_filtration_count(&self, lambda: &[u32], w: &Word) -> Result<u64> {
        let m = self.module_of(lambda);
        let tight = w.tight();
        let mut total = vec![0usize; self.iq.n()];
        for &(j, c) in &tight {
            total[j] += c;
        }
        if total != m.dims {
            return Ok(0);
        }
        self.count_chains(&m, &tight)
    }

    fn count_chains(&self, m: &Rep, tight: &[(usize, usize)]) -> Result<u64> {
        let Some(&(j, c)) = tight.first() else {
            return Ok(u64::from(m.is_zero()));
        };
        let mut want = m.dims.clone();
        if want[j] < c {
            return Ok(0);
        }
        want[j] -= c;
        let mut count = 0;
        for u in submodules(m, self.submodule_budget)? {
            if u.dims() == want {
                count += self.count_chains(&m.sub_rep(&u), &tight[1..])?;
            }
        }
        Ok(count)
    }

    pub fn is_distinguished(&self, w: &Word) -> Result<bool> {
        let lambda = self.word_to_partition(w)?;
        Ok(self.reduced_filtration_count(&lambda, w)? == 1)
    }

    /// N ≤_dg M: dim Hom(X, N) ≥ dim Hom(X, M) for every indecomposable X.
    pub fn degeneration_leq(&self, n: &Rep, m: &Rep) -> Result<bool> {
        if n.dims != m.dims {
            return Err(Error::DimVectorMismatch);
        }
        Ok(self
            .roots
            .modules
            .iter()
            .all(|x| hom_dim(x, n) >= hom_dim(x, m)))
    }

    /// All Kac partitions with total dimension between 1 and `cap`.
    pub fn partitions(&self, cap: usize) -> Vec<KacPartition> {
        let heights: Vec<usize> = self.roots.roots.iter().map(|b| b.iter().sum()).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; heights.len()];
        fn rec(
            k: usize,
            left: usize,
            h: &[usize],
            cur: &mut Vec<u32>,
            out: &mut Vec<KacPartition>,
        ) {
            if k == h.len() {
                if cur.iter().any(|&x| x > 0) {
                    out.push(cur.clone());
                }
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
        rec(0, cap, &heights, &mut cur, &mut out);
        out
    }

    /// Words whose letters add up to `dims`, by tight length and then lexicographically.
    pub fn words_for(&self, dims: &[usize]) -> Vec<Word> {
        let mut letters = Vec::new();
        for (i, &d) in dims.iter().enumerate() {
            letters.extend(std::iter::repeat_n(i, d));
        }
        let mut words: BTreeSet<Vec<usize>> = BTreeSet::new();
        permutations(&mut letters.clone(), 0, &mut words);
        let mut ws: Vec<Word> = words.into_iter().map(Word::new).collect();
        ws.sort_by(|a, b| {
            a.tight_len()
                .cmp(&b.tight_len())
                .then_with(|| a.letters.cmp(&b.letters))
        });
        ws
    }

    /// Distinguished words w with ℘(w) = λ of the minimal tight length, in lexicographic order.
    pub fn distinguished_words(&self, lambda: &[u32]) -> Result<Vec<Word>> {
        let dims = self.roots.dims_of(lambda);
        let mut found: Vec<Word> = Vec::new();
        let mut best_len = usize::MAX;
        for w in self.words_for(&dims) {
            if w.tight_len() > best_len {
                break;
            }
            if self.word_to_partition(&w)? == lambda
                && self.reduced_filtration_count(lambda, &w)? == 1
            {
                best_len = w.tight_len();
                found.push(w);
            }
        }
        if found.is_empty() {
            return Err(Error::NoDistinguishedWordFound(format!("{lambda:?}")));
        }
        Ok(found)
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut BTreeSet<Vec<usize>>) {
    if k == v.len() {
        out.insert(v.clone());
        return;
    }
    let mut used = BTreeSet::new();
    for i in k..v.len() {
        if used.insert(v[i]) {
            v.swap(k, i);
            permutations(v, k + 1, out);
            v.swap(k, i);
        }
    }
}

/// Rank of a matrix over ℚ(√q).
pub fn qsqrt_rank(mut rows: Vec<Vec<QSqrt>>) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = rows[rank][col].inv().expect("pivot is nonzero");
        let pivot_row: Vec<QSqrt> = rows[rank].iter().map(|x| x * &inv).collect();
        for r in 0..nrows {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..ncols {
                    let t = &f * &pivot_row[c];
                    rows[r][c] = &rows[r][c] - &t;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradeReport {
    pub grade: Vec<usize>,
    pub partitions: Vec<KacPartition>,
    pub words: Vec<Vec<String>>,
    pub size: usize,
    pub rank: usize,
    pub invertible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisReport {
    pub kind: String,
    pub q: u64,
    pub cap: usize,
    pub grades: Vec<GradeReport>,
    pub pass: bool,
}

impl BasisReport {
    pub fn to_json(&self) -> Value {
        let grades: Vec<Value> = self
            .grades
            .iter()
            .map(|g| {
                json!({"grade": g.grade, "partitions": g.partitions, "words": g.words,
                       "size": g.size, "rank": g.rank, "invertible": g.invertible})
            })
            .collect();
        json!({"kind": self.kind, "q": self.q, "cap": self.cap, "grades": grades, "pass": self.pass})
    }
}

/// Checks that the given elements, one per partition, have an invertible α = 0 coefficient matrix
/// in every grade.
fn assemble(
    kind: &str,
    ctx: &HallContext,
    kq: &KqDynkin,
    cap: usize,
    elements: Vec<(KacPartition, Vec<String>, HallElement)>,
) -> BasisReport {
    let mut by_grade: BTreeMap<Vec<usize>, Vec<(KacPartition, Vec<String>, HallElement)>> =
        BTreeMap::new();
    for (lambda, word, e) in elements {
        by_grade
            .entry(kq.roots.dims_of(&lambda))
            .or_default()
            .push((lambda, word, e));
    }
    let zero = vec![0i64; ctx.iq.n()];
    let grades: Vec<GradeReport> = by_grade
        .into_iter()
        .map(|(grade, items)| {
            let cols: Vec<KacPartition> = items.iter().map(|(l, _, _)| l.clone()).collect();
            let rows: Vec<Vec<QSqrt>> = items
                .iter()
                .map(|(_, _, e)| {
                    cols.iter()
                        .map(|c| e.coeff(&XKey::Roots(c.clone()), &zero))
                        .collect()
                })
                .collect();
            let rank = qsqrt_rank(rows);
            GradeReport {
                grade,
                size: items.len(),
                rank,
                invertible: rank == items.len(),
                words: items.iter().map(|(_, w, _)| w.clone()).collect(),
                partitions: cols,
            }
        })
        .collect();
    let pass = grades.iter().all(|g| g.invertible);
    BasisReport {
        kind: kind.into(),
        q: ctx.p,
        cap,
        grades,
        pass,
    }
}

/// Every coefficient of an α = 0 term lives in a grade; also used to check square matrices.
fn ensure_square(kq: &KqDynkin, ctx: &HallContext, e: &HallElement, grade: &[usize]) -> Result<()> {
    for (x, a) in e.terms.keys() {
        if a.iter().all(|&t| t == 0)
            && ctx
                .grade(x, a)
                .iter()
                .map(|&t| t as usize)
                .collect::<Vec<_>>()
                != grade
        {
            return Err(Error::Input(format!(
                "term of grade other than {grade:?} in a product over {}",
                kq.iq.vertices.join(",")
            )));
        }
    }
    Ok(())
}

/// Which distinguished word to use for each partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordChoice {
    First,
    Random(u64),
}

fn same_setting<'a>(ctx: &HallContext, kq: &'a KqDynkin) -> Result<&'a IQuiver> {
    if ctx.p != kq.p || ctx.iq != kq.iq {
        return Err(Error::Input(
            "Hall context and kQ data differ in quiver or prime".into(),
        ));
    }
    Ok(&kq.iq)
}

/// Monomials in the simples along distinguished words, one per Kac partition.
pub fn monomial_basis_check(
    iq: &IQuiver,
    q: u64,
    cap: usize,
    choice: WordChoice,
) -> Result<BasisReport> {
    monomial_basis_check_in(
        &HallContext::new(iq, q)?,
        &KqDynkin::new(iq, q)?,
        cap,
        choice,
    )
}

/// [`monomial_basis_check`] on an existing context; `kq` must be built for the same quiver and prime.
pub fn monomial_basis_check_in(
    ctx: &HallContext,
    kq: &KqDynkin,
    cap: usize,
    choice: WordChoice,
) -> Result<BasisReport> {
    let iq = same_setting(ctx, kq)?;
    let parts = kq.partitions(cap);
    let simples: Vec<HallElement> = (0..iq.n()).map(|i| ctx.simple(i)).collect::<Result<_>>()?;
    let elements: Vec<(KacPartition, Vec<String>, HallElement)> = parts
        .par_iter()
        .map(|lambda| {
            let words = kq.distinguished_words(lambda)?;
            let w = match choice {
                WordChoice::First => words[0].clone(),
                WordChoice::Random(seed) => {
                    let mut rng = crate::seeded_rng(seed);
                    words.choose(&mut rng).expect("nonempty").clone()
                }
            };
            let factors: Vec<HallElement> = w.letters.iter().map(|&l| simples[l].clone()).collect();
            let e = ctx.mul_all(&factors)?;
            ensure_square(kq, ctx, &e, &kq.roots.dims_of(lambda))?;
            Ok((lambda.clone(), w.to_names(iq), e))
        })
        .collect::<Result<_>>()?;
    Ok(assemble("monomial", ctx, kq, cap, elements))
}

/// PBW monomials [M(β₁)]^{λ₁} ∗ ⋯ ∗ [M(β_N)]^{λ_N} with the roots taken in `ordering`.
pub fn pbw_basis_check(
    iq: &IQuiver,
    q: u64,
    ordering: &[usize],
    cap: usize,
) -> Result<BasisReport> {
    pbw_basis_check_in(
        &HallContext::new(iq, q)?,
        &KqDynkin::new(iq, q)?,
        ordering,
        cap,
    )
}

/// [`pbw_basis_check`] on an existing context.
pub fn pbw_basis_check_in(
    ctx: &HallContext,
    kq: &KqDynkin,
    ordering: &[usize],
    cap: usize,
) -> Result<BasisReport> {
    let iq = same_setting(ctx, kq)?;
    let nr = kq.roots.roots.len();
    let mut sorted = ordering.to_vec();
    sorted.sort_unstable();
    if sorted != (0..nr).collect::<Vec<_>>() {
        return Err(Error::Input(format!(
            "ordering must be a permutation of 0..{nr}"
        )));
    }
    let root_elems: Vec<HallElement> = (0..nr)
        .map(|k| {
            let mut m = vec![0u32; nr];
            m[k] = 1;
            ctx.basis_symbol(XKey::Roots(m), vec![0; iq.n()])
        })
        .collect();
    let elements: Vec<(KacPartition, Vec<String>, HallElement)> = kq
        .partitions(cap)
        .par_iter()
        .map(|lambda| {
            let mut factors = Vec::new();
            for &k in ordering {
                factors.extend(std::iter::repeat_n(
                    root_elems[k].clone(),
                    lambda[k] as usize,
                ));
            }
            Ok((lambda.clone(), vec![], ctx.mul_all(&factors)?))
        })
        .collect::<Result<_>>()?;
    Ok(assemble("pbw", ctx, kq, cap, elements))
}
