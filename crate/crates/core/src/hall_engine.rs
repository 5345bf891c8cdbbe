//! The ıHall algebra in its Hall basis [X]∗E_α: normal forms, products, reduction and generic
//! structure constants.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::boundalg::{iquiver_algebra, BoundAlgebra};
use crate::error::{Error, Result};
use crate::iquiver::IQuiver;
use crate::linalg_ff::FpMatrix;
use crate::repmod::{
    decompose, end_dim, euler_lambda, ext1_middle_terms, find_e_quotient, find_e_submodule,
    hom_dim, kq_module, make_generalized_simple, make_simple, torus_class, Caps, Registry, Rep,
    SubRep,
};
use crate::scalars::{laurent_fit_capped, rat, LaurentV, QSqrt, DEFAULT_LAURENT_CAP};

/// Identifies the iso-class of a kQ-module: root multiplicities for Dynkin quivers, a registry
/// class otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XKey {
    Roots(Vec<u32>),
    Class(u32),
}

pub type TermKey = (XKey, Vec<i64>);

/// Finite linear combination of basis symbols [X]∗E_α with coefficients in ℚ[√q].
#[derive(Clone, Debug, PartialEq)]
pub struct HallElement {
    pub q: u64,
    pub terms: BTreeMap<TermKey, QSqrt>,
}

impl HallElement {
    pub fn zero(q: u64) -> Self {
        HallElement {
            q,
            terms: BTreeMap::new(),
        }
    }

    pub fn symbol(q: u64, x: XKey, alpha: Vec<i64>, c: QSqrt) -> Self {
        let mut e = HallElement::zero(q);
        e.add_term(x, alpha, c);
        e
    }

    pub fn add_term(&mut self, x: XKey, alpha: Vec<i64>, c: QSqrt) {
        if c.is_zero() {
            return;
        }
        let key = (x, alpha);
        let sum = match self.terms.get(&key) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &QSqrt) -> Self {
        let mut out = HallElement::zero(self.q);
        for ((x, a), v) in &self.terms {
            out.add_term(x.clone(), a.clone(), v * c);
        }
        out
    }

    pub fn add(&self, o: &HallElement) -> Self {
        let mut out = self.clone();
        for ((x, a), v) in &o.terms {
            out.add_term(x.clone(), a.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, o: &HallElement) -> Self {
        self.add(&o.scale(&QSqrt::from_int(-1, self.q)))
    }

    pub fn coeff(&self, x: &XKey, alpha: &[i64]) -> QSqrt {
        self.terms
            .get(&(x.clone(), alpha.to_vec()))
            .cloned()
            .unwrap_or_else(|| QSqrt::zero(self.q))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((x, a), c)| json!({"X": xkey_json(x), "alpha": a, "coeff": c.to_json()}))
            .collect();
        json!({"mode": "numeric", "q": self.q, "terms": terms})
    }
}

pub fn xkey_json(x: &XKey) -> Value {
    match x {
        XKey::Roots(m) => json!(m),
        XKey::Class(id) => json!({"class": id}),
    }
}

pub fn xkey_from_json(v: &Value) -> Result<XKey> {
    let bad = || Error::Input(format!("not a module key: {v}"));
    match v {
        Value::Array(a) => Ok(XKey::Roots(
            a.iter()
                .map(|x| {
                    x.as_u64()
                        .and_then(|n| u32::try_from(n).ok())
                        .ok_or_else(bad)
                })
                .collect::<Result<_>>()?,
        )),
        Value::Object(o) => {
            let id = o.get("class").and_then(Value::as_u64).ok_or_else(bad)?;
            Ok(XKey::Class(u32::try_from(id).map_err(|_| bad())?))
        }
        _ => Err(bad()),
    }
}

fn terms_from_json(v: &Value, q: u64) -> Result<Vec<(XKey, Vec<i64>, QSqrt)>> {
    let bad = || Error::Input("malformed Hall element terms".into());
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|t| {
            let x = xkey_from_json(t.get("X").ok_or_else(bad)?)?;
            let alpha: Vec<i64> = t
                .get("alpha")
                .and_then(Value::as_array)
                .ok_or_else(bad)?
                .iter()
                .map(|a| a.as_i64().ok_or_else(bad))
                .collect::<Result<_>>()?;
            let c = QSqrt::from_json(t.get("coeff").ok_or_else(bad)?)?;
            if c.q != q {
                return Err(Error::MismatchedField(c.q, q));
            }
            Ok((x, alpha, c))
        })
        .collect()
}

impl HallElement {
    pub fn from_json(v: &Value) -> Result<HallElement> {
        let q = v
            .get("q")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Input("Hall element without q".into()))?;
        let mut e = HallElement::zero(q);
        for (x, a, c) in terms_from_json(v.get("terms").unwrap_or(&Value::Null), q)? {
            e.add_term(x, a, c);
        }
        Ok(e)
    }
}

/// ς parameters per τ-orbit, stored on every vertex of the orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedParams {
    pub sigma: Vec<QSqrt>,
}

impl ReducedParams {
    pub fn new(iq: &IQuiver, sigma: Vec<QSqrt>) -> Result<Self> {
        if sigma.len() != iq.n() {
            return Err(Error::Input("one ς per vertex expected".into()));
        }
        for i in 0..iq.n() {
            if sigma[i] != sigma[iq.tau[i]] {
                return Err(Error::Input(format!(
                    "ς must satisfy ς_i = ς_τi (vertex {})",
                    iq.vertices[i]
                )));
            }
            if sigma[i].is_zero() {
                return Err(Error::Input("ς must be nonzero".into()));
            }
        }
        Ok(ReducedParams { sigma })
    }

    pub fn ones(iq: &IQuiver, q: u64) -> Self {
        ReducedParams {
            sigma: vec![QSqrt::one(q); iq.n()],
        }
    }
}

/// Torus normal form in the reduced quotient: E_{Ŝi} ↦ −qς_i for τi = i and E_{Ŝτi} ↦ ς_i² E_{−Ŝi}
/// for the non-representative vertex of each orbit.
pub fn reduce_params(iq: &IQuiver, e: &HallElement, params: &ReducedParams) -> Result<HallElement> {
    let q = e.q;
    let mut out = HallElement::zero(q);
    for ((x, alpha), c) in &e.terms {
        let mut coeff = c.clone();
        let mut a = alpha.clone();
        for i in 0..iq.n() {
            let k = alpha[i];
            if k == 0 {
                continue;
            }
            let s = &params.sigma[i];
            if iq.tau[i] == i {
                let base = &QSqrt::from_int(-(q as i64), q) * s;
                coeff = &coeff * &base.pow(k)?;
                a[i] = 0;
            } else if !iq.in_itau(i) {
                let r = iq.tau[i];
                coeff = &coeff * &(s * s).pow(k)?;
                a[r] -= k;
                a[i] = 0;
            }
        }
        out.add_term(x.clone(), a, coeff);
    }
    Ok(out)
}

/// Indecomposable kQ-modules M(β), one per positive root, with the data to read off root
/// multiplicities of any kQ-module from Hom dimensions.
pub struct RootModules {
    pub roots: Vec<Vec<usize>>,
    pub modules: Vec<Rep>,
    /// Inverse of the matrix dim Hom(M(β), M(γ)).
    inverse: Vec<Vec<i64>>,
}

impl RootModules {
    /// None when the quiver is not Dynkin.
    pub fn build(iq: &IQuiver, alg: &Arc<BoundAlgebra>, p: u64) -> Result<Option<Self>> {
        let table = match iq.root_table() {
            Ok(t) => t,
            Err(Error::NotDynkin) => return Ok(None),
            Err(e) => return Err(e),
        };
        let modules: Vec<Rep> = table
            .positive_roots
            .par_iter()
            .map(|b| find_root_module(alg, p, b, 0x0a11))
            .collect::<Result<_>>()?;
        let h: Vec<Vec<i64>> = modules
            .iter()
            .map(|m| modules.iter().map(|n| hom_dim(m, n) as i64).collect())
            .collect();
        let inverse = invert_unimodular(&h)?;
        Ok(Some(RootModules {
            roots: table.positive_roots,
            modules,
            inverse,
        }))
    }

    /// Reuses previously found root modules, e.g. from a cache.
    pub fn from_modules(iq: &IQuiver, modules: Vec<Rep>) -> Result<Self> {
        let table = iq.root_table()?;
        if modules.len() != table.positive_roots.len()
            || modules
                .iter()
                .zip(&table.positive_roots)
                .any(|(m, b)| m.dims != *b || end_dim(m) != 1)
        {
            return Err(Error::Input(
                "cached root modules do not match the root table".into(),
            ));
        }
        let h: Vec<Vec<i64>> = modules
            .iter()
            .map(|m| modules.iter().map(|n| hom_dim(m, n) as i64).collect())
            .collect();
        let inverse = invert_unimodular(&h)?;
        Ok(RootModules {
            roots: table.positive_roots,
            modules,
            inverse,
        })
    }

    /// Root multiplicities of a kQ-module.
    pub fn classify(&self, x: &Rep) -> Result<Vec<u32>> {
        let h: Vec<i64> = self.modules.iter().map(|m| hom_dim(m, x) as i64).collect();
        self.inverse
            .iter()
            .map(|row| {
                let s: i64 = row.iter().zip(&h).map(|(a, b)| a * b).sum();
                u32::try_from(s).map_err(|_| Error::Input("negative root multiplicity".into()))
            })
            .collect()
    }

    pub fn module_of(&self, alg: &Arc<BoundAlgebra>, p: u64, mult: &[u32]) -> Rep {
        let mut parts = Vec::new();
        for (k, &m) in mult.iter().enumerate() {
            parts.extend(std::iter::repeat_n(self.modules[k].clone(), m as usize));
        }
        Rep::direct_sum_all(alg, p, &parts)
    }

    pub fn index_of(&self, beta: &[usize]) -> Option<usize> {
        self.roots.iter().position(|b| b == beta)
    }

    pub fn dims_of(&self, mult: &[u32]) -> Vec<usize> {
        let n = self.roots.first().map_or(0, |r| r.len());
        let mut d = vec![0usize; n];
        for (k, &m) in mult.iter().enumerate() {
            for (i, &b) in self.roots[k].iter().enumerate() {
                d[i] += m as usize * b;
            }
        }
        d
    }
}

type ProductTerms = Vec<(XKey, Vec<i64>, QSqrt)>;

/// Hall algebra of Λ^ı over F_p.
pub struct HallContext {
    pub iq: IQuiver,
    pub alg: Arc<BoundAlgebra>,
    pub p: u64,
    pub caps: Caps,
    pub registry: Registry,
    roots: Option<RootModules>,
    memo: RwLock<HashMap<(XKey, XKey), ProductTerms>>,
    xreps: RwLock<HashMap<XKey, Rep>>,
    peel_check: bool,
    peel_checked: AtomicUsize,
}

/// Deterministic search for a representation with dimension vector β and End = k.
pub fn find_root_module(alg: &Arc<BoundAlgebra>, p: u64, beta: &[usize], seed: u64) -> Result<Rep> {
    let base = alg.base_arrows();
    let mut rng = crate::seeded_rng(
        seed ^ beta
            .iter()
            .fold(0u64, |h, &b| h.wrapping_mul(31).wrapping_add(b as u64)),
    );
    for _ in 0..20000 {
        let maps: Vec<(usize, FpMatrix)> = base
            .iter()
            .map(|&a| {
                let arr = &alg.quiver.arrows[a];
                let (r, c) = (beta[arr.tgt], beta[arr.src]);
                let data = (0..r * c).map(|_| rng.gen_range(0..p)).collect();
                (
                    a,
                    FpMatrix {
                        p,
                        rows: r,
                        cols: c,
                        data,
                    },
                )
            })
            .collect();
        let m = kq_module(alg, p, beta, &maps);
        if crate::repmod::end_dim(&m) == 1 {
            return Ok(m);
        }
    }
    Err(Error::SearchExhausted(beta.to_vec()))
}

fn invert_unimodular(h: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = h.len();
    let a: Vec<Vec<crate::scalars::Rational>> = h
        .iter()
        .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
        .collect();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let b: Vec<_> = (0..n).map(|i| rat(i64::from(i == k), 1)).collect();
        let x = crate::scalars::solve_rational(a.clone(), b)
            .ok_or_else(|| Error::Input("root Hom matrix is singular".into()))?;
        let xi: Vec<i64> = x
            .iter()
            .map(|r| {
                if r.is_integer() {
                    Ok(i64::try_from(r.to_integer()).unwrap())
                } else {
                    Err(Error::Input("root Hom matrix is not unimodular".into()))
                }
            })
            .collect::<Result<_>>()?;
        cols.push(xi);
    }
    Ok((0..n)
        .map(|i| (0..n).map(|k| cols[k][i]).collect())
        .collect())
}

impl HallContext {
    pub fn new(iq: &IQuiver, p: u64) -> Result<Self> {
        Self::with_caps(iq, p, Caps::default())
    }

    pub fn with_caps(iq: &IQuiver, p: u64, caps: Caps) -> Result<Self> {
        let alg = iquiver_algebra(iq)?;
        let roots = RootModules::build(iq, &alg, p)?;
        Ok(Self::assemble(iq, alg, p, caps, roots))
    }

    /// Rebuilds a context from [`HallContext::snapshot`] output: root modules, registry classes in
    /// id order and memoized symbol products.
    pub fn from_snapshot(iq: &IQuiver, p: u64, caps: Caps, snap: &Value) -> Result<Self> {
        let alg = iquiver_algebra(iq)?;
        let bad = |what: &str| Error::Input(format!("malformed cache snapshot: {what}"));
        if snap.get("algebra").and_then(Value::as_str) != Some(alg.hash.as_str())
            || snap.get("p").and_then(Value::as_u64) != Some(p)
        {
            return Err(bad("algebra or prime differs"));
        }
        let reps = |key: &str| -> Result<Vec<Rep>> {
            snap.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|m| Rep::from_json(&alg, m))
                .collect()
        };
        let roots = match snap.get("roots") {
            Some(Value::Null) | None => None,
            Some(_) => Some(RootModules::from_modules(iq, reps("roots")?)?),
        };
        let ctx = Self::assemble(iq, alg.clone(), p, caps, roots);
        for (k, m) in reps("registry")?.iter().enumerate() {
            if ctx.registry.intern(m)?.0 as usize != k {
                return Err(bad("registry classes are not pairwise distinct"));
            }
        }
        let memo = snap
            .get("memo")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("memo"))?;
        let mut table = ctx.memo.write().unwrap();
        for entry in memo {
            let x = xkey_from_json(entry.get("x").ok_or_else(|| bad("memo x"))?)?;
            let y = xkey_from_json(entry.get("y").ok_or_else(|| bad("memo y"))?)?;
            table.insert(
                (x, y),
                terms_from_json(entry.get("terms").ok_or_else(|| bad("memo terms"))?, p)?,
            );
        }
        drop(table);
        Ok(ctx)
    }

    /// Everything worth persisting between runs, as JSON with a stable ordering.
    pub fn snapshot(&self) -> Value {
        let roots = match &self.roots {
            Some(r) => Value::Array(r.modules.iter().map(Rep::to_json).collect()),
            None => Value::Null,
        };
        let registry: Vec<Value> = self.registry.all().iter().map(Rep::to_json).collect();
        let memo = self.memo.read().unwrap();
        let mut keys: Vec<&(XKey, XKey)> = memo.keys().collect();
        keys.sort();
        let memo: Vec<Value> = keys
            .into_iter()
            .map(|k| {
                let terms: Vec<Value> = memo[k]
                    .iter()
                    .map(|(x, a, c)| json!({"X": xkey_json(x), "alpha": a, "coeff": c.to_json()}))
                    .collect();
                json!({"x": xkey_json(&k.0), "y": xkey_json(&k.1), "terms": terms})
            })
            .collect();
        json!({"algebra": self.alg.hash, "p": self.p, "roots": roots, "registry": registry, "memo": memo})
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    fn assemble(
        iq: &IQuiver,
        alg: Arc<BoundAlgebra>,
        p: u64,
        caps: Caps,
        roots: Option<RootModules>,
    ) -> Self {
        HallContext {
            iq: iq.clone(),
            registry: Registry::new(&alg, p, caps.clone()),
            alg,
            p,
            caps,
            roots,
            memo: RwLock::new(HashMap::new()),
            xreps: RwLock::new(HashMap::new()),
            peel_check: false,
            peel_checked: AtomicUsize::new(0),
        }
    }

    /// Also normal-forms every middle term by peeling and insists both routes agree.
    pub fn with_peeling_check(mut self) -> Self {
        self.peel_check = true;
        self
    }

    pub fn peel_checked(&self) -> usize {
        self.peel_checked.load(Ordering::Relaxed)
    }

    pub fn is_dynkin(&self) -> bool {
        self.roots.is_some()
    }

    pub fn positive_roots(&self) -> Option<&[Vec<usize>]> {
        self.roots.as_ref().map(|r| r.roots.as_slice())
    }

    pub fn root_module(&self, beta: &[usize]) -> Option<Rep> {
        let r = self.roots.as_ref()?;
        r.index_of(beta).map(|k| r.modules[k].clone())
    }

    pub fn root_modules(&self) -> Option<&RootModules> {
        self.roots.as_ref()
    }

    pub fn num_roots(&self) -> usize {
        self.roots.as_ref().map_or(0, |r| r.roots.len())
    }

    fn v_pow(&self, k: i64) -> QSqrt {
        QSqrt::v_pow(self.p, k)
    }

    pub fn scalar(&self, n: i64) -> QSqrt {
        QSqrt::from_int(n, self.p)
    }

    /// Iso-class key of a kQ-module (all ε acting by zero).
    pub fn classify_kq(&self, x: &Rep) -> Result<XKey> {
        let key = match &self.roots {
            Some(rd) => XKey::Roots(rd.classify(x)?),
            None => XKey::Class(self.registry.intern(x)?.0),
        };
        let mut cache = self.xreps.write().unwrap();
        cache.entry(key.clone()).or_insert_with(|| x.clone());
        Ok(key)
    }

    /// A module representing the class `x`.
    pub fn x_rep(&self, x: &XKey) -> Rep {
        if let Some(r) = self.xreps.read().unwrap().get(x) {
            return r.clone();
        }
        let rep = match (x, &self.roots) {
            (XKey::Roots(mult), Some(rd)) => rd.module_of(&self.alg, self.p, mult),
            (XKey::Class(id), _) => self.registry.get(crate::repmod::ModuleId(*id)),
            _ => panic!("root key without root data"),
        };
        self.xreps.write().unwrap().insert(x.clone(), rep.clone());
        rep
    }

    /// Key of the kQ-module with root multiplicities `mult`.
    pub fn roots_key(&self, mult: Vec<u32>) -> XKey {
        XKey::Roots(mult)
    }

    pub fn zero_key(&self) -> XKey {
        match &self.roots {
            Some(rd) => XKey::Roots(vec![0; rd.roots.len()]),
            None => self
                .classify_kq(&Rep::zero(&self.alg, self.p))
                .expect("zero module classifies"),
        }
    }

    pub fn simple_key(&self, i: usize) -> Result<XKey> {
        self.classify_kq(&make_simple(&self.alg, self.p, i))
    }

    /// Dimension vector of the class `x`.
    pub fn x_dims(&self, x: &XKey) -> Vec<i64> {
        match (x, &self.roots) {
            (XKey::Roots(mult), Some(rd)) => {
                rd.dims_of(mult).into_iter().map(|d| d as i64).collect()
            }
            _ => self.x_rep(x).dims_i64(),
        }
    }

    /// K₀-grade dims(X) + Σ α_i (Ŝ_i + Ŝ_{τi}).
    pub fn grade(&self, x: &XKey, alpha: &[i64]) -> Vec<i64> {
        let mut g = self.x_dims(x);
        for (i, &a) in alpha.iter().enumerate() {
            g[i] += a;
            g[self.iq.tau[i]] += a;
        }
        g
    }

    /// The kQ-module H(L) with H_i = ker ε_i / im ε_{τi}, and the ranks of the ε_i.
    pub fn h_part(&self, l: &Rep) -> (Rep, Vec<i64>) {
        let n = self.iq.n();
        let eps: Vec<usize> = (0..n)
            .map(|i| self.alg.eps_arrow(i).expect("iquiver algebra"))
            .collect();
        let kernel = SubRep {
            spaces: (0..n)
                .map(|i| {
                    let m = &l.maps[eps[i]];
                    if m.rows == 0 {
                        crate::linalg_ff::Subspace::full(self.p, l.dims[i])
                    } else {
                        m.kernel_basis()
                    }
                })
                .collect(),
        };
        let krep = l.sub_rep(&kernel);
        let image = SubRep {
            spaces: (0..n)
                .map(|i| {
                    let m = &l.maps[eps[self.iq.tau[i]]];
                    let vecs: Vec<Vec<u64>> = if l.dims[i] == 0 {
                        vec![]
                    } else {
                        m.image_basis()
                            .vectors()
                            .iter()
                            .map(|v| kernel.spaces[i].coords(v).expect("im ε ⊆ ker ε"))
                            .collect()
                    };
                    crate::linalg_ff::Subspace::from_vectors(self.p, krep.dims[i], &vecs)
                })
                .collect(),
        };
        let x = krep.quotient(&image).restrict_kq();
        let alpha = (0..n).map(|i| l.maps[eps[i]].rank() as i64).collect();
        (x, alpha)
    }

    /// [L] = c·[X]∗E_α.
    pub fn normalize(&self, l: &Rep) -> Result<(QSqrt, XKey, Vec<i64>)> {
        let (x, alpha) = self.h_part(l);
        let xd = x.dims_i64();
        let n = self.iq.n();
        let mut k = vec![0i64; n];
        let mut e = 0i64;
        for i in 0..n {
            k[i] += alpha[i];
            k[self.iq.tau[i]] += alpha[i];
            e += 2 * alpha[i] * self.iq.euler(&xd, &self.iq.unit(self.iq.tau[i]));
        }
        e -= self.iq.euler(&xd, &k);
        let key = self.classify_kq(&x)?;
        if self.peel_check {
            let (c2, key2, alpha2) = self.normalize_by_peeling(l)?;
            if key2 != key || alpha2 != alpha || c2 != self.v_pow(e) {
                return Err(Error::Input(format!(
                    "normal forms disagree on module {:?}",
                    l.dims
                )));
            }
            self.peel_checked.fetch_add(1, Ordering::Relaxed);
        }
        Ok((self.v_pow(e), key, alpha))
    }

    /// Normal form by splitting off P≤1 submodules (then quotients) of mixed summands.
    pub fn normalize_by_peeling(&self, l: &Rep) -> Result<(QSqrt, XKey, Vec<i64>)> {
        let cap = self.caps.end_dim;
        let mut stack = decompose(l, cap)?;
        let mut kq = Vec::new();
        let mut pp = Vec::new();
        while let Some(m) = stack.pop() {
            if m.is_kq_module() {
                kq.push(m);
            } else if m.is_p_leq1() {
                pp.push(m);
            } else if let Some((_, u)) = find_e_submodule(&m)? {
                stack.extend(decompose(&m.sub_rep(&u).direct_sum(&m.quotient(&u)), cap)?);
            } else if let Some((_, w)) = find_e_quotient(&m)? {
                stack.extend(decompose(&m.quotient(&w).direct_sum(&m.sub_rep(&w)), cap)?);
            } else {
                return Err(Error::NormalFormStuck(m.dims.clone()));
            }
        }
        let x = Rep::direct_sum_all(&self.alg, self.p, &kq);
        let k = Rep::direct_sum_all(&self.alg, self.p, &pp);
        let alpha = torus_class(&k)?;
        let e = 2 * euler_lambda(&x, &k)? - self.iq.euler(&x.dims_i64(), &k.dims_i64());
        Ok((self.v_pow(e), self.classify_kq(&x)?, alpha))
    }

    pub fn element_of(&self, l: &Rep) -> Result<HallElement> {
        let (c, x, a) = self.normalize(l)?;
        Ok(HallElement::symbol(self.p, x, a, c))
    }

    /// Σ_L |Ext¹(M,N)_L| / |Hom(M,N)| · [L], normal-formed.
    pub fn raw_product(&self, m: &Rep, n: &Rep) -> Result<HallElement> {
        let data = ext1_middle_terms(m, n, self.caps.ext_dim)?;
        let inv_hom = self.v_pow(-2 * data.hom_dim as i64);
        let mut out = HallElement::zero(self.p);
        for (l, count) in &data.terms {
            let (c, x, a) = self.normalize(l)?;
            out.add_term(x, a, &(&c * &inv_hom) * &self.scalar(*count as i64));
        }
        Ok(out)
    }

    /// [M]∗[N] = v^{⟨res M, res N⟩_Q} [M]⋄[N] for arbitrary modules.
    pub fn module_product(&self, m: &Rep, n: &Rep) -> Result<HallElement> {
        let t = self.iq.euler(&m.dims_i64(), &n.dims_i64());
        Ok(self.raw_product(m, n)?.scale(&self.v_pow(t)))
    }

    fn symbol_product(&self, x: &XKey, y: &XKey) -> Result<ProductTerms> {
        let key = (x.clone(), y.clone());
        if let Some(t) = self.memo.read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let e = self.module_product(&self.x_rep(x), &self.x_rep(y))?;
        let terms: ProductTerms = e.terms.into_iter().map(|((z, a), c)| (z, a, c)).collect();
        self.memo.write().unwrap().insert(key, terms.clone());
        Ok(terms)
    }

    /// d(α, y) = Σ α_i (⟨S_{τi} − S_i, y⟩_Q + ⟨y, S_{τi} − S_i⟩_Q).
    pub fn commutation_exponent(&self, alpha: &[i64], y: &[i64]) -> i64 {
        let n = self.iq.n();
        let mut d = vec![0i64; n];
        for i in 0..n {
            d[self.iq.tau[i]] += alpha[i];
            d[i] -= alpha[i];
        }
        self.iq.euler(&d, y) + self.iq.euler(y, &d)
    }

    pub fn mul(&self, a: &HallElement, b: &HallElement) -> Result<HallElement> {
        if a.q != self.p || b.q != self.p {
            return Err(Error::MismatchedField(a.q, b.q));
        }
        let mut out = HallElement::zero(self.p);
        for ((x, alpha), c1) in &a.terms {
            for ((y, beta), c2) in &b.terms {
                let yd = self.x_dims(y);
                let twist = self.v_pow(self.commutation_exponent(alpha, &yd));
                let base = &(c1 * c2) * &twist;
                for (z, gamma, c) in self.symbol_product(x, y)? {
                    let s: Vec<i64> = (0..alpha.len())
                        .map(|i| alpha[i] + beta[i] + gamma[i])
                        .collect();
                    out.add_term(z, s, &base * &c);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_all(&self, factors: &[HallElement]) -> Result<HallElement> {
        let mut acc = self.one();
        for f in factors {
            acc = self.mul(&acc, f)?;
        }
        Ok(acc)
    }

    pub fn one(&self) -> HallElement {
        HallElement::symbol(
            self.p,
            self.zero_key(),
            vec![0; self.iq.n()],
            QSqrt::one(self.p),
        )
    }

    pub fn torus(&self, alpha: Vec<i64>) -> HallElement {
        HallElement::symbol(self.p, self.zero_key(), alpha, QSqrt::one(self.p))
    }

    /// E_{Ŝ_i}.
    pub fn torus_unit(&self, i: usize) -> HallElement {
        let mut a = vec![0; self.iq.n()];
        a[i] = 1;
        self.torus(a)
    }

    /// [S_i].
    pub fn simple(&self, i: usize) -> Result<HallElement> {
        Ok(HallElement::symbol(
            self.p,
            self.simple_key(i)?,
            vec![0; self.iq.n()],
            QSqrt::one(self.p),
        ))
    }

    pub fn basis_symbol(&self, x: XKey, alpha: Vec<i64>) -> HallElement {
        HallElement::symbol(self.p, x, alpha, QSqrt::one(self.p))
    }

    /// Checks [E_i]∗[M] = [M]∗[E_i] (τi = i) or the same for E_i ⊕ E_{τi}, via module products.
    pub fn centrality_check(&self, i: usize, test_set: &[Rep]) -> Result<CentralityResult> {
        let e = if self.iq.tau[i] == i {
            make_generalized_simple(&self.alg, self.p, i)
        } else {
            make_generalized_simple(&self.alg, self.p, i).direct_sum(&make_generalized_simple(
                &self.alg,
                self.p,
                self.iq.tau[i],
            ))
        };
        for m in test_set {
            let left = self.module_product(&e, m)?;
            let right = self.module_product(m, &e)?;
            if left != right {
                return Ok(CentralityResult {
                    central: false,
                    counterexample: Some((m.clone(), left, right)),
                });
            }
        }
        Ok(CentralityResult {
            central: true,
            counterexample: None,
        })
    }

    /// A random basis symbol whose kQ-part has total dimension at most `max_dim`.
    pub fn random_symbol<R: Rng>(
        &self,
        rng: &mut R,
        max_dim: usize,
        torus_range: i64,
    ) -> Result<HallElement> {
        let n = self.iq.n();
        let x = loop {
            let m = crate::repmod::random_module(&self.alg, self.p, rng, max_dim).restrict_kq();
            if m.total_dim() <= max_dim {
                break m;
            }
        };
        let key = self.classify_kq(&x)?;
        let alpha: Vec<i64> = (0..n)
            .map(|_| rng.gen_range(-torus_range..=torus_range))
            .collect();
        Ok(self.basis_symbol(key, alpha))
    }
}

pub struct CentralityResult {
    pub central: bool,
    pub counterexample: Option<(Rep, HallElement, HallElement)>,
}

/// A prime-independent factor: a kQ-class given by root multiplicities, times E_α.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericFactor {
    pub roots: Vec<u32>,
    pub alpha: Vec<i64>,
}

impl GenericFactor {
    pub fn simple(iq: &IQuiver, i: usize) -> Result<Self> {
        let table = iq.root_table()?;
        let unit: Vec<usize> = (0..iq.n()).map(|k| usize::from(k == i)).collect();
        let mut roots = vec![0; table.positive_roots.len()];
        roots[table
            .positive_roots
            .iter()
            .position(|b| *b == unit)
            .unwrap()] = 1;
        Ok(GenericFactor {
            roots,
            alpha: vec![0; iq.n()],
        })
    }

    pub fn torus(iq: &IQuiver, alpha: Vec<i64>) -> Result<Self> {
        Ok(GenericFactor {
            roots: vec![0; iq.root_table()?.positive_roots.len()],
            alpha,
        })
    }
}

/// Σ_t coeff_t · (product of the factors of t), with Laurent coefficients.
pub type GenericCombination = Vec<(LaurentV, Vec<GenericFactor>)>;

fn eval_combination(ctx: &HallContext, comb: &GenericCombination) -> Result<HallElement> {
    let mut total = HallElement::zero(ctx.p);
    for (coeff, factors) in comb {
        let elems: Vec<HallElement> = factors
            .iter()
            .map(|f| ctx.basis_symbol(XKey::Roots(f.roots.clone()), f.alpha.clone()))
            .collect();
        total = total.add(&ctx.mul_all(&elems)?.scale(&coeff.eval(ctx.p)));
    }
    Ok(total)
}

/// Laurent coefficients of a product combination, fitted over `primes` and checked at `check`.
pub fn generic_structure_constants(
    iq: &IQuiver,
    comb: &GenericCombination,
    primes: &[u64],
    check: u64,
    degree_bound: i64,
) -> Result<BTreeMap<TermKey, LaurentV>> {
    generic_structure_constants_capped(iq, comb, primes, check, degree_bound, DEFAULT_LAURENT_CAP)
}

/// As [`generic_structure_constants`], with an explicit ceiling for the escalating degree bound.
pub fn generic_structure_constants_capped(
    iq: &IQuiver,
    comb: &GenericCombination,
    primes: &[u64],
    check: u64,
    degree_bound: i64,
    cap: i64,
) -> Result<BTreeMap<TermKey, LaurentV>> {
    let mut all: Vec<u64> = primes.to_vec();
    all.push(check);
    let ctxs: Vec<HallContext> = all
        .par_iter()
        .map(|&p| HallContext::new(iq, p))
        .collect::<Result<_>>()?;
    let refs: Vec<&HallContext> = ctxs.iter().collect();
    generic_structure_constants_in(&refs, comb, degree_bound, cap)
}

/// Fits over every context but the last one, which serves as the held-out check.
pub fn generic_structure_constants_in(
    ctxs: &[&HallContext],
    comb: &GenericCombination,
    degree_bound: i64,
    cap: i64,
) -> Result<BTreeMap<TermKey, LaurentV>> {
    let (check_ctx, fit_ctxs) = ctxs
        .split_last()
        .ok_or_else(|| Error::Input("no primes given".into()))?;
    check_ctx.iq.root_table()?;
    if ctxs.iter().any(|c| c.iq != check_ctx.iq) {
        return Err(Error::Input("contexts over different iquivers".into()));
    }
    let all: Vec<u64> = ctxs.iter().map(|c| c.p).collect();
    let check = check_ctx.p;
    let values: Vec<HallElement> = ctxs
        .par_iter()
        .map(|ctx| eval_combination(ctx, comb))
        .collect::<Result<_>>()?;
    let supports: Vec<BTreeSet<&TermKey>> =
        values.iter().map(|e| e.terms.keys().collect()).collect();
    for (k, s) in supports.iter().enumerate() {
        if *s != supports[0] {
            return Err(Error::AlignmentFailure(format!(
                "support at q={} differs from q={}",
                all[k], all[0]
            )));
        }
    }
    let mut out = BTreeMap::new();
    for key in supports[0].iter() {
        let samples: Vec<(u64, QSqrt)> = fit_ctxs
            .iter()
            .zip(&values)
            .map(|(c, e)| (c.p, e.terms[*key].clone()))
            .collect();
        let name = format!("{:?}", key);
        let fit =
            laurent_fit_capped(&samples, degree_bound, cap.max(degree_bound)).map_err(|e| {
                Error::FitFailure {
                    key: name.clone(),
                    reason: e.to_string(),
                }
            })?;
        let checked = &values[values.len() - 1].terms[*key];
        if fit.eval(check) != *checked {
            return Err(Error::FitFailure {
                key: name,
                reason: format!("held-out check at q={check} fails"),
            });
        }
        out.insert((*key).clone(), fit);
    }
    Ok(out)
}

pub fn generic_to_json(m: &BTreeMap<TermKey, LaurentV>) -> Value {
    let terms: Vec<Value> = m
        .iter()
        .map(|((x, a), c)| json!({"X": xkey_json(x), "alpha": a, "coeff": c.to_json(), "coeff_str": c.to_string()}))
        .collect();
    json!({"mode": "generic", "terms": terms})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundalg::regular_projective;
    use crate::iquiver::examples::*;

    fn ctx(iq: &IQuiver, p: u64) -> HallContext {
        HallContext::new(iq, p).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let iq = a2_split();
        let c = ctx(&iq, 2);
        let e1 = make_generalized_simple(&c.alg, 2, 0);
        let s2 = make_simple(&c.alg, 2, 1);
        let (sc, x, a) = c.normalize(&e1.direct_sum(&s2)).unwrap();
        assert!(sc.is_one());
        assert_eq!(x, c.simple_key(1).unwrap());
        assert_eq!(a, vec![1, 0]);
        let s1 = make_simple(&c.alg, 2, 0);
        let (sc, x, a) = c.normalize(&s1.direct_sum(&s2)).unwrap();
        assert!(sc.is_one());
        assert_eq!(a, vec![0, 0]);
        assert_eq!(c.x_dims(&x), vec![1, 1]);

        let iq3 = a3_tau();
        let c3 = ctx(&iq3, 3);
        let u3 = regular_projective(&c3.alg, 3, 2);
        let rad = u3.sub_rep(&u3.radical());
        let (sc, x, a) = c3.normalize(&rad).unwrap();
        assert!(sc.is_one());
        assert_eq!(x, c3.simple_key(0).unwrap());
        assert_eq!(a, vec![0, 1, 0]);
    }

    #[test]
    fn peeling_agrees_with_closed_form() {
        let iq = a2_split();
        let c = ctx(&iq, 2);
        let mut rng = crate::seeded_rng(7);
        for _ in 0..40 {
            let m = crate::repmod::random_module(&c.alg, 2, &mut rng, 5);
            assert_eq!(
                c.normalize(&m).unwrap(),
                c.normalize_by_peeling(&m).unwrap(),
                "{m:?}"
            );
        }
    }

    #[test]
    fn raw_product_s1_s1() {
        let iq = a2_split();
        for p in [2u64, 3] {
            let c = ctx(&iq, p);
            let s1 = make_simple(&c.alg, p, 0);
            let r = c.raw_product(&s1, &s1).unwrap();
            let two_s1 = c.classify_kq(&s1.power(2)).unwrap();
            assert_eq!(
                r.coeff(&two_s1, &[0, 0]),
                QSqrt::from_rational(rat(1, p as i64), p)
            );
            assert_eq!(
                r.coeff(&c.zero_key(), &[1, 0]),
                QSqrt::from_rational(rat(p as i64 - 1, p as i64), p)
            );
            assert_eq!(r.terms.len(), 2);
        }
    }

    #[test]
    fn torus_products() {
        let c = ctx(&a3_tau(), 2);
        let a = c.torus(vec![1, -2, 0]);
        let b = c.torus(vec![0, 3, 1]);
        assert_eq!(c.mul(&a, &b).unwrap(), c.torus(vec![1, 1, 1]));
    }

    #[test]
    fn swap_commutator() {
        let c = ctx(&swap_pair(), 5);
        let s1 = c.simple(0).unwrap();
        let s2 = c.simple(1).unwrap();
        let lhs = c.mul(&s1, &s2).unwrap().sub(&c.mul(&s2, &s1).unwrap());
        let rhs = c.torus_unit(0).sub(&c.torus_unit(1)).scale(&c.scalar(4));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn reduce_examples() {
        let iq = a2_split();
        let c = ctx(&iq, 2);
        let r = reduce_params(&iq, &c.torus_unit(0), &ReducedParams::ones(&iq, 2)).unwrap();
        assert_eq!(r, c.one().scale(&c.scalar(-2)));
        let sw = swap_pair();
        let c = ctx(&sw, 2);
        let r = reduce_params(&sw, &c.torus_unit(1), &ReducedParams::ones(&sw, 2)).unwrap();
        assert_eq!(r, c.torus(vec![-1, 0]));
        assert_eq!(
            reduce_params(&sw, &c.one(), &ReducedParams::ones(&sw, 2)).unwrap(),
            c.one()
        );
        let bad = vec![QSqrt::one(2), QSqrt::from_int(2, 2)];
        assert!(ReducedParams::new(&sw, bad).is_err());
    }

    #[test]
    fn centrality_examples() {
        let iq = a2_split();
        let c = ctx(&iq, 2);
        let s2 = make_simple(&c.alg, 2, 1);
        assert!(c.centrality_check(0, &[s2.clone()]).unwrap().central);
        let sw = swap_pair();
        let c = ctx(&sw, 2);
        let s1 = make_simple(&c.alg, 2, 0);
        assert!(c.centrality_check(0, &[s1]).unwrap().central);
    }

    #[test]
    fn generic_torus_constant() {
        let iq = a2_split();
        let comb = vec![(
            LaurentV::one(),
            vec![
                GenericFactor::torus(&iq, vec![1, 0]).unwrap(),
                GenericFactor::torus(&iq, vec![2, -1]).unwrap(),
            ],
        )];
        let r = generic_structure_constants(&iq, &comb, &[2, 3, 5], 7, 4).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.values().next().unwrap(), &LaurentV::one());
    }

    #[test]
    fn snapshot_round_trip() {
        let ctx = HallContext::new(&a2_split(), 3).unwrap();
        let (s1, s2) = (ctx.simple(0).unwrap(), ctx.simple(1).unwrap());
        let prod = ctx.mul(&s1, &s2).unwrap();
        let snap = ctx.snapshot();
        let warm = HallContext::from_snapshot(&a2_split(), 3, Caps::default(), &snap).unwrap();
        assert_eq!(warm.memo_len(), ctx.memo_len());
        assert_eq!(warm.mul(&s1, &s2).unwrap(), prod);
        assert_eq!(warm.snapshot(), snap);
        assert_eq!(HallElement::from_json(&prod.to_json()).unwrap(), prod);
        assert!(HallContext::from_snapshot(&a2_split(), 2, Caps::default(), &snap).is_err());
    }
}
