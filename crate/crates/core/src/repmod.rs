//! Modules over bound quiver algebras: Hom, Ext¹ with middle terms, submodules, Krull–Schmidt
//! splitting, homological predicates and an iso-class registry.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde_json::{json, Value};

use crate::boundalg::{regular_projective, BoundAlgebra};
use crate::error::{Error, Result};
use crate::iquiver::ArrowKind;
use crate::linalg_ff::{mul_mod, reduce_i64, sub_mod, FpMatrix, Subspace};

pub const DEFAULT_HOM_CAP: usize = 10;
pub const DEFAULT_EXT_CAP: usize = 8;
pub const DEFAULT_END_CAP: usize = 10;
pub const DEFAULT_SUBMODULE_BUDGET: usize = 20000;
/// Largest number of elements an exhaustive search over a Hom space may visit.
pub const ENUMERATION_LIMIT: u64 = 1 << 22;

/// A representation of a bound quiver: one vector space per vertex, one matrix per arrow.
#[derive(Clone)]
pub struct Rep {
    pub alg: Arc<BoundAlgebra>,
    pub p: u64,
    pub dims: Vec<usize>,
    pub maps: Vec<FpMatrix>,
}

impl fmt::Debug for Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rep(dims={:?}, maps={:?})", self.dims, self.maps)
    }
}

impl PartialEq for Rep {
    fn eq(&self, o: &Rep) -> bool {
        Arc::ptr_eq(&self.alg, &o.alg)
            && self.p == o.p
            && self.dims == o.dims
            && self.maps == o.maps
    }
}

/// A submodule given by one subspace per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubRep {
    pub spaces: Vec<Subspace>,
}

impl SubRep {
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<Vec<FpMatrix>>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Projective presentation data P₀ → M with kernel Ω.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub p0: Rep,
    pub pi: Vec<FpMatrix>,
    pub omega: SubRep,
    pub omega_rep: Rep,
}

/// Middle terms of Ext¹(M, N): each term carries the number of classes it stands for.
#[derive(Clone, Debug)]
pub struct ExtData {
    pub hom_dim: usize,
    pub ext_dim: usize,
    pub terms: Vec<(Rep, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleId(pub u32);

#[derive(Clone, Debug)]
pub struct ExtClassification {
    pub classes: Vec<(ModuleId, u64)>,
    pub hom_dim: usize,
    pub ext_dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Predicates {
    pub is_kq_projective_restriction: bool,
    pub is_p_leq1: bool,
    pub is_gproj: bool,
    pub is_kq_module: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    pub hom_dim: usize,
    pub ext_dim: usize,
    pub end_dim: usize,
    pub submodule_budget: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            hom_dim: DEFAULT_HOM_CAP,
            ext_dim: DEFAULT_EXT_CAP,
            end_dim: DEFAULT_END_CAP,
            submodule_budget: DEFAULT_SUBMODULE_BUDGET,
        }
    }
}

fn cap_err(what: &'static str, value: usize, cap: usize) -> Error {
    Error::CapExceeded {
        what,
        value: value as u64,
        cap: cap as u64,
    }
}

fn enum_size(p: u64, dim: usize) -> Option<u64> {
    let mut n: u64 = 1;
    for _ in 0..dim {
        n = n.checked_mul(p)?;
    }
    Some(n)
}

/// Digits of `idx` in base p, least significant first.
fn digits(mut idx: u64, p: u64, len: usize) -> Vec<u64> {
    let mut d = vec![0; len];
    for x in d.iter_mut() {
        *x = idx % p;
        idx /= p;
    }
    d
}

fn lin_comb(p: u64, basis: &[Vec<FpMatrix>], coeffs: &[u64]) -> Vec<FpMatrix> {
    let mut out: Vec<FpMatrix> = basis[0]
        .iter()
        .map(|m| FpMatrix::zeros(p, m.rows, m.cols))
        .collect();
    for (b, &c) in basis.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (o, m) in out.iter_mut().zip(b) {
            *o = o.add(&m.scale(c));
        }
    }
    out
}

impl Rep {
    /// Builds a module, checking shapes and all relations.
    pub fn new(
        alg: Arc<BoundAlgebra>,
        p: u64,
        dims: Vec<usize>,
        maps: Vec<FpMatrix>,
    ) -> Result<Rep> {
        if dims.len() != alg.n() || maps.len() != alg.num_arrows() {
            return Err(Error::ShapeMismatch("vertex or arrow count".into()));
        }
        for (a, m) in maps.iter().enumerate() {
            let arr = &alg.quiver.arrows[a];
            if m.rows != dims[arr.tgt] || m.cols != dims[arr.src] || m.p != p {
                return Err(Error::ShapeMismatch(format!(
                    "matrix for arrow {}",
                    arr.name
                )));
            }
        }
        let r = Rep { alg, p, dims, maps };
        if let Some(bad) = r.violated_relation() {
            return Err(Error::Input(format!("relation {bad} does not hold")));
        }
        Ok(r)
    }

    pub fn zero(alg: &Arc<BoundAlgebra>, p: u64) -> Rep {
        let dims = vec![0; alg.n()];
        let maps = alg
            .quiver
            .arrows
            .iter()
            .map(|_| FpMatrix::zeros(p, 0, 0))
            .collect();
        Rep {
            alg: alg.clone(),
            p,
            dims,
            maps,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn dims_i64(&self) -> Vec<i64> {
        self.dims.iter().map(|&d| d as i64).collect()
    }

    /// Matrix of a path given in traversal order, from its source space to its target space.
    pub fn path_matrix(&self, src: usize, word: &[usize]) -> FpMatrix {
        let mut m = FpMatrix::identity(self.p, self.dims[src]);
        for &a in word {
            m = self.maps[a].dot(&m);
        }
        m
    }

    pub fn violated_relation(&self) -> Option<String> {
        let q = &self.alg.quiver;
        for r in &q.relations {
            let (_, first) = &r.terms[0];
            let src = q.arrows[first[0]].src;
            let tgt = q.arrows[*first.last().unwrap()].tgt;
            let mut acc = FpMatrix::zeros(self.p, self.dims[tgt], self.dims[src]);
            for (c, w) in &r.terms {
                acc = acc.add(&self.path_matrix(src, w).scale(reduce_i64(*c, self.p)));
            }
            if !acc.is_zero() {
                return Some(q.relation_string(r));
            }
        }
        None
    }

    pub fn direct_sum(&self, o: &Rep) -> Rep {
        assert!(
            Arc::ptr_eq(&self.alg, &o.alg) && self.p == o.p,
            "direct sum over one algebra"
        );
        let dims = self.dims.iter().zip(&o.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .maps
            .iter()
            .zip(&o.maps)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        Rep {
            alg: self.alg.clone(),
            p: self.p,
            dims,
            maps,
        }
    }

    pub fn direct_sum_all(alg: &Arc<BoundAlgebra>, p: u64, parts: &[Rep]) -> Rep {
        parts
            .iter()
            .fold(Rep::zero(alg, p), |acc, m| acc.direct_sum(m))
    }

    pub fn power(&self, k: usize) -> Rep {
        Rep::direct_sum_all(&self.alg, self.p, &vec![self.clone(); k])
    }

    fn eps_arrows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.maps.len()).filter(|&a| self.alg.is_eps(a))
    }

    /// The kQ-module underlying M, pulled back along Λ → kQ (all ε act by zero).
    pub fn restrict_kq(&self) -> Rep {
        let mut r = self.clone();
        for a in self.eps_arrows().collect::<Vec<_>>() {
            r.maps[a] = FpMatrix::zeros(self.p, r.maps[a].rows, r.maps[a].cols);
        }
        r
    }

    /// The module keeping only the ε-action (arrows of Q act by zero).
    pub fn restrict_h(&self) -> Rep {
        let mut r = self.clone();
        for a in 0..r.maps.len() {
            if !self.alg.is_eps(a) {
                r.maps[a] = FpMatrix::zeros(self.p, r.maps[a].rows, r.maps[a].cols);
            }
        }
        r
    }

    pub fn is_kq_module(&self) -> bool {
        self.eps_arrows().all(|a| self.maps[a].is_zero())
    }

    fn eps_map(&self, i: usize) -> Option<&FpMatrix> {
        self.alg.eps_arrow(i).map(|a| &self.maps[a])
    }

    /// Ranks of ε_i : M_i → M_{τi}, one per vertex (zero when the algebra has no ε-arrows).
    pub fn eps_ranks(&self) -> Vec<usize> {
        (0..self.alg.n())
            .map(|i| self.eps_map(i).map_or(0, |m| m.rank()))
            .collect()
    }

    pub fn predicates(&self) -> Predicates {
        let gproj = self.kq_restriction_projective();
        Predicates {
            is_kq_projective_restriction: gproj,
            is_p_leq1: self.is_p_leq1(),
            is_gproj: gproj,
            is_kq_module: self.is_kq_module(),
        }
    }

    /// ⊕_{α: j→i} M_j → M_i injective at every vertex.
    pub fn kq_restriction_projective(&self) -> bool {
        let alg = &self.alg;
        (0..alg.n()).all(|i| {
            let incoming: Vec<usize> = alg
                .base_arrows()
                .into_iter()
                .filter(|&a| alg.quiver.arrows[a].tgt == i)
                .collect();
            if incoming.is_empty() {
                return true;
            }
            let mut big = self.maps[incoming[0]].clone();
            for &a in &incoming[1..] {
                big = big.hstack(&self.maps[a]);
            }
            big.rank() == big.cols
        })
    }

    /// Exactness of the ε-complex: ker ε_i = im ε_{τi} at every vertex.
    pub fn is_p_leq1(&self) -> bool {
        let Some(iq) = &self.alg.iq else { return true };
        if self.alg.eps_arrow(0).is_none() {
            return self.is_zero();
        }
        (0..self.alg.n()).all(|i| {
            let e_out = self.eps_map(i).unwrap();
            let e_in = self.eps_map(iq.tau[i]).unwrap();
            // dim ker ε_i = dim im ε_{τi}, given im ⊆ ker
            self.dims[i] - e_out.rank() == e_in.rank()
        })
    }

    pub fn to_json(&self) -> Value {
        let q = &self.alg.quiver;
        let dims: serde_json::Map<String, Value> = q
            .vertices
            .iter()
            .zip(&self.dims)
            .map(|(v, d)| (v.clone(), json!(d)))
            .collect();
        let maps: serde_json::Map<String, Value> = q
            .arrows
            .iter()
            .zip(&self.maps)
            .map(|(a, m)| (a.name.clone(), json!(m.to_rows())))
            .collect();
        json!({"algebra": self.alg.hash, "p": self.p, "dims": dims, "maps": maps})
    }

    pub fn from_json(alg: &Arc<BoundAlgebra>, v: &Value) -> Result<Rep> {
        let bad = |m: &str| Error::Input(format!("module JSON: {m}"));
        let p = v
            .get("p")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing p"))?;
        if let Some(h) = v.get("algebra").and_then(Value::as_str) {
            if h != alg.hash {
                return Err(Error::AlgebraMismatch);
            }
        }
        let q = &alg.quiver;
        let dmap = v
            .get("dims")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing dims"))?;
        let dims: Vec<usize> = q
            .vertices
            .iter()
            .map(|name| dmap.get(name).and_then(Value::as_u64).unwrap_or(0) as usize)
            .collect();
        let mmap = v.get("maps").and_then(Value::as_object);
        let mut maps = Vec::new();
        for arr in &q.arrows {
            let (r, c) = (dims[arr.tgt], dims[arr.src]);
            let m = match mmap.and_then(|m| m.get(&arr.name)) {
                Some(rows) => {
                    let rows: Vec<Vec<i64>> =
                        serde_json::from_value(rows.clone()).map_err(|e| bad(&e.to_string()))?;
                    if rows.len() != r || rows.iter().any(|x| x.len() != c) {
                        return Err(bad(&format!("shape of map {}", arr.name)));
                    }
                    if r == 0 {
                        FpMatrix::zeros(p, 0, c)
                    } else {
                        FpMatrix::from_rows(p, &rows)
                    }
                }
                None => FpMatrix::zeros(p, r, c),
            };
            maps.push(m);
        }
        Rep::new(alg.clone(), p, dims, maps)
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0; self.dims.len() + 1];
        for (i, d) in self.dims.iter().enumerate() {
            off[i + 1] = off[i] + d;
        }
        off
    }
}

/// One-dimensional simple at vertex i.
pub fn make_simple(alg: &Arc<BoundAlgebra>, p: u64, i: usize) -> Rep {
    let mut dims = vec![0; alg.n()];
    dims[i] = 1;
    let maps = alg
        .quiver
        .arrows
        .iter()
        .map(|a| FpMatrix::zeros(p, dims[a.tgt], dims[a.src]))
        .collect();
    Rep {
        alg: alg.clone(),
        p,
        dims,
        maps,
    }
}

/// E_i: k[ε]/(ε²) at i when τi = i, otherwise k at i and τi with ε_i = 1, ε_{τi} = 0.
pub fn make_generalized_simple(alg: &Arc<BoundAlgebra>, p: u64, i: usize) -> Rep {
    let iq = alg
        .iq
        .as_ref()
        .expect("generalized simples need an iquiver algebra");
    let ti = iq.tau[i];
    let mut dims = vec![0; alg.n()];
    dims[i] += 1;
    dims[ti] += 1;
    let mut maps: Vec<FpMatrix> = alg
        .quiver
        .arrows
        .iter()
        .map(|a| FpMatrix::zeros(p, dims[a.tgt], dims[a.src]))
        .collect();
    let e = alg.eps_arrow(i).expect("eps arrow exists");
    if ti == i {
        maps[e] = FpMatrix::from_rows(p, &[vec![0, 0], vec![1, 0]]);
    } else {
        maps[e] = FpMatrix::from_rows(p, &[vec![1]]);
    }
    Rep {
        alg: alg.clone(),
        p,
        dims,
        maps,
    }
}

/// Pulls back a module over the path algebra kQ to Λ (ε acts by zero).
pub fn pullback_kq(alg: &Arc<BoundAlgebra>, kq_rep: &Rep) -> Result<Rep> {
    let p = kq_rep.p;
    let mut maps = Vec::new();
    for arr in &alg.quiver.arrows {
        let m = match arr.kind {
            ArrowKind::Base(k) => {
                let src_arr = kq_rep
                    .alg
                    .quiver
                    .arrows
                    .iter()
                    .position(|b| b.kind == ArrowKind::Base(k))
                    .ok_or(Error::AlgebraMismatch)?;
                kq_rep.maps[src_arr].clone()
            }
            ArrowKind::Eps(_) => FpMatrix::zeros(p, kq_rep.dims[arr.tgt], kq_rep.dims[arr.src]),
        };
        maps.push(m);
    }
    Rep::new(alg.clone(), p, kq_rep.dims.clone(), maps)
}

/// A module with all ε-arrows zero and the given maps on the arrows of Q.
pub fn kq_module(
    alg: &Arc<BoundAlgebra>,
    p: u64,
    dims: &[usize],
    base_maps: &[(usize, FpMatrix)],
) -> Rep {
    let mut maps: Vec<FpMatrix> = alg
        .quiver
        .arrows
        .iter()
        .map(|a| FpMatrix::zeros(p, dims[a.tgt], dims[a.src]))
        .collect();
    for (a, m) in base_maps {
        maps[*a] = m.clone();
    }
    Rep {
        alg: alg.clone(),
        p,
        dims: dims.to_vec(),
        maps,
    }
}

fn same_algebra(m: &Rep, n: &Rep) -> Result<()> {
    if !Arc::ptr_eq(&m.alg, &n.alg) || m.p != n.p {
        Err(Error::AlgebraMismatch)
    } else {
        Ok(())
    }
}

/// Linear system whose kernel is Hom(M, N); unknowns are the f_v, row-major.
fn hom_system(m: &Rep, n: &Rep) -> (FpMatrix, Vec<usize>) {
    let p = m.p;
    let nv = m.dims.len();
    let mut off = vec![0; nv + 1];
    for v in 0..nv {
        off[v + 1] = off[v] + n.dims[v] * m.dims[v];
    }
    let unknowns = off[nv];
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (a, arr) in m.alg.quiver.arrows.iter().enumerate() {
        let (s, t) = (arr.src, arr.tgt);
        let (ma, na) = (&m.maps[a], &n.maps[a]);
        for r in 0..n.dims[t] {
            for c in 0..m.dims[s] {
                let mut row = vec![0u64; unknowns];
                // (N(a) f_s)[r][c] = Σ_k N(a)[r][k] f_s[k][c]
                for k in 0..n.dims[s] {
                    let x = na.get(r, k);
                    if x != 0 {
                        let idx = off[s] + k * m.dims[s] + c;
                        row[idx] = (row[idx] + x) % p;
                    }
                }
                // (f_t M(a))[r][c] = Σ_k f_t[r][k] M(a)[k][c]
                for k in 0..m.dims[t] {
                    let x = ma.get(k, c);
                    if x != 0 {
                        let idx = off[t] + r * m.dims[t] + k;
                        row[idx] = sub_mod(row[idx], x, p);
                    }
                }
                if row.iter().any(|&x| x != 0) {
                    rows.push(row);
                }
            }
        }
    }
    (FpMatrix::from_row_vecs(p, unknowns, &rows), off)
}

fn unflatten(m: &Rep, n: &Rep, off: &[usize], v: &[u64]) -> Vec<FpMatrix> {
    (0..m.dims.len())
        .map(|i| FpMatrix {
            p: m.p,
            rows: n.dims[i],
            cols: m.dims[i],
            data: v[off[i]..off[i + 1]].to_vec(),
        })
        .collect()
}

fn flatten(f: &[FpMatrix]) -> Vec<u64> {
    f.iter().flat_map(|m| m.data.iter().copied()).collect()
}

pub fn hom_space(m: &Rep, n: &Rep) -> Result<HomSpace> {
    same_algebra(m, n)?;
    let (sys, off) = hom_system(m, n);
    let ker = sys.kernel_basis();
    Ok(HomSpace {
        basis: ker
            .vectors()
            .iter()
            .map(|v| unflatten(m, n, &off, v))
            .collect(),
    })
}

pub fn hom_dim(m: &Rep, n: &Rep) -> usize {
    let (sys, _) = hom_system(m, n);
    sys.cols - sys.rank()
}

pub fn end_dim(m: &Rep) -> usize {
    hom_dim(m, m)
}

fn is_iso_map(f: &[FpMatrix]) -> bool {
    f.iter().all(|x| x.is_invertible())
}

fn is_injective_map(f: &[FpMatrix]) -> bool {
    f.iter().all(|x| x.rank() == x.cols)
}

fn is_surjective_map(f: &[FpMatrix]) -> bool {
    f.iter().all(|x| x.rank() == x.rows)
}

/// Searches the Hom space for an element satisfying `pred`: random draws first, then an
/// exhaustive sweep when the space is small enough.
fn search_hom<F: Fn(&[FpMatrix]) -> bool>(
    p: u64,
    hom: &HomSpace,
    cap: usize,
    pred: F,
) -> Result<Option<Vec<FpMatrix>>> {
    let d = hom.dim();
    if d == 0 {
        return Ok(None);
    }
    let size = enum_size(p, d);
    let small = size.is_some_and(|s| s <= 4096);
    if !small {
        let mut rng = crate::seeded_rng(0x5eed ^ d as u64);
        for _ in 0..2048 {
            let coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..p)).collect();
            let f = lin_comb(p, &hom.basis, &coeffs);
            if pred(&f) {
                return Ok(Some(f));
            }
        }
        if d > cap || size.is_none_or(|s| s > ENUMERATION_LIMIT) {
            return Err(cap_err("hom_dim", d, cap));
        }
    }
    for idx in 1..size.unwrap() {
        let f = lin_comb(p, &hom.basis, &digits(idx, p, d));
        if pred(&f) {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Cheap isomorphism invariants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub dims: Vec<usize>,
    pub arrow_ranks: Vec<usize>,
    pub end_dim: usize,
    pub probes: Vec<usize>,
}

pub fn probe_modules(alg: &Arc<BoundAlgebra>, p: u64) -> Vec<Rep> {
    let mut out: Vec<Rep> = (0..alg.n()).map(|i| make_simple(alg, p, i)).collect();
    if alg.iq.is_some() && alg.eps_arrow(0).is_some() {
        out.extend((0..alg.n()).map(|i| make_generalized_simple(alg, p, i)));
    }
    out
}

pub fn fingerprint(m: &Rep, probes: &[Rep]) -> Fingerprint {
    let mut pr = Vec::with_capacity(2 * probes.len());
    for x in probes {
        pr.push(hom_dim(x, m));
        pr.push(hom_dim(m, x));
    }
    Fingerprint {
        dims: m.dims.clone(),
        arrow_ranks: m.maps.iter().map(|x| x.rank()).collect(),
        end_dim: end_dim(m),
        probes: pr,
    }
}

pub fn iso_test(m: &Rep, n: &Rep) -> Result<bool> {
    iso_test_capped(m, n, DEFAULT_HOM_CAP)
}

pub fn iso_test_capped(m: &Rep, n: &Rep, cap: usize) -> Result<bool> {
    same_algebra(m, n)?;
    if m.dims != n.dims {
        return Ok(false);
    }
    if m.maps
        .iter()
        .zip(&n.maps)
        .any(|(a, b)| a.rank() != b.rank())
    {
        return Ok(false);
    }
    let hom = hom_space(m, n)?;
    if hom.dim() != end_dim(m) || hom.dim() != end_dim(n) {
        return Ok(false);
    }
    Ok(search_hom(m.p, &hom, cap, is_iso_map)?.is_some())
}

/// |Aut M| by enumerating End(M).
pub fn aut_count(m: &Rep, cap: usize) -> Result<u64> {
    let end = hom_space(m, m)?;
    let d = end.dim();
    if d > cap {
        return Err(cap_err("end_dim", d, cap));
    }
    let size = enum_size(m.p, d)
        .filter(|&s| s <= ENUMERATION_LIMIT)
        .ok_or_else(|| cap_err("end_dim", d, cap))?;
    if d == 0 {
        return Ok(1);
    }
    let mut count = 0;
    for idx in 0..size {
        if is_iso_map(&lin_comb(m.p, &end.basis, &digits(idx, m.p, d))) {
            count += 1;
        }
    }
    Ok(count)
}

impl Rep {
    /// The submodule generated by the given homogeneous vectors `(vertex, vector)` together with `base`.
    pub fn closure(&self, base: Option<&SubRep>, gens: &[(usize, Vec<u64>)]) -> SubRep {
        let n = self.dims.len();
        let mut vecs: Vec<Vec<Vec<u64>>> = match base {
            Some(b) => b.spaces.iter().map(|s| s.vectors()).collect(),
            None => vec![vec![]; n],
        };
        let mut spaces: Vec<Subspace> = (0..n)
            .map(|v| Subspace::from_vectors(self.p, self.dims[v], &vecs[v]))
            .collect();
        let mut queue: VecDeque<(usize, Vec<u64>)> = VecDeque::new();
        for (v, x) in gens {
            if !spaces[*v].contains_vec(x) {
                vecs[*v].push(x.clone());
                spaces[*v] = Subspace::from_vectors(self.p, self.dims[*v], &vecs[*v]);
                queue.push_back((*v, x.clone()));
            }
        }
        while let Some((v, x)) = queue.pop_front() {
            for (a, arr) in self.alg.quiver.arrows.iter().enumerate() {
                if arr.src != v || self.dims[arr.tgt] == 0 {
                    continue;
                }
                let y = self.maps[a].apply(&x);
                let t = arr.tgt;
                if !spaces[t].contains_vec(&y) {
                    vecs[t].push(y.clone());
                    spaces[t] = Subspace::from_vectors(self.p, self.dims[t], &vecs[t]);
                    queue.push_back((t, y));
                }
            }
        }
        SubRep { spaces }
    }

    pub fn is_submodule(&self, s: &SubRep) -> bool {
        self.alg.quiver.arrows.iter().enumerate().all(|(a, arr)| {
            s.spaces[arr.src]
                .vectors()
                .iter()
                .all(|x| s.spaces[arr.tgt].contains_vec(&self.maps[a].apply(x)))
        })
    }

    /// The submodule as a module in its own right, in the RREF bases of its subspaces.
    pub fn sub_rep(&self, s: &SubRep) -> Rep {
        let dims = s.dims();
        let maps = self
            .alg
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, arr)| {
                let mut m = FpMatrix::zeros(self.p, dims[arr.tgt], dims[arr.src]);
                for (c, x) in s.spaces[arr.src].vectors().iter().enumerate() {
                    let y = self.maps[a].apply(x);
                    let co = s.spaces[arr.tgt]
                        .coords(&y)
                        .expect("submodule is closed under arrows");
                    for (r, val) in co.into_iter().enumerate() {
                        m.set(r, c, val);
                    }
                }
                m
            })
            .collect();
        Rep {
            alg: self.alg.clone(),
            p: self.p,
            dims,
            maps,
        }
    }

    /// M/U with basis the unit vectors at the non-pivot coordinates of each U_v.
    pub fn quotient(&self, s: &SubRep) -> Rep {
        let free: Vec<Vec<usize>> = s.spaces.iter().map(|sp| sp.free_coords()).collect();
        let dims: Vec<usize> = free.iter().map(|f| f.len()).collect();
        let maps = self
            .alg
            .quiver
            .arrows
            .iter()
            .enumerate()
            .map(|(a, arr)| {
                let mut m = FpMatrix::zeros(self.p, dims[arr.tgt], dims[arr.src]);
                for (c, &fc) in free[arr.src].iter().enumerate() {
                    let y = self.maps[a].col(fc);
                    let red = s.spaces[arr.tgt].reduce(&y);
                    for (r, &fr) in free[arr.tgt].iter().enumerate() {
                        m.set(r, c, red[fr]);
                    }
                }
                m
            })
            .collect();
        Rep {
            alg: self.alg.clone(),
            p: self.p,
            dims,
            maps,
        }
    }

    /// Image of a module map `f: self → target` as a submodule of `target`.
    pub fn image_of(&self, target: &Rep, f: &[FpMatrix]) -> SubRep {
        SubRep {
            spaces: f
                .iter()
                .enumerate()
                .map(|(v, m)| {
                    if target.dims[v] == 0 {
                        Subspace::zero(self.p, 0)
                    } else {
                        m.image_basis()
                    }
                })
                .collect(),
        }
    }

    pub fn kernel_of(&self, f: &[FpMatrix]) -> SubRep {
        SubRep {
            spaces: f
                .iter()
                .enumerate()
                .map(|(v, m)| {
                    if m.rows == 0 {
                        Subspace::full(self.p, self.dims[v])
                    } else {
                        m.kernel_basis()
                    }
                })
                .collect(),
        }
    }

    pub fn zero_sub(&self) -> SubRep {
        SubRep {
            spaces: self
                .dims
                .iter()
                .map(|&d| Subspace::zero(self.p, d))
                .collect(),
        }
    }

    /// Radical Σ_a im(a) as a submodule.
    pub fn radical(&self) -> SubRep {
        let n = self.dims.len();
        let mut vecs: Vec<Vec<Vec<u64>>> = vec![vec![]; n];
        for (a, arr) in self.alg.quiver.arrows.iter().enumerate() {
            if self.dims[arr.tgt] > 0 {
                vecs[arr.tgt].extend(self.maps[a].image_basis().vectors());
            }
        }
        SubRep {
            spaces: (0..n)
                .map(|v| Subspace::from_vectors(self.p, self.dims[v], &vecs[v]))
                .collect(),
        }
    }
}

/// Projective cover P₀ → M (generators lifted from a complement of the radical) with its kernel Ω.
pub fn presentation(m: &Rep) -> Result<Presentation> {
    let alg = &m.alg;
    let p = m.p;
    let rad = m.radical();
    let mut gens: Vec<(usize, usize)> = Vec::new();
    for v in 0..alg.n() {
        for c in rad.spaces[v].free_coords() {
            gens.push((v, c));
        }
    }
    let mut parts = Vec::new();
    let mut pi: Vec<FpMatrix> = (0..alg.n())
        .map(|w| FpMatrix::zeros(p, m.dims[w], 0))
        .collect();
    for &(v, c) in &gens {
        let proj = regular_projective(alg, p, v);
        let mut cols: Vec<FpMatrix> = (0..alg.n())
            .map(|w| FpMatrix::zeros(p, m.dims[w], proj.dims[w]))
            .collect();
        let mut pos = vec![0usize; alg.n()];
        let mut unit = vec![0u64; m.dims[v]];
        unit[c] = 1;
        for path in alg.basis.iter().filter(|b| b.src == v) {
            let img = m.path_matrix(v, &path.arrows).apply(&unit);
            let w = path.tgt;
            for (r, val) in img.into_iter().enumerate() {
                cols[w].set(r, pos[w], val);
            }
            pos[w] += 1;
        }
        for w in 0..alg.n() {
            pi[w] = pi[w].hstack(&cols[w]);
        }
        parts.push(proj);
    }
    let p0 = Rep::direct_sum_all(alg, p, &parts);
    for (w, piw) in pi.iter().enumerate() {
        if piw.rows > 0 && piw.rank() != piw.rows {
            return Err(Error::PresentationFailure(format!(
                "cover not onto at vertex {w}"
            )));
        }
    }
    let omega = p0.kernel_of(&pi);
    let omega_rep = p0.sub_rep(&omega);
    Ok(Presentation {
        p0,
        pi,
        omega,
        omega_rep,
    })
}

/// Restriction Hom(P₀, N) → Hom(Ω, N) and Hom(Ω, N) itself, flattened.
struct ExtSetup {
    pres: Presentation,
    hom_omega: HomSpace,
    restricted: Subspace,
    complement: Vec<Vec<u64>>,
    hom_mn: usize,
}

fn ext_setup(m: &Rep, n: &Rep) -> Result<ExtSetup> {
    same_algebra(m, n)?;
    let pres = presentation(m)?;
    let hom_omega = hom_space(&pres.omega_rep, n)?;
    let hom_p0 = hom_space(&pres.p0, n)?;
    let width: usize = (0..m.dims.len())
        .map(|v| n.dims[v] * pres.omega_rep.dims[v])
        .sum();
    let incl: Vec<FpMatrix> = pres
        .omega
        .spaces
        .iter()
        .map(|s| s.basis.transpose())
        .collect();
    let restricted_vecs: Vec<Vec<u64>> = hom_p0
        .basis
        .iter()
        .map(|g| {
            let f: Vec<FpMatrix> = g
                .iter()
                .zip(&incl)
                .map(|(gv, iv)| {
                    if gv.rows == 0 || iv.cols == 0 {
                        FpMatrix::zeros(m.p, gv.rows, iv.cols)
                    } else {
                        gv.dot(iv)
                    }
                })
                .collect();
            flatten(&f)
        })
        .collect();
    let restricted = Subspace::from_vectors(m.p, width, &restricted_vecs);
    let mut span = restricted.clone();
    let mut complement = Vec::new();
    for h in &hom_omega.basis {
        let v = flatten(h);
        if !span.contains_vec(&v) {
            complement.push(v);
            span =
                Subspace::from_vectors(m.p, width, &[span.vectors(), complement.clone()].concat());
        }
    }
    let hom_mn = hom_dim(m, n);
    Ok(ExtSetup {
        pres,
        hom_omega,
        restricted,
        complement,
        hom_mn,
    })
}

pub fn ext1_dim(m: &Rep, n: &Rep) -> Result<usize> {
    let s = ext_setup(m, n)?;
    Ok(s.hom_omega.dim() - s.restricted.dim())
}

pub fn ext2_dim(m: &Rep, n: &Rep) -> Result<usize> {
    let pres = presentation(m)?;
    ext1_dim(&pres.omega_rep, n)
}

/// Middle term of the extension of M by N given by the cocycle ξ ∈ Hom(Ω, N).
fn middle_term(pres: &Presentation, n: &Rep, xi: &[FpMatrix]) -> Rep {
    let p = n.p;
    let amb = pres.p0.direct_sum(n);
    let spaces = (0..n.dims.len())
        .map(|v| {
            let od = pres.omega_rep.dims[v];
            let total = pres.p0.dims[v] + n.dims[v];
            let rows: Vec<Vec<u64>> = pres.omega.spaces[v]
                .vectors()
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let mut row: Vec<u64> = x.iter().map(|&t| sub_mod(0, t, p)).collect();
                    let mut unit = vec![0u64; od];
                    unit[k] = 1;
                    row.extend(if n.dims[v] == 0 {
                        vec![]
                    } else {
                        xi[v].apply(&unit)
                    });
                    row
                })
                .collect();
            Subspace::from_vectors(p, total, &rows)
        })
        .collect();
    amb.quotient(&SubRep { spaces })
}

/// All middle terms of Ext¹(M, N) up to the scalar action, with class counts summing to q^{dim Ext¹}.
pub fn ext1_middle_terms(m: &Rep, n: &Rep, ext_cap: usize) -> Result<ExtData> {
    let s = ext_setup(m, n)?;
    let e = s.complement.len();
    if e > ext_cap {
        return Err(cap_err("ext_dim", e, ext_cap));
    }
    let p = m.p;
    let mut terms = vec![(m.direct_sum(n), 1u64)];
    let total = enum_size(p, e)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or_else(|| cap_err("ext_dim", e, ext_cap))?;
    let width = s.complement.first().map_or(0, |c| c.len());
    let (_, off) = hom_system(&s.pres.omega_rep, n);
    for idx in 1..total {
        let c = digits(idx, p, e);
        // one representative per line: leading (highest) nonzero digit equal to 1
        if *c.iter().rev().find(|&&x| x != 0).unwrap() != 1 {
            continue;
        }
        let mut v = vec![0u64; width];
        for (ci, basis_vec) in c.iter().zip(&s.complement) {
            if *ci == 0 {
                continue;
            }
            for (t, &b) in v.iter_mut().zip(basis_vec) {
                *t = (*t + mul_mod(*ci, b, p)) % p;
            }
        }
        let xi = unflatten(&s.pres.omega_rep, n, &off, &v);
        terms.push((middle_term(&s.pres, n, &xi), p - 1));
    }
    Ok(ExtData {
        hom_dim: s.hom_mn,
        ext_dim: e,
        terms,
    })
}

pub fn ext1_classify(m: &Rep, n: &Rep, reg: &Registry) -> Result<ExtClassification> {
    let data = ext1_middle_terms(m, n, reg.caps.ext_dim)?;
    let mut counts: BTreeMap<ModuleId, u64> = BTreeMap::new();
    for (l, c) in &data.terms {
        *counts.entry(reg.intern(l)?).or_insert(0) += c;
    }
    Ok(ExtClassification {
        classes: counts.into_iter().collect(),
        hom_dim: data.hom_dim,
        ext_dim: data.ext_dim,
    })
}

/// ⟨M, N⟩ = dim Hom − dim Ext¹, defined when one argument has finite projective dimension.
pub fn euler_lambda(m: &Rep, n: &Rep) -> Result<i64> {
    if !m.is_p_leq1() && !n.is_p_leq1() {
        return Err(Error::NotFiniteDimensionHomological);
    }
    Ok(hom_dim(m, n) as i64 - ext1_dim(m, n)? as i64)
}

/// All submodules, found by closing generated subspaces breadth-first.
pub fn submodules(m: &Rep, max_count: usize) -> Result<Vec<SubRep>> {
    let p = m.p;
    let start = m.zero_sub();
    let mut seen: HashSet<SubRep> = HashSet::new();
    seen.insert(start.clone());
    let mut out = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in 0..m.dims.len() {
            let free = u.spaces[v].free_coords();
            let f = free.len();
            let Some(total) = enum_size(p, f) else {
                return Err(Error::BudgetExceeded(max_count));
            };
            for idx in 1..total {
                let c = digits(idx, p, f);
                if *c.iter().rev().find(|&&x| x != 0).unwrap() != 1 {
                    continue;
                }
                let mut x = vec![0u64; m.dims[v]];
                for (k, &fc) in free.iter().enumerate() {
                    x[fc] = c[k];
                }
                let w = m.closure(Some(&u), &[(v, x)]);
                if seen.insert(w.clone()) {
                    if out.len() >= max_count {
                        return Err(Error::BudgetExceeded(max_count));
                    }
                    out.push(w.clone());
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(out)
}

/// Number of submodules U ≅ `sub` with M/U ≅ `quot`.
pub fn submodule_count_with(m: &Rep, sub: &Rep, quot: &Rep, budget: usize) -> Result<u64> {
    let mut count = 0;
    for u in submodules(m, budget)? {
        if u.dims() != sub.dims {
            continue;
        }
        if iso_test(&m.sub_rep(&u), sub)? && iso_test(&m.quotient(&u), quot)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Splits M = im f^N ⊕ ker f^N for an endomorphism f that is neither nilpotent nor invertible.
pub fn split_once(m: &Rep, end_cap: usize) -> Result<Option<(SubRep, SubRep)>> {
    let end = hom_space(m, m)?;
    if end.dim() <= 1 || m.is_zero() {
        return Ok(None);
    }
    let n = m.total_dim();
    let splits = |f: &[FpMatrix]| {
        let fn_: Vec<FpMatrix> = f.iter().map(|x| x.pow(n)).collect();
        let r: usize = fn_.iter().map(|x| x.rank()).sum();
        r > 0 && r < n
    };
    let Some(f) = search_hom(m.p, &end, end_cap, splits)? else {
        return Ok(None);
    };
    let fn_: Vec<FpMatrix> = f.iter().map(|x| x.pow(n)).collect();
    Ok(Some((m.image_of(m, &fn_), m.kernel_of(&fn_))))
}

/// Krull–Schmidt decomposition into indecomposable summands.
pub fn decompose(m: &Rep, end_cap: usize) -> Result<Vec<Rep>> {
    let mut stack = vec![m.clone()];
    let mut out = Vec::new();
    while let Some(x) = stack.pop() {
        if x.is_zero() {
            continue;
        }
        match split_once(&x, end_cap)? {
            Some((a, b)) => {
                stack.push(x.sub_rep(&b));
                stack.push(x.sub_rep(&a));
            }
            None => out.push(x),
        }
    }
    Ok(out)
}

pub fn is_indecomposable(m: &Rep, end_cap: usize) -> Result<bool> {
    Ok(!m.is_zero() && split_once(m, end_cap)?.is_none())
}

/// Peels submodules isomorphic to generalized simples; returns multiplicities per vertex.
pub fn torus_class(k: &Rep) -> Result<Vec<i64>> {
    torus_class_ordered(k, &(0..k.alg.n()).collect::<Vec<_>>())
}

pub fn torus_class_ordered(k: &Rep, order: &[usize]) -> Result<Vec<i64>> {
    let alg = k.alg.clone();
    let p = k.p;
    let gens: Vec<Rep> = (0..alg.n())
        .map(|j| make_generalized_simple(&alg, p, j))
        .collect();
    let mut alpha = vec![0i64; alg.n()];
    let mut cur = k.clone();
    while !cur.is_zero() {
        let mut peeled = false;
        for &j in order {
            let hom = hom_space(&gens[j], &cur)?;
            if let Some(f) = search_hom(p, &hom, DEFAULT_HOM_CAP.max(hom.dim()), is_injective_map)?
            {
                let img = gens[j].image_of(&cur, &f);
                cur = cur.quotient(&img);
                alpha[j] += 1;
                peeled = true;
                break;
            }
        }
        if !peeled {
            return Err(Error::PeelStuck);
        }
    }
    Ok(alpha)
}

/// A submodule of `m` isomorphic to some E_j, if any.
pub fn find_e_submodule(m: &Rep) -> Result<Option<(usize, SubRep)>> {
    let alg = &m.alg;
    for j in 0..alg.n() {
        let e = make_generalized_simple(alg, m.p, j);
        let hom = hom_space(&e, m)?;
        if let Some(f) = search_hom(m.p, &hom, DEFAULT_HOM_CAP.max(hom.dim()), is_injective_map)? {
            return Ok(Some((j, e.image_of(m, &f))));
        }
    }
    Ok(None)
}

/// A surjection from `m` onto some E_j, as its kernel.
pub fn find_e_quotient(m: &Rep) -> Result<Option<(usize, SubRep)>> {
    let alg = &m.alg;
    for j in 0..alg.n() {
        let e = make_generalized_simple(alg, m.p, j);
        let hom = hom_space(m, &e)?;
        if let Some(f) = search_hom(m.p, &hom, DEFAULT_HOM_CAP.max(hom.dim()), is_surjective_map)? {
            return Ok(Some((j, m.kernel_of(&f))));
        }
    }
    Ok(None)
}

/// Iso-class registry: fingerprints filter, an invertible intertwiner decides.
pub struct Registry {
    pub alg: Arc<BoundAlgebra>,
    pub p: u64,
    pub caps: Caps,
    probes: Vec<Rep>,
    inner: RwLock<RegistryInner>,
}

#[derive(Default)]
struct RegistryInner {
    reps: Vec<Rep>,
    buckets: HashMap<Fingerprint, Vec<u32>>,
}

impl Registry {
    pub fn new(alg: &Arc<BoundAlgebra>, p: u64, caps: Caps) -> Registry {
        Registry {
            alg: alg.clone(),
            p,
            caps,
            probes: probe_modules(alg, p),
            inner: RwLock::new(RegistryInner::default()),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: ModuleId) -> Rep {
        self.inner.read().unwrap().reps[id.0 as usize].clone()
    }

    pub fn all(&self) -> Vec<Rep> {
        self.inner.read().unwrap().reps.clone()
    }

    pub fn lookup(&self, m: &Rep) -> Result<Option<ModuleId>> {
        let fp = fingerprint(m, &self.probes);
        let inner = self.inner.read().unwrap();
        self.find(&inner, &fp, m)
    }

    fn find(&self, inner: &RegistryInner, fp: &Fingerprint, m: &Rep) -> Result<Option<ModuleId>> {
        if let Some(ids) = inner.buckets.get(fp) {
            for &id in ids {
                if iso_test_capped(&inner.reps[id as usize], m, self.caps.hom_dim)? {
                    return Ok(Some(ModuleId(id)));
                }
            }
        }
        Ok(None)
    }

    /// Id of the iso class of `m`, inserting it if unseen.
    pub fn intern(&self, m: &Rep) -> Result<ModuleId> {
        same_algebra(
            m,
            &self
                .probes
                .first()
                .cloned()
                .unwrap_or_else(|| Rep::zero(&self.alg, self.p)),
        )?;
        let fp = fingerprint(m, &self.probes);
        if let Some(id) = self.find(&self.inner.read().unwrap(), &fp, m)? {
            return Ok(id);
        }
        let mut inner = self.inner.write().unwrap();
        if let Some(id) = self.find(&inner, &fp, m)? {
            return Ok(id);
        }
        let id = inner.reps.len() as u32;
        inner.reps.push(m.clone());
        inner.buckets.entry(fp).or_default().push(id);
        Ok(ModuleId(id))
    }

    pub fn decompose_ids(&self, m: &Rep) -> Result<Vec<ModuleId>> {
        let mut ids: Vec<ModuleId> = decompose(m, self.caps.end_dim)?
            .iter()
            .map(|x| self.intern(x))
            .collect::<Result<_>>()?;
        ids.sort();
        Ok(ids)
    }
}

/// A random module of total dimension at most `max_dim`, built as a quotient of a projective.
pub fn random_module<R: Rng>(alg: &Arc<BoundAlgebra>, p: u64, rng: &mut R, max_dim: usize) -> Rep {
    loop {
        let n = alg.n();
        let k = rng.gen_range(1..=2.min(max_dim.max(1)));
        let parts: Vec<Rep> = (0..k)
            .map(|_| regular_projective(alg, p, rng.gen_range(0..n)))
            .collect();
        let proj = Rep::direct_sum_all(alg, p, &parts);
        let g = rng.gen_range(0..=3);
        let mut gens = Vec::new();
        for _ in 0..g {
            let v = rng.gen_range(0..n);
            if proj.dims[v] > 0 {
                gens.push((v, (0..proj.dims[v]).map(|_| rng.gen_range(0..p)).collect()));
            }
        }
        let sub = proj.closure(None, &gens);
        let m = proj.quotient(&sub);
        if m.total_dim() <= max_dim {
            return m;
        }
    }
}

/// All modules with the given dimension vector (every choice of matrices satisfying the relations).
pub fn enumerate_reps(
    alg: &Arc<BoundAlgebra>,
    p: u64,
    dims: &[usize],
    budget: u64,
) -> Result<Vec<Rep>> {
    let arrows = &alg.quiver.arrows;
    let sizes: Vec<usize> = arrows.iter().map(|a| dims[a.tgt] * dims[a.src]).collect();
    let entries: usize = sizes.iter().sum();
    let total = enum_size(p, entries)
        .filter(|&t| t <= budget)
        .ok_or(Error::BudgetExceeded(budget as usize))?;
    let mut out = Vec::new();
    for idx in 0..total {
        let d = digits(idx, p, entries);
        let mut pos = 0;
        let maps: Vec<FpMatrix> = arrows
            .iter()
            .zip(&sizes)
            .map(|(a, &s)| {
                let m = FpMatrix {
                    p,
                    rows: dims[a.tgt],
                    cols: dims[a.src],
                    data: d[pos..pos + s].to_vec(),
                };
                pos += s;
                m
            })
            .collect();
        let r = Rep {
            alg: alg.clone(),
            p,
            dims: dims.to_vec(),
            maps,
        };
        if r.violated_relation().is_none() {
            out.push(r);
        }
    }
    Ok(out)
}

/// Number of invertible n×n matrices over F_q.
pub fn gl_order(q: u64, n: u32) -> u64 {
    (0..n).map(|k| q.pow(n) - q.pow(k)).product()
}
