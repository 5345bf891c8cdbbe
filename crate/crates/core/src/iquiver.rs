//! Quivers with involution, their Euler and Cartan data, Dynkin recognition and positive roots,
//! the double framed quiver and the enriched bound quiver (Q̄, Ī).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RawArrow {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// Quiver description as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct RawQuiver {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<RawArrow>,
    #[serde(default)]
    pub tau: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub itau_reps: Option<Vec<String>>,
}

impl RawQuiver {
    pub fn from_json_str(s: &str) -> Result<RawQuiver> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("quiver JSON: {e}")))
    }

    /// Convenience constructor from `(id, src, tgt)` triples and τ-pairs.
    pub fn build(
        vertices: &[&str],
        arrows: &[(&str, &str, &str)],
        tau_pairs: &[(&str, &str)],
    ) -> RawQuiver {
        let tau = if tau_pairs.is_empty() {
            None
        } else {
            let mut m: BTreeMap<String, String> = vertices
                .iter()
                .map(|v| (v.to_string(), v.to_string()))
                .collect();
            for (a, b) in tau_pairs {
                m.insert(a.to_string(), b.to_string());
                m.insert(b.to_string(), a.to_string());
            }
            Some(m)
        };
        RawQuiver {
            vertices: vertices.iter().map(|s| s.to_string()).collect(),
            arrows: arrows
                .iter()
                .map(|(i, s, t)| RawArrow {
                    id: i.to_string(),
                    src: s.to_string(),
                    tgt: t.to_string(),
                })
                .collect(),
            tau,
            itau_reps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arrow {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

/// A validated acyclic quiver with an involution τ on vertices and arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IQuiver {
    pub vertices: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub tau: Vec<usize>,
    pub tau_arrow: Vec<usize>,
    pub itau_reps: Vec<usize>,
}

pub fn validate_iquiver(raw: &RawQuiver) -> Result<IQuiver> {
    let mut names = raw.vertices.clone();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Input("duplicate vertex id".into()));
    }
    if names.is_empty() {
        return Err(Error::Input("quiver has no vertices".into()));
    }
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let vid = |s: &str| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown vertex '{s}'")))
    };
    let mut arrows = Vec::new();
    for a in &raw.arrows {
        arrows.push(Arrow {
            id: a.id.clone(),
            src: vid(&a.src)?,
            tgt: vid(&a.tgt)?,
        });
    }
    arrows.sort_by(|a, b| a.id.cmp(&b.id));
    if arrows.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::Input("duplicate arrow id".into()));
    }
    let n = names.len();
    if topo_order(n, &arrows).is_none() {
        return Err(Error::Cyclic);
    }
    let mut tau: Vec<usize> = (0..n).collect();
    if let Some(map) = &raw.tau {
        for (k, v) in map {
            tau[vid(k)?] = vid(v)?;
        }
    }
    for i in 0..n {
        if tau[tau[i]] != i {
            return Err(Error::NotInvolution(format!(
                "{} -> {} -> {}",
                names[i], names[tau[i]], names[tau[tau[i]]]
            )));
        }
    }
    // arrows i→j are matched positionally (by id order) with arrows τi→τj
    let mut by_ends: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, a) in arrows.iter().enumerate() {
        by_ends.entry((a.src, a.tgt)).or_default().push(k);
    }
    let mut tau_arrow = vec![0; arrows.len()];
    for ((s, t), list) in &by_ends {
        let image = by_ends.get(&(tau[*s], tau[*t]));
        match image {
            Some(img) if img.len() == list.len() => {
                for (pos, &k) in list.iter().enumerate() {
                    tau_arrow[k] = img[pos];
                }
            }
            _ => return Err(Error::ArrowNotRespected(arrows[list[0]].id.clone())),
        }
    }
    let itau_reps = match &raw.itau_reps {
        Some(reps) => {
            let mut r: Vec<usize> = reps.iter().map(|s| vid(s)).collect::<Result<_>>()?;
            r.sort();
            let mut seen = BTreeSet::new();
            for &i in &r {
                if !seen.insert(i.min(tau[i])) {
                    return Err(Error::Input(
                        "itau_reps has two vertices of one orbit".into(),
                    ));
                }
            }
            if seen.len() != (0..n).filter(|&i| i <= tau[i]).count() {
                return Err(Error::Input("itau_reps misses a tau-orbit".into()));
            }
            r
        }
        None => (0..n).filter(|&i| i <= tau[i]).collect(),
    };
    Ok(IQuiver {
        vertices: names,
        arrows,
        tau,
        tau_arrow,
        itau_reps,
    })
}

fn topo_order(n: usize, arrows: &[Arrow]) -> Option<Vec<usize>> {
    let mut indeg = vec![0; n];
    for a in arrows {
        indeg[a.tgt] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for a in arrows.iter().filter(|a| a.src == v) {
            indeg[a.tgt] -= 1;
            if indeg[a.tgt] == 0 {
                queue.push_back(a.tgt);
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanData {
    pub cartan: Vec<Vec<i64>>,
    pub euler_q: Vec<Vec<i64>>,
}

impl CartanData {
    pub fn sym(&self, x: &[i64], y: &[i64]) -> i64 {
        bilinear(&self.cartan, x, y)
    }
}

fn bilinear(m: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let mut s = 0;
    for (i, xi) in x.iter().enumerate() {
        if *xi == 0 {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            s += xi * m[i][j] * yj;
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootTable {
    pub dynkin_type: Option<String>,
    pub positive_roots: Vec<Vec<usize>>,
}

impl IQuiver {
    pub fn from_raw(raw: &RawQuiver) -> Result<IQuiver> {
        validate_iquiver(raw)
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Input(format!("unknown vertex '{name}'")))
    }

    pub fn is_split(&self) -> bool {
        self.tau.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn in_itau(&self, i: usize) -> bool {
        self.itau_reps.contains(&i)
    }

    /// Representative in I_τ of the orbit of i.
    pub fn rep_of(&self, i: usize) -> usize {
        if self.in_itau(i) {
            i
        } else {
            self.tau[i]
        }
    }

    pub fn num_arrows_between(&self, i: usize, j: usize) -> i64 {
        self.arrows
            .iter()
            .filter(|a| a.src == i && a.tgt == j)
            .count() as i64
    }

    pub fn cartan_data(&self) -> CartanData {
        let n = self.n();
        let mut euler_q = vec![vec![0i64; n]; n];
        for (i, row) in euler_q.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = i64::from(i == j) - self.num_arrows_between(i, j);
            }
        }
        let cartan = (0..n)
            .map(|i| (0..n).map(|j| euler_q[i][j] + euler_q[j][i]).collect())
            .collect();
        CartanData { cartan, euler_q }
    }

    /// ⟨x, y⟩_Q = Σ x_i y_i − Σ_{α:i→j} x_i y_j.
    pub fn euler(&self, x: &[i64], y: &[i64]) -> i64 {
        let diag: i64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        diag - self.arrows.iter().map(|a| x[a.src] * y[a.tgt]).sum::<i64>()
    }

    pub fn cartan_entry(&self, i: usize, j: usize) -> i64 {
        2 * i64::from(i == j) - self.num_arrows_between(i, j) - self.num_arrows_between(j, i)
    }

    pub fn unit(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.n()];
        v[i] = 1;
        v
    }

    pub fn topo_order(&self) -> Vec<usize> {
        topo_order(self.n(), &self.arrows).expect("validated quivers are acyclic")
    }

    /// All paths of Q as arrow sequences in traversal order, trivial paths included.
    pub fn paths(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let mut out: Vec<(usize, usize, Vec<usize>)> =
            (0..self.n()).map(|i| (i, i, vec![])).collect();
        let mut frontier = out.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (s, t, p) in &frontier {
                for (k, a) in self.arrows.iter().enumerate() {
                    if a.src == *t {
                        let mut q = p.clone();
                        q.push(k);
                        next.push((*s, a.tgt, q));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn num_paths(&self) -> usize {
        self.paths().len()
    }

    /// Connected components of the underlying graph, each sorted.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            comp[s] = id;
            let mut members = vec![];
            while let Some(v) = stack.pop() {
                members.push(v);
                for a in &self.arrows {
                    for (x, y) in [(a.src, a.tgt), (a.tgt, a.src)] {
                        if x == v && comp[y] == usize::MAX {
                            comp[y] = id;
                            stack.push(y);
                        }
                    }
                }
            }
            members.sort();
            out.push(members);
        }
        out
    }

    /// Dynkin type of the underlying graph, e.g. "A_3" or "A_1+A_1"; `None` if not ADE.
    pub fn dynkin_type(&self) -> Option<String> {
        let mut parts = Vec::new();
        for comp in self.components() {
            parts.push(classify_component(self, &comp)?);
        }
        parts.sort();
        Some(parts.join("+"))
    }

    pub fn root_table(&self) -> Result<RootTable> {
        root_table(self)
    }

    pub fn to_json(&self) -> Value {
        let tau: serde_json::Map<String, Value> = (0..self.n())
            .map(|i| {
                (
                    self.vertices[i].clone(),
                    Value::String(self.vertices[self.tau[i]].clone()),
                )
            })
            .collect();
        json!({
            "vertices": self.vertices,
            "arrows": self.arrows.iter().map(|a| json!({
                "id": a.id, "src": self.vertices[a.src], "tgt": self.vertices[a.tgt]
            })).collect::<Vec<_>>(),
            "tau": tau,
            "itau_reps": self.itau_reps.iter().map(|&i| self.vertices[i].clone()).collect::<Vec<_>>(),
        })
    }

    pub fn to_raw(&self) -> RawQuiver {
        serde_json::from_value(self.to_json()).expect("own JSON is well formed")
    }

    /// The full subquiver on a τ-stable vertex subset.
    pub fn full_subquiver(&self, keep: &[usize]) -> Result<IQuiver> {
        let set: BTreeSet<usize> = keep.iter().copied().collect();
        if set.iter().any(|&i| !set.contains(&self.tau[i])) {
            return Err(Error::Input("vertex subset is not tau-stable".into()));
        }
        let mut raw = self.to_raw();
        raw.vertices
            .retain(|v| set.contains(&self.vertex(v).unwrap()));
        raw.arrows
            .retain(|a| raw.vertices.contains(&a.src) && raw.vertices.contains(&a.tgt));
        if let Some(t) = raw.tau.as_mut() {
            t.retain(|k, _| set.contains(&self.vertex(k).unwrap()));
        }
        if let Some(r) = raw.itau_reps.as_mut() {
            r.retain(|k| set.contains(&self.vertex(k).unwrap()));
        }
        validate_iquiver(&raw)
    }
}

fn classify_component(q: &IQuiver, comp: &[usize]) -> Option<String> {
    let n = comp.len();
    let mut edges = BTreeMap::new();
    for a in &q.arrows {
        if comp.contains(&a.src) {
            let key = (a.src.min(a.tgt), a.src.max(a.tgt));
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    if edges.values().any(|&m| m > 1) || edges.len() != n - 1 {
        return None;
    }
    let deg = |v: usize| edges.keys().filter(|(a, b)| *a == v || *b == v).count();
    let branch: Vec<usize> = comp.iter().copied().filter(|&v| deg(v) >= 3).collect();
    if branch.is_empty() {
        return Some(format!("A_{n}"));
    }
    if branch.len() > 1 || deg(branch[0]) > 3 {
        return None;
    }
    let c = branch[0];
    let mut arms = Vec::new();
    for &(a, b) in edges.keys() {
        let start = if a == c {
            b
        } else if b == c {
            a
        } else {
            continue;
        };
        let (mut prev, mut cur, mut len) = (c, start, 1);
        loop {
            let next: Vec<usize> = edges
                .keys()
                .filter_map(|&(x, y)| {
                    if x == cur && y != prev {
                        Some(y)
                    } else if y == cur && x != prev {
                        Some(x)
                    } else {
                        None
                    }
                })
                .collect();
            if next.is_empty() {
                break;
            }
            prev = cur;
            cur = next[0];
            len += 1;
        }
        arms.push(len);
    }
    arms.sort();
    match (arms[0], arms[1], arms[2]) {
        (1, 1, _) => Some(format!("D_{n}")),
        (1, 2, 2) => Some("E_6".into()),
        (1, 2, 3) => Some("E_7".into()),
        (1, 2, 4) => Some("E_8".into()),
        _ => None,
    }
}

/// Expected number of positive roots for a (possibly disconnected) Dynkin type string.
pub fn expected_root_count(ty: &str) -> usize {
    ty.split('+')
        .map(|t| {
            let (kind, n) = t.split_once('_').expect("type has rank");
            let n: usize = n.parse().expect("rank is numeric");
            match kind {
                "A" => n * (n + 1) / 2,
                "D" => n * (n - 1),
                "E" => match n {
                    6 => 36,
                    7 => 63,
                    _ => 120,
                },
                _ => 0,
            }
        })
        .sum()
}

/// Positive roots by closing the simple roots under simple reflections.
pub fn root_table(q: &IQuiver) -> Result<RootTable> {
    let ty = q.dynkin_type().ok_or(Error::NotDynkin)?;
    let n = q.n();
    let c = q.cartan_data().cartan;
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        let e = q.unit(i);
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(x) = queue.pop_front() {
        for i in 0..n {
            let pair: i64 = (0..n).map(|j| x[j] * c[j][i]).sum();
            let mut y = x.clone();
            y[i] -= pair;
            if y.iter().all(|&t| t >= 0) && y.iter().any(|&t| t > 0) && seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let mut roots: Vec<Vec<usize>> = seen
        .into_iter()
        .map(|r| r.into_iter().map(|t| t as usize).collect())
        .collect();
    roots.sort_by(|a, b| {
        let ha: usize = a.iter().sum();
        let hb: usize = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
    Ok(RootTable {
        dynkin_type: Some(ty),
        positive_roots: roots,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArrowKind {
    /// Arrow of Q (index into `IQuiver::arrows`).
    Base(usize),
    /// ε_i : i → τi.
    Eps(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BArrow {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
    pub kind: ArrowKind,
}

/// A relation Σ c·path with paths stored in traversal order (first arrow first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub terms: Vec<(i64, Vec<usize>)>,
}

/// A quiver with relations; for an ıquiver this is (Q̄, Ī).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnrichedQuiver {
    pub vertices: Vec<String>,
    pub arrows: Vec<BArrow>,
    pub relations: Vec<Relation>,
}

impl EnrichedQuiver {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_by_name(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    /// Relation written right-to-left, e.g. `eps_2*a - a*eps_1`.
    pub fn relation_string(&self, r: &Relation) -> String {
        let mut s = String::new();
        for (k, (c, path)) in r.terms.iter().enumerate() {
            let word: Vec<&str> = path
                .iter()
                .rev()
                .map(|&a| self.arrows[a].name.as_str())
                .collect();
            let sign = if *c < 0 {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = if c.abs() == 1 {
                String::new()
            } else {
                format!("{}", c.abs())
            };
            if k > 0 {
                s.push(' ');
            }
            s.push_str(sign);
            if k > 0 {
                s.push(' ');
            }
            s.push_str(&mag);
            s.push_str(&word.join("*"));
        }
        s
    }

    /// Vertex-name/arrow-name/relation-string triple used for structural comparison.
    pub fn canonical_form(
        &self,
    ) -> (
        BTreeSet<String>,
        BTreeSet<(String, String, String)>,
        BTreeSet<BTreeSet<(i64, Vec<String>)>>,
    ) {
        let verts = self.vertices.iter().cloned().collect();
        let arrows = self
            .arrows
            .iter()
            .map(|a| {
                (
                    a.name.clone(),
                    self.vertices[a.src].clone(),
                    self.vertices[a.tgt].clone(),
                )
            })
            .collect();
        let rels = self
            .relations
            .iter()
            .map(|r| {
                let mut terms: BTreeSet<(i64, Vec<String>)> = r
                    .terms
                    .iter()
                    .map(|(c, p)| (*c, p.iter().map(|&a| self.arrows[a].name.clone()).collect()))
                    .collect();
                // a relation and its negative generate the same ideal
                if terms.iter().next().map(|t| t.0 < 0).unwrap_or(false) {
                    terms = terms.into_iter().map(|(c, p)| (-c, p)).collect();
                }
                terms
            })
            .collect();
        (verts, arrows, rels)
    }

    /// Renames vertices and arrows through the given maps (names not listed stay).
    pub fn renamed(
        &self,
        vmap: &BTreeMap<String, String>,
        amap: &BTreeMap<String, String>,
    ) -> EnrichedQuiver {
        let mut e = self.clone();
        for v in e.vertices.iter_mut() {
            if let Some(n) = vmap.get(v) {
                *v = n.clone();
            }
        }
        for a in e.arrows.iter_mut() {
            if let Some(n) = amap.get(&a.name) {
                a.name = n.clone();
            }
        }
        e
    }
}

pub fn eps_name(q: &IQuiver, i: usize) -> String {
    format!("eps_{}", q.vertices[i])
}

/// The bound quiver (Q̄, Ī) of Λ^ı: Q plus ε_i : i → τi, with the nilpotent relations
/// ε_i ε_{τi} = 0 and the commutation relations ε_i α = τ(α) ε_j for α : j → i.
pub fn enriched_quiver(q: &IQuiver) -> EnrichedQuiver {
    let mut arrows: Vec<BArrow> = q
        .arrows
        .iter()
        .enumerate()
        .map(|(k, a)| BArrow {
            name: a.id.clone(),
            src: a.src,
            tgt: a.tgt,
            kind: ArrowKind::Base(k),
        })
        .collect();
    let nb = arrows.len();
    for i in 0..q.n() {
        arrows.push(BArrow {
            name: eps_name(q, i),
            src: i,
            tgt: q.tau[i],
            kind: ArrowKind::Eps(i),
        });
    }
    let eps = |i: usize| nb + i;
    let mut relations = Vec::new();
    for i in 0..q.n() {
        // ε_i ε_{τi}: first ε_{τi}, then ε_i
        relations.push(Relation {
            terms: vec![(1, vec![eps(q.tau[i]), eps(i)])],
        });
    }
    for (k, a) in q.arrows.iter().enumerate() {
        let (j, i) = (a.src, a.tgt);
        relations.push(Relation {
            terms: vec![(1, vec![k, eps(i)]), (-1, vec![eps(j), q.tau_arrow[k]])],
        });
    }
    EnrichedQuiver {
        vertices: q.vertices.clone(),
        arrows,
        relations,
    }
}

/// The path algebra kQ itself as a bound quiver without relations.
pub fn plain_quiver(q: &IQuiver) -> EnrichedQuiver {
    let arrows = q
        .arrows
        .iter()
        .enumerate()
        .map(|(k, a)| BArrow {
            name: a.id.clone(),
            src: a.src,
            tgt: a.tgt,
            kind: ArrowKind::Base(k),
        })
        .collect();
    EnrichedQuiver {
        vertices: q.vertices.clone(),
        arrows,
        relations: vec![],
    }
}

/// The double framed quiver Q♯ with relations I♯, plus the induced involution τ♯ on vertices.
#[derive(Clone, Debug)]
pub struct DoubleFramed {
    pub bound: EnrichedQuiver,
    pub tau_sharp: Vec<usize>,
}

pub fn prime_name(s: &str) -> String {
    format!("{s}'")
}

pub fn double_framed(q: &IQuiver) -> DoubleFramed {
    let n = q.n();
    let mut vertices: Vec<String> = q.vertices.clone();
    vertices.extend(q.vertices.iter().map(|v| prime_name(v)));
    let mut arrows = Vec::new();
    for (k, a) in q.arrows.iter().enumerate() {
        arrows.push(BArrow {
            name: a.id.clone(),
            src: a.src,
            tgt: a.tgt,
            kind: ArrowKind::Base(k),
        });
    }
    for (k, a) in q.arrows.iter().enumerate() {
        arrows.push(BArrow {
            name: prime_name(&a.id),
            src: a.src + n,
            tgt: a.tgt + n,
            kind: ArrowKind::Base(k),
        });
    }
    let na = q.arrows.len();
    for i in 0..n {
        arrows.push(BArrow {
            name: eps_name(q, i),
            src: i,
            tgt: i + n,
            kind: ArrowKind::Eps(i),
        });
    }
    for i in 0..n {
        arrows.push(BArrow {
            name: prime_name(&eps_name(q, i)),
            src: i + n,
            tgt: i,
            kind: ArrowKind::Eps(i + n),
        });
    }
    let (alpha, alpha_p, eps, eps_p) = (
        |k: usize| k,
        |k: usize| na + k,
        |i: usize| 2 * na + i,
        |i: usize| 2 * na + n + i,
    );
    let mut relations = Vec::new();
    for i in 0..n {
        relations.push(Relation {
            terms: vec![(1, vec![eps_p(i), eps(i)])],
        });
        relations.push(Relation {
            terms: vec![(1, vec![eps(i), eps_p(i)])],
        });
    }
    for (k, a) in q.arrows.iter().enumerate() {
        let (i, j) = (a.src, a.tgt);
        // ε'_j α' − α ε'_i and ε_j α − α' ε_i
        relations.push(Relation {
            terms: vec![
                (1, vec![alpha_p(k), eps_p(j)]),
                (-1, vec![eps_p(i), alpha(k)]),
            ],
        });
        relations.push(Relation {
            terms: vec![(1, vec![alpha(k), eps(j)]), (-1, vec![eps(i), alpha_p(k)])],
        });
    }
    let tau_sharp = (0..2 * n)
        .map(|v| if v < n { q.tau[v] + n } else { q.tau[v - n] })
        .collect();
    DoubleFramed {
        bound: EnrichedQuiver {
            vertices,
            arrows,
            relations,
        },
        tau_sharp,
    }
}

pub fn diamond_name(s: &str) -> String {
    format!("{s}~")
}

/// The diagonal ıquiver (Q ⊔ Q◇, swap).
pub fn diagonal_iquiver(q: &IQuiver) -> Result<IQuiver> {
    let mut raw = RawQuiver::default();
    let mut tau = BTreeMap::new();
    for v in &q.vertices {
        raw.vertices.push(v.clone());
        raw.vertices.push(diamond_name(v));
        tau.insert(v.clone(), diamond_name(v));
        tau.insert(diamond_name(v), v.clone());
    }
    for a in &q.arrows {
        let (s, t) = (q.vertices[a.src].clone(), q.vertices[a.tgt].clone());
        raw.arrows.push(RawArrow {
            id: a.id.clone(),
            src: s.clone(),
            tgt: t.clone(),
        });
        raw.arrows.push(RawArrow {
            id: diamond_name(&a.id),
            src: diamond_name(&s),
            tgt: diamond_name(&t),
        });
    }
    raw.tau = Some(tau);
    raw.itau_reps = Some(q.vertices.clone());
    validate_iquiver(&raw)
}

/// Standard test ıquivers.
pub mod examples {
    use super::*;

    pub fn a2_split() -> IQuiver {
        validate_iquiver(&RawQuiver::build(&["1", "2"], &[("a", "1", "2")], &[])).unwrap()
    }

    pub fn a3_split() -> IQuiver {
        validate_iquiver(&RawQuiver::build(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "2", "3")],
            &[],
        ))
        .unwrap()
    }

    /// 1 → 2 ← 3 with τ = (1 3).
    pub fn a3_tau() -> IQuiver {
        validate_iquiver(&RawQuiver::build(
            &["1", "2", "3"],
            &[("a", "1", "2"), ("b", "3", "2")],
            &[("1", "3")],
        ))
        .unwrap()
    }

    pub fn swap_pair() -> IQuiver {
        validate_iquiver(&RawQuiver::build(&["1", "2"], &[], &[("1", "2")])).unwrap()
    }

    /// D4 with central vertex 2 and all arrows pointing into it.
    pub fn d4_split() -> IQuiver {
        validate_iquiver(&RawQuiver::build(
            &["1", "2", "3", "4"],
            &[("a", "1", "2"), ("b", "3", "2"), ("c", "4", "2")],
            &[],
        ))
        .unwrap()
    }

    pub fn a1() -> IQuiver {
        validate_iquiver(&RawQuiver::build(&["1"], &[], &[])).unwrap()
    }

    pub fn a2() -> IQuiver {
        a2_split()
    }
}
