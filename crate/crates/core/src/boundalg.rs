//! Bound quiver algebras with an explicit path basis obtained by rewriting.

use std::collections::HashMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::iquiver::{enriched_quiver, plain_quiver, ArrowKind, EnrichedQuiver, IQuiver};
use crate::linalg_ff::FpMatrix;
use crate::repmod::Rep;

pub const DEFAULT_REWRITE_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisPath {
    pub src: usize,
    pub tgt: usize,
    /// Arrows in traversal order.
    pub arrows: Vec<usize>,
    pub eps_degree: usize,
}

#[derive(Clone, Debug)]
enum Rule {
    Zero,
    To(i64, [usize; 2]),
}

#[derive(Debug)]
pub struct BoundAlgebra {
    pub quiver: EnrichedQuiver,
    /// The ıquiver this algebra was built from, if any.
    pub iq: Option<IQuiver>,
    pub basis: Vec<BasisPath>,
    /// `left[a][b]`: a·b (b first, then a) as (sign, basis index).
    pub left: Vec<Vec<Option<(i64, usize)>>>,
    pub mult_table: Vec<Vec<Option<(i64, usize)>>>,
    pub hash: String,
    index: HashMap<(usize, Vec<usize>), usize>,
    rules: HashMap<[usize; 2], Rule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDecomposition {
    pub degree0_basis: Vec<usize>,
    pub degree1_basis: Vec<usize>,
}

fn derive_rules(eq: &EnrichedQuiver) -> Result<HashMap<[usize; 2], Rule>> {
    let is_eps = |a: usize| matches!(eq.arrows[a].kind, ArrowKind::Eps(_));
    let mut rules = HashMap::new();
    for r in &eq.relations {
        let bad = || {
            Error::Input(format!(
                "unsupported relation shape: {}",
                eq.relation_string(r)
            ))
        };
        match r.terms.as_slice() {
            [(_, w)] if w.len() == 2 => {
                rules.insert([w[0], w[1]], Rule::Zero);
            }
            [(c1, w1), (c2, w2)]
                if w1.len() == 2 && w2.len() == 2 && c1.abs() == 1 && c2.abs() == 1 =>
            {
                // orient so that ε moves towards the start of the traversal
                let later_eps = |w: &Vec<usize>| !is_eps(w[0]) && is_eps(w[1]);
                let (lhs, rhs, cl, cr) = if later_eps(w1) {
                    (w1, w2, c1, c2)
                } else {
                    (w2, w1, c2, c1)
                };
                if !later_eps(lhs) {
                    return Err(bad());
                }
                rules.insert([lhs[0], lhs[1]], Rule::To(-cr * cl, [rhs[0], rhs[1]]));
            }
            _ => return Err(bad()),
        }
    }
    Ok(rules)
}

fn normalize_word(rules: &HashMap<[usize; 2], Rule>, word: &[usize]) -> Option<(i64, Vec<usize>)> {
    let mut w = word.to_vec();
    let mut sign = 1;
    let mut steps = 0usize;
    'outer: loop {
        for k in 0..w.len().saturating_sub(1) {
            if let Some(rule) = rules.get(&[w[k], w[k + 1]]) {
                match rule {
                    Rule::Zero => return None,
                    Rule::To(c, r) => {
                        sign *= c;
                        w[k] = r[0];
                        w[k + 1] = r[1];
                        steps += 1;
                        assert!(steps < 1_000_000, "rewriting does not terminate");
                        continue 'outer;
                    }
                }
            }
        }
        return Some((sign, w));
    }
}

impl BoundAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.quiver.n()
    }

    pub fn num_arrows(&self) -> usize {
        self.quiver.arrows.len()
    }

    pub fn lookup(&self, src: usize, arrows: &[usize]) -> Option<usize> {
        self.index.get(&(src, arrows.to_vec())).copied()
    }

    /// Normal form of the path `word` (traversal order) starting at `src`.
    pub fn reduce_path(&self, src: usize, word: &[usize]) -> Option<(i64, usize)> {
        let (s, w) = normalize_word(&self.rules, word)?;
        self.lookup(src, &w).map(|b| (s, b))
    }

    /// Product b1·b2 (b2 traversed first).
    pub fn mul(&self, b1: usize, b2: usize) -> Option<(i64, usize)> {
        self.mult_table[b1][b2]
    }

    pub fn idempotent(&self, i: usize) -> usize {
        self.lookup(i, &[])
            .expect("trivial paths are basis elements")
    }

    pub fn graded_decomposition(&self) -> GradedDecomposition {
        let (d0, d1): (Vec<usize>, Vec<usize>) =
            (0..self.dim()).partition(|&b| self.basis[b].eps_degree == 0);
        GradedDecomposition {
            degree0_basis: d0,
            degree1_basis: d1,
        }
    }

    pub fn is_eps(&self, a: usize) -> bool {
        matches!(self.quiver.arrows[a].kind, ArrowKind::Eps(_))
    }

    /// Basis element as a string in right-to-left composition, e.g. `a*eps_1`.
    pub fn path_string(&self, b: usize) -> String {
        let p = &self.basis[b];
        if p.arrows.is_empty() {
            return format!("e_{}", self.quiver.vertices[p.src]);
        }
        let names: Vec<&str> = p
            .arrows
            .iter()
            .rev()
            .map(|&a| self.quiver.arrows[a].name.as_str())
            .collect();
        names.join("*")
    }

    /// Arrow indices of the base quiver Q and the ε-arrows.
    pub fn base_arrows(&self) -> Vec<usize> {
        (0..self.num_arrows())
            .filter(|&a| !self.is_eps(a))
            .collect()
    }

    pub fn eps_arrow(&self, i: usize) -> Option<usize> {
        self.quiver
            .arrows
            .iter()
            .position(|a| a.kind == ArrowKind::Eps(i))
    }

    pub fn regular_projective(self: &Arc<Self>, p: u64, i: usize) -> Rep {
        regular_projective(self, p, i)
    }
}

pub fn build_algebra(eq: &EnrichedQuiver, iq: Option<IQuiver>, cap: usize) -> Result<BoundAlgebra> {
    let rules = derive_rules(eq)?;
    let mut basis: Vec<BasisPath> = Vec::new();
    let mut index = HashMap::new();
    for i in 0..eq.n() {
        index.insert((i, vec![]), basis.len());
        basis.push(BasisPath {
            src: i,
            tgt: i,
            arrows: vec![],
            eps_degree: 0,
        });
    }
    let eps_deg = |w: &[usize]| {
        w.iter()
            .filter(|&&a| matches!(eq.arrows[a].kind, ArrowKind::Eps(_)))
            .count()
    };
    let mut frontier: Vec<usize> = (0..basis.len()).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for b in frontier {
            for (a, arr) in eq.arrows.iter().enumerate() {
                if arr.src != basis[b].tgt {
                    continue;
                }
                let mut w = basis[b].arrows.clone();
                w.push(a);
                if let Some((_, nw)) = normalize_word(&rules, &w) {
                    let key = (basis[b].src, nw.clone());
                    if !index.contains_key(&key) {
                        if basis.len() >= cap {
                            return Err(Error::NonTerminatingRewrite(cap));
                        }
                        index.insert(key, basis.len());
                        next.push(basis.len());
                        let src = basis[b].src;
                        basis.push(BasisPath {
                            src,
                            tgt: arr.tgt,
                            eps_degree: eps_deg(&nw),
                            arrows: nw,
                        });
                    }
                }
            }
        }
        frontier = next;
    }
    let d = basis.len();
    let mut mult_table = vec![vec![None; d]; d];
    for b1 in 0..d {
        for b2 in 0..d {
            if basis[b2].tgt != basis[b1].src {
                continue;
            }
            let mut w = basis[b2].arrows.clone();
            w.extend_from_slice(&basis[b1].arrows);
            mult_table[b1][b2] = normalize_word(&rules, &w).map(|(s, nw)| {
                let idx = *index
                    .get(&(basis[b2].src, nw))
                    .expect("normal forms are basis paths");
                (s, idx)
            });
        }
    }
    let left = (0..eq.arrows.len())
        .map(|a| {
            (0..d)
                .map(|b| {
                    if basis[b].tgt != eq.arrows[a].src {
                        return None;
                    }
                    let mut w = basis[b].arrows.clone();
                    w.push(a);
                    normalize_word(&rules, &w).map(|(s, nw)| (s, index[&(basis[b].src, nw)]))
                })
                .collect()
        })
        .collect();
    let hash = algebra_hash(eq);
    Ok(BoundAlgebra {
        quiver: eq.clone(),
        iq,
        basis,
        left,
        mult_table,
        hash,
        index,
        rules,
    })
}

pub fn algebra_hash(eq: &EnrichedQuiver) -> String {
    let mut s = String::new();
    s.push_str(&eq.vertices.join(","));
    s.push('|');
    for a in &eq.arrows {
        s.push_str(&format!(
            "{}:{}>{};",
            a.name, eq.vertices[a.src], eq.vertices[a.tgt]
        ));
    }
    s.push('|');
    for r in &eq.relations {
        s.push_str(&eq.relation_string(r));
        s.push(';');
    }
    let digest = Sha256::digest(s.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Λ^ı for an ıquiver.
pub fn iquiver_algebra(iq: &IQuiver) -> Result<Arc<BoundAlgebra>> {
    Ok(Arc::new(build_algebra(
        &enriched_quiver(iq),
        Some(iq.clone()),
        DEFAULT_REWRITE_CAP,
    )?))
}

/// The path algebra kQ of the underlying quiver.
pub fn path_algebra(iq: &IQuiver) -> Result<Arc<BoundAlgebra>> {
    Ok(Arc::new(build_algebra(
        &plain_quiver(iq),
        Some(iq.clone()),
        DEFAULT_REWRITE_CAP,
    )?))
}

/// The indecomposable projective Λe_i: paths starting at i, arrows acting by left multiplication.
pub fn regular_projective(alg: &Arc<BoundAlgebra>, p: u64, i: usize) -> Rep {
    let n = alg.n();
    let mut pos = vec![usize::MAX; alg.dim()];
    let mut dims = vec![0usize; n];
    for (b, path) in alg.basis.iter().enumerate() {
        if path.src == i {
            pos[b] = dims[path.tgt];
            dims[path.tgt] += 1;
        }
    }
    let maps = alg
        .quiver
        .arrows
        .iter()
        .enumerate()
        .map(|(a, arr)| {
            let mut m = FpMatrix::zeros(p, dims[arr.tgt], dims[arr.src]);
            for (b, path) in alg.basis.iter().enumerate() {
                if path.src != i || path.tgt != arr.src {
                    continue;
                }
                if let Some((s, c)) = alg.left[a][b] {
                    m.set(pos[c], pos[b], crate::linalg_ff::reduce_i64(s, p));
                }
            }
            m
        })
        .collect();
    Rep::new(alg.clone(), p, dims, maps).expect("projectives satisfy the relations")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iquiver::examples::*;

    #[test]
    fn split_a2_basis() {
        let alg = iquiver_algebra(&a2_split()).unwrap();
        assert_eq!(alg.dim(), 6);
        let mut names: Vec<String> = (0..alg.dim()).map(|b| alg.path_string(b)).collect();
        names.sort();
        assert_eq!(names, vec!["a", "a*eps_1", "e_1", "e_2", "eps_1", "eps_2"]);
    }

    #[test]
    fn dims_of_examples() {
        assert_eq!(iquiver_algebra(&a3_tau()).unwrap().dim(), 10);
        assert_eq!(iquiver_algebra(&swap_pair()).unwrap().dim(), 4);
        assert_eq!(path_algebra(&a3_split()).unwrap().dim(), 6);
    }

    #[test]
    fn projective_dims() {
        let alg = iquiver_algebra(&a2_split()).unwrap();
        assert_eq!(regular_projective(&alg, 2, 0).dims, vec![2, 2]);
        assert_eq!(regular_projective(&alg, 2, 1).dims, vec![0, 2]);
    }

    #[test]
    fn graded_parts() {
        let alg = iquiver_algebra(&a3_tau()).unwrap();
        let g = alg.graded_decomposition();
        assert_eq!(g.degree0_basis.len(), 5);
        for &x in &g.degree1_basis {
            for &y in &g.degree1_basis {
                assert!(alg.mul(x, y).is_none());
            }
        }
    }
}
