//! Dense linear algebra over prime fields F_p.

use std::fmt;

use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

pub fn reduce_i64(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}{:?}", self.p, self.to_rows())
    }
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = FpMatrix::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    pub fn from_data(p: u64, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for {rows}x{cols}",
                data.len()
            )));
        }
        Ok(FpMatrix {
            p,
            rows,
            cols,
            data: data.into_iter().map(|x| x % p).collect(),
        })
    }

    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| reduce_i64(x, p)))
            .collect();
        FpMatrix {
            p,
            rows: r,
            cols: c,
            data,
        }
    }

    /// Matrix with a single column.
    pub fn column(p: u64, v: &[u64]) -> Self {
        FpMatrix {
            p,
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x % self.p;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, o: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != o.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let p = self.p;
        let mut out = FpMatrix::zeros(p, self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..o.cols {
                    let b = o.get(k, c);
                    if b != 0 {
                        let idx = r * o.cols + c;
                        out.data[idx] = add_mod(out.data[idx], mul_mod(a, b, p), p);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product that panics on shape mismatch; for internally consistent shapes.
    pub fn dot(&self, o: &FpMatrix) -> FpMatrix {
        self.mul(o).expect("matrix shapes agree")
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let p = self.p;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, p), p))
            })
            .collect()
    }

    pub fn add(&self, o: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| add_mod(a, b, p))
            .collect();
        FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, o: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(&a, &b)| sub_mod(a, b, p))
            .collect();
        FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, c: u64) -> FpMatrix {
        let p = self.p;
        let data = self.data.iter().map(|&a| mul_mod(a, c, p)).collect();
        FpMatrix {
            p,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn vstack(&self, o: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&o.data);
        FpMatrix {
            p: self.p,
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, o: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, o.rows);
        let mut out = FpMatrix::zeros(self.p, self.rows, self.cols + o.cols);
        for r in 0..self.rows {
            out.data[r * out.cols..r * out.cols + self.cols].copy_from_slice(self.row(r));
            out.data[r * out.cols + self.cols..(r + 1) * out.cols].copy_from_slice(o.row(r));
        }
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, o: &FpMatrix) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, self.rows + o.rows, self.cols + o.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[r * out.cols + c] = self.get(r, c);
            }
        }
        for r in 0..o.rows {
            for c in 0..o.cols {
                out.data[(r + self.rows) * out.cols + c + self.cols] = o.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> FpMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        FpMatrix {
            p: self.p,
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn from_row_vecs(p: u64, cols: usize, rows: &[Vec<u64>]) -> FpMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        FpMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Reduced row echelon form, rank and pivot columns.
    pub fn rref(&self) -> (FpMatrix, usize, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let rank = pivots.len();
        (m, rank, pivots)
    }

    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = inv_mod(self.data[r * cols + c], p);
            for j in c..cols {
                self.data[r * cols + j] = mul_mod(self.data[r * cols + j], inv, p);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                for j in c..cols {
                    let t = mul_mod(f, self.data[r * cols + j], p);
                    self.data[i * cols + j] = sub_mod(self.data[i * cols + j], t, p);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Null space {x : M x = 0} inside F_p^cols.
    pub fn kernel_basis(&self) -> Subspace {
        let (r, rank, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let p = self.p;
        let mut vecs = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate().take(rank) {
                v[pc] = sub_mod(0, r.get(i, free), p);
            }
            vecs.push(v);
        }
        Subspace::from_vectors(p, self.cols, &vecs)
    }

    /// Column space inside F_p^rows.
    pub fn image_basis(&self) -> Subspace {
        let t = self.transpose();
        Subspace::from_matrix(t)
    }

    /// Some x with M x = rhs, or `None`.
    pub fn solve(&self, rhs: &[u64]) -> Result<Option<Vec<u64>>> {
        if rhs.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "rhs of length {} for {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let aug = self.hstack(&FpMatrix::column(self.p, rhs));
        let (r, rank, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u64; self.cols];
        for (i, &pc) in pivots.iter().enumerate().take(rank) {
            x[pc] = r.get(i, self.cols);
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&FpMatrix::identity(self.p, n));
        let (r, rank, pivots) = aug.rref();
        if rank < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = FpMatrix::zeros(self.p, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.data[i * n + j] = r.get(i, n + j);
            }
        }
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn pow(&self, e: usize) -> FpMatrix {
        let mut acc = FpMatrix::identity(self.p, self.rows);
        for _ in 0..e {
            acc = acc.dot(self);
        }
        acc
    }
}

pub fn rref(m: &FpMatrix) -> (FpMatrix, usize, Vec<usize>) {
    m.rref()
}

pub fn kernel_basis(m: &FpMatrix) -> Subspace {
    m.kernel_basis()
}

pub fn image_basis(m: &FpMatrix) -> Subspace {
    m.image_basis()
}

pub fn solve(m: &FpMatrix, rhs: &[u64]) -> Result<Option<Vec<u64>>> {
    m.solve(rhs)
}

/// A subspace of F_p^n stored by a basis in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub p: u64,
    pub ambient_dim: usize,
    pub basis: FpMatrix,
    pub pivots: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubspaceOp {
    Sum,
    Intersect,
    Contains,
    QuotientDim,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubspaceResult {
    Space(Subspace),
    Bool(bool),
    Dim(usize),
}

impl Subspace {
    pub fn zero(p: u64, n: usize) -> Self {
        Subspace {
            p,
            ambient_dim: n,
            basis: FpMatrix::zeros(p, 0, n),
            pivots: vec![],
        }
    }

    pub fn full(p: u64, n: usize) -> Self {
        Subspace {
            p,
            ambient_dim: n,
            basis: FpMatrix::identity(p, n),
            pivots: (0..n).collect(),
        }
    }

    pub fn from_matrix(mut m: FpMatrix) -> Self {
        let pivots = m.rref_in_place();
        let n = m.cols;
        let basis = m.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        Subspace {
            p: m.p,
            ambient_dim: n,
            basis,
            pivots,
        }
    }

    pub fn from_vectors(p: u64, n: usize, vecs: &[Vec<u64>]) -> Self {
        Subspace::from_matrix(FpMatrix::from_row_vecs(p, n, vecs))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn vectors(&self) -> Vec<Vec<u64>> {
        self.basis.to_rows()
    }

    /// Reduces `v` modulo the subspace; zero iff v lies in it.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w = v.to_vec();
        for (i, &pc) in self.pivots.iter().enumerate() {
            let f = w[pc];
            if f != 0 {
                for (j, &b) in self.basis.row(i).iter().enumerate() {
                    if b != 0 {
                        w[j] = sub_mod(w[j], mul_mod(f, b, p), p);
                    }
                }
            }
        }
        w
    }

    pub fn contains_vec(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Coordinates of a vector of the subspace in the stored basis.
    pub fn coords(&self, v: &[u64]) -> Option<Vec<u64>> {
        let c: Vec<u64> = self.pivots.iter().map(|&pc| v[pc]).collect();
        let mut w = vec![0u64; self.ambient_dim];
        for (i, &ci) in c.iter().enumerate() {
            for (j, &b) in self.basis.row(i).iter().enumerate() {
                w[j] = add_mod(w[j], mul_mod(ci, b, self.p), self.p);
            }
        }
        (w == v).then_some(c)
    }

    /// Ambient coordinates outside the pivot set: a basis of the quotient ambient/self.
    pub fn free_coords(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ambient_dim];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.ambient_dim).filter(|&c| !is_pivot[c]).collect()
    }

    fn same_ambient(&self, o: &Subspace) -> Result<()> {
        if self.ambient_dim != o.ambient_dim || self.p != o.p {
            Err(Error::AmbientMismatch)
        } else {
            Ok(())
        }
    }

    pub fn sum(&self, o: &Subspace) -> Result<Subspace> {
        self.same_ambient(o)?;
        Ok(Subspace::from_matrix(self.basis.vstack(&o.basis)))
    }

    pub fn intersect(&self, o: &Subspace) -> Result<Subspace> {
        self.same_ambient(o)?;
        // x·A = y·B  ⇔  [Aᵀ | −Bᵀ](x, y) = 0
        let neg_b = o.basis.scale(self.p - 1);
        let sys = self.basis.transpose().hstack(&neg_b.transpose());
        let ker = sys.kernel_basis();
        let ra = self.dim();
        let vecs: Vec<Vec<u64>> = ker
            .vectors()
            .iter()
            .map(|k| {
                let x = FpMatrix::from_row_vecs(self.p, ra, &[k[..ra].to_vec()]);
                x.dot(&self.basis).row(0).to_vec()
            })
            .collect();
        Ok(Subspace::from_vectors(self.p, self.ambient_dim, &vecs))
    }

    pub fn contains(&self, o: &Subspace) -> Result<bool> {
        self.same_ambient(o)?;
        Ok(o.vectors().iter().all(|v| self.contains_vec(v)))
    }

    pub fn quotient_dim(&self, o: &Subspace) -> Result<usize> {
        self.same_ambient(o)?;
        Ok(self.dim() - self.intersect(o)?.dim())
    }
}

pub fn subspace_ops(a: &Subspace, b: &Subspace, op: SubspaceOp) -> Result<SubspaceResult> {
    Ok(match op {
        SubspaceOp::Sum => SubspaceResult::Space(a.sum(b)?),
        SubspaceOp::Intersect => SubspaceResult::Space(a.intersect(b)?),
        SubspaceOp::Contains => SubspaceResult::Bool(a.contains(b)?),
        SubspaceOp::QuotientDim => SubspaceResult::Dim(a.quotient_dim(b)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_examples() {
        let (_, rank, piv) = FpMatrix::from_rows(5, &[vec![2, 4], vec![1, 2]]).rref();
        assert_eq!((rank, piv), (1, vec![0]));
        assert_eq!(FpMatrix::identity(2, 3).rank(), 3);
        assert_eq!(FpMatrix::from_rows(2, &[vec![1, 1], vec![1, 1]]).rank(), 1);
    }

    #[test]
    fn kernel_solve_image() {
        let k = FpMatrix::from_rows(2, &[vec![1, 1]]).kernel_basis();
        assert_eq!(k.vectors(), vec![vec![1, 1]]);
        assert_eq!(
            FpMatrix::identity(3, 2).solve(&[1, 0]).unwrap(),
            Some(vec![1, 0])
        );
        assert_eq!(FpMatrix::zeros(3, 2, 2).image_basis().dim(), 0);
        assert!(FpMatrix::identity(3, 2).solve(&[1]).is_err());
        assert_eq!(FpMatrix::zeros(3, 1, 1).solve(&[1]).unwrap(), None);
    }

    #[test]
    fn subspace_examples() {
        let a = Subspace::from_vectors(2, 2, &[vec![1, 0]]);
        let b = Subspace::from_vectors(2, 2, &[vec![0, 1]]);
        assert_eq!(a.sum(&b).unwrap().dim(), 2);
        assert_eq!(a.intersect(&a).unwrap(), a);
        let line = Subspace::from_vectors(3, 2, &[vec![1, 2]]);
        assert_eq!(Subspace::full(3, 2).quotient_dim(&line).unwrap(), 1);
        assert!(matches!(
            a.sum(&Subspace::zero(2, 3)),
            Err(Error::AmbientMismatch)
        ));
        assert!(matches!(
            subspace_ops(&a, &b, SubspaceOp::Contains).unwrap(),
            SubspaceResult::Bool(false)
        ));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = FpMatrix::from_rows(7, &[vec![1, 2], vec![3, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.dot(&inv), FpMatrix::identity(7, 2));
        assert!(FpMatrix::from_rows(7, &[vec![1, 2], vec![2, 4]])
            .inverse()
            .is_none());
    }
}
