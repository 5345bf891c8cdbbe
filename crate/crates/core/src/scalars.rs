//! Exact scalars: rationals, the quadratic ring ℚ[√q] and Laurent polynomials in v with v² = q.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rational_to_json(r: &Rational) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n
            .as_i64()
            .map(int)
            .ok_or_else(|| Error::Input(format!("not an integer: {n}"))),
        _ => Err(Error::Input(format!("expected rational, got {v}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Input(format!("bad rational '{s}'"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `a + b·√q` for a fixed prime `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt {
    pub a: Rational,
    pub b: Rational,
    pub q: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QOp {
    Add,
    Mul,
    Div,
}

impl QSqrt {
    pub fn new(a: Rational, b: Rational, q: u64) -> Self {
        QSqrt { a, b, q }
    }

    pub fn zero(q: u64) -> Self {
        QSqrt::new(Rational::zero(), Rational::zero(), q)
    }

    pub fn one(q: u64) -> Self {
        QSqrt::from_rational(Rational::one(), q)
    }

    pub fn from_rational(a: Rational, q: u64) -> Self {
        QSqrt::new(a, Rational::zero(), q)
    }

    pub fn from_int(n: i64, q: u64) -> Self {
        QSqrt::from_rational(int(n), q)
    }

    /// v = √q.
    pub fn v(q: u64) -> Self {
        QSqrt::new(Rational::zero(), Rational::one(), q)
    }

    /// v^n for any integer n.
    pub fn v_pow(q: u64, n: i64) -> Self {
        let m = n.div_euclid(2);
        let qm = rational_pow(&int(q as i64), m);
        if n.rem_euclid(2) == 0 {
            QSqrt::from_rational(qm, q)
        } else {
            QSqrt::new(Rational::zero(), qm, q)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * int(self.q as i64)
    }

    pub fn conj(&self) -> Self {
        QSqrt::new(self.a.clone(), -self.b.clone(), self.q)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QSqrt::new(&self.a * r, &self.b * r, self.q)
    }

    fn check(&self, o: &QSqrt) -> Result<()> {
        if self.q != o.q {
            Err(Error::MismatchedField(self.q, o.q))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &QSqrt) -> Result<QSqrt> {
        self.check(o)?;
        Ok(QSqrt::new(&self.a + &o.a, &self.b + &o.b, self.q))
    }

    pub fn try_mul(&self, o: &QSqrt) -> Result<QSqrt> {
        self.check(o)?;
        let q = int(self.q as i64);
        Ok(QSqrt::new(
            &self.a * &o.a + &self.b * &o.b * q,
            &self.a * &o.b + &self.b * &o.a,
            self.q,
        ))
    }

    pub fn inv(&self) -> Result<QSqrt> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QSqrt::new(&self.a / &n, -&self.b / &n, self.q))
    }

    pub fn try_div(&self, o: &QSqrt) -> Result<QSqrt> {
        self.check(o)?;
        self.try_mul(&o.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<QSqrt> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = QSqrt::one(self.q);
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Value {
        json!({"a": rational_to_json(&self.a), "b": rational_to_json(&self.b), "q": self.q})
    }

    pub fn from_json(v: &Value) -> Result<QSqrt> {
        let get = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Input(format!("QSqrt missing '{k}'")))
        };
        let q = get("q")?
            .as_u64()
            .ok_or_else(|| Error::Input("QSqrt q must be an integer".into()))?;
        Ok(QSqrt::new(
            rational_from_json(get("a")?)?,
            rational_from_json(get("b")?)?,
            q,
        ))
    }
}

pub fn qsqrt_arith(x: &QSqrt, y: &QSqrt, op: QOp) -> Result<QSqrt> {
    match op {
        QOp::Add => x.try_add(y),
        QOp::Mul => x.try_mul(y),
        QOp::Div => x.try_div(y),
    }
}

impl fmt::Display for QSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·√{}", self.a, self.b, self.q)
    }
}

impl Add for &QSqrt {
    type Output = QSqrt;
    fn add(self, o: &QSqrt) -> QSqrt {
        self.try_add(o).expect("QSqrt fields differ")
    }
}

impl Sub for &QSqrt {
    type Output = QSqrt;
    fn sub(self, o: &QSqrt) -> QSqrt {
        self.try_add(&-o).expect("QSqrt fields differ")
    }
}

impl Mul for &QSqrt {
    type Output = QSqrt;
    fn mul(self, o: &QSqrt) -> QSqrt {
        self.try_mul(o).expect("QSqrt fields differ")
    }
}

impl Neg for &QSqrt {
    type Output = QSqrt;
    fn neg(self) -> QSqrt {
        QSqrt::new(-&self.a, -&self.b, self.q)
    }
}

fn rational_pow(x: &Rational, n: i64) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n.unsigned_abs() {
        acc *= x;
    }
    if n < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Finitely supported Σ c_k v^k with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentV {
    coeffs: BTreeMap<i64, Rational>,
}

impl LaurentV {
    pub fn zero() -> Self {
        LaurentV::default()
    }

    pub fn one() -> Self {
        LaurentV::monomial(0, Rational::one())
    }

    pub fn monomial(k: i64, c: Rational) -> Self {
        let mut p = LaurentV::zero();
        p.add_term(k, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut p = LaurentV::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    pub fn from_ints(terms: &[(i64, i64)]) -> Self {
        LaurentV::from_terms(terms.iter().map(|&(k, c)| (k, int(c))))
    }

    pub fn add_term(&mut self, k: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Quantum integer [n] = (v^n − v^{−n})/(v − v^{−1}).
    pub fn qint(n: i64) -> Self {
        let s = n.signum();
        LaurentV::from_terms((0..n.abs()).map(|j| (n.abs() - 1 - 2 * j, int(s))))
    }

    pub fn eval(&self, q: u64) -> QSqrt {
        laurent_eval(self, q)
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.to_string(), rational_to_json(c)))
            .collect();
        Value::Object(map)
    }

    pub fn from_json(v: &Value) -> Result<LaurentV> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Input("LaurentV must be an object".into()))?;
        let mut p = LaurentV::zero();
        for (k, c) in obj {
            let k: i64 = k
                .parse()
                .map_err(|_| Error::Input(format!("bad exponent '{k}'")))?;
            p.add_term(k, rational_from_json(c)?);
        }
        Ok(p)
    }
}

impl Add for &LaurentV {
    type Output = LaurentV;
    fn add(self, o: &LaurentV) -> LaurentV {
        let mut r = self.clone();
        for (k, c) in &o.coeffs {
            r.add_term(*k, c.clone());
        }
        r
    }
}

impl Sub for &LaurentV {
    type Output = LaurentV;
    fn sub(self, o: &LaurentV) -> LaurentV {
        self + &(-o)
    }
}

impl Neg for &LaurentV {
    type Output = LaurentV;
    fn neg(self) -> LaurentV {
        LaurentV::from_terms(self.coeffs.iter().map(|(k, c)| (*k, -c)))
    }
}

impl Mul for &LaurentV {
    type Output = LaurentV;
    fn mul(self, o: &LaurentV) -> LaurentV {
        let mut r = LaurentV::zero();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &o.coeffs {
                r.add_term(k1 + k2, c1 * c2);
            }
        }
        r
    }
}

impl fmt::Display for LaurentV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_c = !abs.is_one() || *k == 0;
            if show_c {
                write!(f, "{abs}")?;
            }
            match *k {
                0 => {}
                1 => write!(f, "v")?,
                k => write!(f, "v^{k}")?,
            }
        }
        Ok(())
    }
}

pub fn laurent_eval(p: &LaurentV, q: u64) -> QSqrt {
    let mut acc = QSqrt::zero(q);
    for (k, c) in &p.coeffs {
        acc = &acc + &QSqrt::v_pow(q, *k).scale(c);
    }
    acc
}

pub const DEFAULT_LAURENT_CAP: i64 = 16;

/// Interpolates a Laurent polynomial from its values at several primes.
pub fn laurent_fit(samples: &[(u64, QSqrt)], degree_bound: i64) -> Result<LaurentV> {
    laurent_fit_capped(samples, degree_bound, DEFAULT_LAURENT_CAP.max(degree_bound))
}

/// Like [`laurent_fit`], retrying with bound D+2 until `cap` when no fit exists.
pub fn laurent_fit_capped(
    samples: &[(u64, QSqrt)],
    degree_bound: i64,
    cap: i64,
) -> Result<LaurentV> {
    let mut d = degree_bound.max(0);
    loop {
        match fit_at_bound(samples, d) {
            Err(Error::InconsistentSamples) if d + 2 <= cap => d += 2,
            r => return r,
        }
    }
}

fn fit_at_bound(samples: &[(u64, QSqrt)], bound: i64) -> Result<LaurentV> {
    let mut pts: Vec<(u64, QSqrt)> = Vec::new();
    for (q, val) in samples {
        if val.q != *q {
            return Err(Error::MismatchedField(*q, val.q));
        }
        match pts.iter().find(|(q2, _)| q2 == q) {
            Some((_, v2)) if v2 != val => return Err(Error::InconsistentSamples),
            Some(_) => {}
            None => pts.push((*q, val.clone())),
        }
    }
    if pts.len() < 2 {
        return Err(Error::UnderdeterminedFit {
            needed: 2,
            have: pts.len(),
        });
    }
    let even: Vec<(u64, Rational)> = pts.iter().map(|(q, v)| (*q, v.a.clone())).collect();
    let odd: Vec<(u64, Rational)> = pts.iter().map(|(q, v)| (*q, v.b.clone())).collect();
    let ce = fit_parity(&even, bound, 0)?;
    let co = fit_parity(&odd, bound, 1)?;
    let mut p = LaurentV::zero();
    for (m, c) in ce {
        p.add_term(2 * m, c);
    }
    for (m, c) in co {
        p.add_term(2 * m + 1, c);
    }
    Ok(p)
}

/// Exponents of one parity class ordered 0, 2, −2, 4, −4, … (resp. 1, −1, 3, −3, …),
/// restricted to |k| ≤ bound.
fn parity_order(bound: i64, parity: i64) -> Vec<i64> {
    let mut out = Vec::new();
    let mut k = parity;
    while k <= bound {
        out.push(k);
        if k > 0 && -k >= -bound {
            out.push(-k);
        }
        k += 2;
    }
    out
}

/// Fits Σ_m c_m q^m to the samples, where k = 2m + parity runs over a growing exponent set.
fn fit_parity(pts: &[(u64, Rational)], bound: i64, parity: i64) -> Result<Vec<(i64, Rational)>> {
    if pts.iter().all(|(_, y)| y.is_zero()) {
        return Ok(Vec::new());
    }
    let order = parity_order(bound, parity);
    for n in 1..=order.len() {
        if n > pts.len() {
            return Err(Error::UnderdeterminedFit {
                needed: n,
                have: pts.len(),
            });
        }
        let ms: Vec<i64> = order[..n]
            .iter()
            .map(|k| (k - parity).div_euclid(2))
            .collect();
        let rows: Vec<Vec<Rational>> = pts[..n]
            .iter()
            .map(|(q, _)| {
                ms.iter()
                    .map(|m| rational_pow(&int(*q as i64), *m))
                    .collect()
            })
            .collect();
        let rhs: Vec<Rational> = pts[..n].iter().map(|(_, y)| y.clone()).collect();
        let Some(sol) = solve_rational(rows, rhs) else {
            continue;
        };
        let ok = pts.iter().all(|(q, y)| {
            let val: Rational = ms
                .iter()
                .zip(&sol)
                .map(|(m, c)| c * rational_pow(&int(*q as i64), *m))
                .sum();
            &val == y
        });
        if ok {
            return Ok(ms
                .into_iter()
                .zip(sol)
                .filter(|(_, c)| !c.is_zero())
                .collect());
        }
    }
    Err(Error::InconsistentSamples)
}

/// Solves a square system exactly; `None` if singular.
pub fn solve_rational(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let t = &a[col][j] * &f;
                    a[r][j] -= t;
                }
                let t = &b[col] * &f;
                b[r] -= t;
            }
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn serre_coeff() -> LaurentV {
        LaurentV::from_ints(&[(3, -1), (1, 2), (-1, -1)])
    }

    #[test]
    fn sqrt_squared() {
        let v = QSqrt::v(2);
        assert_eq!(&v * &v, QSqrt::from_int(2, 2));
    }

    #[test]
    fn conjugate_inverse() {
        let x = QSqrt::new(int(1), int(1), 2);
        assert_eq!(x.inv().unwrap(), QSqrt::new(int(-1), int(1), 2));
        assert_eq!(
            qsqrt_arith(&QSqrt::one(2), &x, QOp::Div).unwrap(),
            QSqrt::new(int(-1), int(1), 2)
        );
    }

    #[test]
    fn arith_errors() {
        assert!(matches!(
            qsqrt_arith(&QSqrt::one(2), &QSqrt::one(3), QOp::Add),
            Err(Error::MismatchedField(2, 3))
        ));
        assert!(matches!(QSqrt::zero(5).inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(serre_coeff().eval(2), QSqrt::new(int(0), rat(-1, 2), 2));
        assert_eq!(serre_coeff().eval(3), QSqrt::new(int(0), rat(-4, 3), 3));
        assert_eq!(LaurentV::one().eval(3), QSqrt::one(3));
        assert_eq!(
            LaurentV::from_ints(&[(1, 1), (-1, 1)]).eval(2),
            QSqrt::new(int(0), rat(3, 2), 2)
        );
    }

    #[test]
    fn eval_matches_closed_form() {
        // −(q−1)²/v computed directly in ℚ[√q]
        for q in [2u64, 3, 5, 7] {
            let qm1 = QSqrt::from_int(q as i64 - 1, q);
            let direct = -&(&(&qm1 * &qm1) * &QSqrt::v(q).inv().unwrap());
            assert_eq!(serre_coeff().eval(q), direct);
        }
    }

    #[test]
    fn fit_examples() {
        let samples = vec![
            (2, QSqrt::new(int(0), rat(-1, 2), 2)),
            (3, QSqrt::new(int(0), rat(-4, 3), 3)),
            (5, QSqrt::new(int(0), rat(-16, 5), 5)),
            (7, QSqrt::new(int(0), rat(-36, 7), 7)),
        ];
        assert_eq!(laurent_fit(&samples, 4).unwrap(), serre_coeff());
        let ones = vec![(2, QSqrt::one(2)), (3, QSqrt::one(3))];
        assert_eq!(laurent_fit(&ones, 0).unwrap(), LaurentV::one());
        let qs = vec![(2, QSqrt::from_int(2, 2)), (3, QSqrt::from_int(3, 3))];
        assert_eq!(laurent_fit(&qs, 2).unwrap(), LaurentV::from_ints(&[(2, 1)]));
    }

    #[test]
    fn fit_errors() {
        let one = vec![(2, QSqrt::from_int(2, 2))];
        assert!(matches!(
            laurent_fit_capped(&one, 2, 2),
            Err(Error::UnderdeterminedFit { .. })
        ));
        let clash = vec![(2, QSqrt::one(2)), (2, QSqrt::from_int(3, 2))];
        assert!(matches!(
            laurent_fit(&clash, 2),
            Err(Error::InconsistentSamples)
        ));
    }

    #[test]
    fn qint_and_display() {
        assert_eq!(LaurentV::qint(2), LaurentV::from_ints(&[(1, 1), (-1, 1)]));
        assert_eq!(
            LaurentV::qint(3),
            LaurentV::from_ints(&[(2, 1), (0, 1), (-2, 1)])
        );
        assert_eq!(serre_coeff().to_string(), "-v^3+2v-v^-1");
    }

    #[test]
    fn json_roundtrip() {
        let x = QSqrt::new(rat(-3, 4), int(2), 7);
        assert_eq!(QSqrt::from_json(&x.to_json()).unwrap(), x);
        let p = serre_coeff();
        assert_eq!(LaurentV::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(rational_to_json(&rat(6, -4)), Value::String("-3/2".into()));
    }
}
