//! Exact multivariate polynomials over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::syntax::{Term, Var, VarSet};

use super::ArithError;

/// A power product; variables sorted, exponents positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(x: &Var) -> Monomial {
        Monomial(vec![(x.clone(), 1)])
    }

    pub fn from_factors(mut v: Vec<(Var, u32)>) -> Monomial {
        v.retain(|(_, e)| *e > 0);
        v.sort();
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(v.len());
        for (x, e) in v {
            match out.last_mut() {
                Some((y, f)) if *y == x => *f += e,
                _ => out.push((x, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, x: &Var) -> u32 {
        self.0.iter().find(|(y, _)| y == x).map_or(0, |(_, e)| *e)
    }

    /// The monomial with `x` removed.
    pub fn without(&self, x: &Var) -> Monomial {
        Monomial(self.0.iter().filter(|(y, _)| y != x).cloned().collect())
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    fn with_power(&self, x: &Var, e: u32) -> Monomial {
        if e == 0 {
            return self.clone();
        }
        self.mul(&Monomial(vec![(x.clone(), e)]))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(x, e)| if *e == 1 { x.to_string() } else { format!("{x}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Canonical sparse polynomial: no zero coefficients are stored, so equal
/// polynomials are structurally equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(rat(n))
    }

    pub fn var(x: &Var) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(Monomial::var(x), BigRational::one());
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn vars(&self) -> VarSet {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(x, _)| x.clone()))
            .collect()
    }

    pub fn mentions(&self, x: &Var) -> bool {
        self.terms.keys().any(|m| m.degree_in(x) > 0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, x: &Var) -> u32 {
        self.terms.keys().map(|m| m.degree_in(x)).max().unwrap_or(0)
    }

    /// Greatest common divisor of the exponents of `x` (0 if absent).
    pub fn exponent_gcd(&self, x: &Var) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(x))
            .filter(|e| *e > 0)
            .fold(0, |g, e| g.gcd(&e))
    }

    /// Coefficients `[c0, c1, ...]` with `self = sum ci * x^i`.
    pub fn coeffs_in(&self, x: &Var) -> Vec<Poly> {
        let d = self.degree_in(x) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(x) as usize;
            out[e].add_term(m.without(x), c.clone());
        }
        out
    }

    /// Rebuilds `sum ci * x^i`.
    pub fn from_coeffs(x: &Var, coeffs: &[Poly]) -> Poly {
        let mut p = Poly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            for (m, a) in &c.terms {
                p.add_term(m.with_power(x, i as u32), a.clone());
            }
        }
        p
    }

    /// Replaces `x^g` by `x`; every exponent of `x` must be a multiple of `g`.
    pub fn deflate(&self, x: &Var, g: u32) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(x);
            debug_assert_eq!(e % g, 0);
            p.add_term(m.without(x).with_power(x, e / g), c.clone());
        }
        p
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::int(1);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn derivative(&self, x: &Var) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(x);
            if e > 0 {
                p.add_term(m.without(x).with_power(x, e - 1), c * rat(e as i64));
            }
        }
        p
    }

    /// Antiderivative in `x` with zero constant term.
    pub fn integrate(&self, x: &Var) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(x);
            p.add_term(m.without(x).with_power(x, e + 1), c / rat(e as i64 + 1));
        }
        p
    }

    /// Substitutes a polynomial for a variable.
    pub fn subst(&self, x: &Var, q: &Poly) -> Poly {
        if !self.mentions(x) {
            return self.clone();
        }
        let coeffs = self.coeffs_in(x);
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * q) + c;
        }
        acc
    }

    pub fn subst_all(&self, map: &BTreeMap<Var, Poly>) -> Poly {
        let mut acc = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (x, e) in &m.0 {
                let f = match map.get(x) {
                    Some(q) => q.pow(*e),
                    None => Poly::from_terms([(Monomial(vec![(x.clone(), *e)]), BigRational::one())]),
                };
                t = &t * &f;
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Exact evaluation; `None` if a variable is unassigned.
    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in &m.0 {
                let v = env(x)?;
                t *= num_traits::pow(v, *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, env: &dyn Fn(&Var) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (x, e) in &m.0 {
                    t *= env(x).powi(*e as i32);
                }
                t
            })
            .sum()
    }

    /// Coefficient of the greatest monomial.
    pub fn leading_coeff(&self) -> Option<&BigRational> {
        self.terms.values().next_back()
    }

    /// Positive rational `k` such that `self / k` has coprime integer
    /// coefficients.
    pub fn content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            BigRational::one()
        } else {
            BigRational::new(num, den)
        }
    }

    /// Writes `self = k * p` with `p` primitive and its leading coefficient
    /// positive; `k` carries the sign.
    pub fn primitive(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::one(), Poly::zero());
        }
        let mut k = self.content();
        if self.leading_coeff().is_some_and(|c| c.is_negative()) {
            k = -k;
        }
        (k.clone(), self.scale(&k.recip()))
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut iter = self.terms.keys();
        let Some(first) = iter.next() else {
            return Monomial::one();
        };
        let mut acc = first.0.clone();
        for m in iter {
            acc = acc
                .into_iter()
                .filter_map(|(x, e)| {
                    let f = m.degree_in(&x);
                    (f > 0).then(|| (x, e.min(f)))
                })
                .collect();
        }
        Monomial(acc)
    }

    /// Exact division by a monomial that divides every term.
    pub fn div_monomial(&self, d: &Monomial) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let rest: Vec<(Var, u32)> = m
                .0
                .iter()
                .filter_map(|(x, e)| {
                    let f = d.degree_in(x);
                    (e > &f).then(|| (x.clone(), e - f))
                })
                .collect();
            p.add_term(Monomial(rest), c.clone());
        }
        p
    }

    pub fn to_term(&self) -> Term {
        if self.is_zero() {
            return Term::int(0);
        }
        let mut acc: Option<Term> = None;
        for (m, c) in self.terms.iter().rev() {
            let mono = m.0.iter().fold(None, |acc: Option<Term>, (x, e)| {
                let f = if *e == 1 { Term::var(x) } else { Term::pow(Term::var(x), *e) };
                Some(match acc {
                    None => f,
                    Some(a) => Term::mul(a, f),
                })
            });
            let negative = c.is_negative();
            let mag = c.abs();
            let t = match mono {
                None => Term::constant(&mag),
                Some(mono) if mag.is_one() => mono,
                Some(mono) => Term::mul(Term::constant(&mag), mono),
            };
            acc = Some(match acc {
                None if negative => Term::neg(t),
                None => t,
                Some(a) if negative => Term::sub(a, t),
                Some(a) => Term::add(a, t),
            });
        }
        acc.expect("nonzero")
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, other: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= other.terms.len() { (self, other) } else { (other, self) };
        let mut p = big.clone();
        for (m, c) in &small.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, other: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), -c);
        }
        p
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, other: Poly) -> Poly {
        &self + &other
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, other: Poly) -> Poly {
        &self - &other
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, other: Poly) -> Poly {
        &self * &other
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// The polynomial denoted by a term.
pub fn normalize_poly(t: &Term) -> Result<Poly, ArithError> {
    Ok(match t {
        Term::Num(r) => Poly::constant(r.clone()),
        Term::Var(x) => Poly::var(x),
        Term::Neg(a) => -normalize_poly(a)?,
        Term::Add(a, b) => normalize_poly(a)? + normalize_poly(b)?,
        Term::Sub(a, b) => normalize_poly(a)? - normalize_poly(b)?,
        Term::Mul(a, b) => normalize_poly(a)? * normalize_poly(b)?,
        Term::Div(a, b) => {
            let d = normalize_poly(b)?;
            match d.constant_value() {
                Some(c) if !c.is_zero() => normalize_poly(a)?.scale(&c.recip()),
                _ => return Err(ArithError::Division(b.to_string())),
            }
        }
        Term::Pow(a, n) => normalize_poly(a)?.pow(*n),
    })
}
