//! Quantifier-free formulas in negation normal form over sign conditions
//! `p ∈ S` where `S` is a set of signs.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::syntax::{Formula, Rel, Term, Var, VarSet};

use super::poly::{normalize_poly, Poly};
use super::ArithError;

/// A nonempty proper subset of `{-, 0, +}`.
pub type Mask = u8;
pub const NEG: Mask = 1;
pub const ZERO: Mask = 2;
pub const POS: Mask = 4;
pub const ALL: Mask = 7;

pub fn mask_of_rel(r: Rel) -> Mask {
    match r {
        Rel::Eq => ZERO,
        Rel::Ne => NEG | POS,
        Rel::Lt => NEG,
        Rel::Le => NEG | ZERO,
        Rel::Gt => POS,
        Rel::Ge => POS | ZERO,
    }
}

pub fn rel_of_mask(m: Mask) -> Rel {
    match m {
        ZERO => Rel::Eq,
        NEG => Rel::Lt,
        POS => Rel::Gt,
        m if m == NEG | POS => Rel::Ne,
        m if m == NEG | ZERO => Rel::Le,
        m if m == POS | ZERO => Rel::Ge,
        _ => unreachable!("trivial mask {m}"),
    }
}

/// The mask describing `-p` given the mask of `p`.
pub fn flip(m: Mask) -> Mask {
    (m & ZERO) | ((m & NEG) << 2) | ((m & POS) >> 2)
}

pub fn sign_mask(c: &BigRational) -> Mask {
    if c.is_zero() {
        ZERO
    } else if c.is_positive() {
        POS
    } else {
        NEG
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Qf {
    True,
    False,
    /// Nonconstant primitive polynomial with positive leading coefficient.
    Atom(Poly, Mask),
    And(Vec<Qf>),
    Or(Vec<Qf>),
}

impl Qf {
    /// The formula `p ∈ m`, normalized.
    pub fn atom(p: Poly, m: Mask) -> Qf {
        if m & ALL == ALL {
            return Qf::True;
        }
        if m == 0 {
            return Qf::False;
        }
        if let Some(c) = p.constant_value() {
            return if sign_mask(&c) & m != 0 { Qf::True } else { Qf::False };
        }
        let (k, q) = p.primitive();
        let m = if k.is_negative() { flip(m) } else { m };
        Qf::Atom(q, m)
    }

    /// Like [`Qf::atom`] for a polynomial already in canonical form.
    pub fn atom_canonical(p: Poly, m: Mask) -> Qf {
        if m & ALL == ALL {
            Qf::True
        } else if m == 0 {
            Qf::False
        } else if p.is_constant() {
            Qf::atom(p, m)
        } else {
            Qf::Atom(p, m)
        }
    }

    pub fn and(parts: impl IntoIterator<Item = Qf>) -> Qf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Qf::True => {}
                Qf::False => return Qf::False,
                Qf::And(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Qf::True,
            1 => out.pop().unwrap(),
            _ => Qf::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Qf>) -> Qf {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Qf::False => {}
                Qf::True => return Qf::True,
                Qf::Or(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Qf::False,
            1 => out.pop().unwrap(),
            _ => Qf::Or(out),
        }
    }

    pub fn negate(&self) -> Qf {
        match self {
            Qf::True => Qf::False,
            Qf::False => Qf::True,
            Qf::Atom(p, m) => Qf::Atom(p.clone(), ALL & !m),
            Qf::And(ps) => Qf::or(ps.iter().map(Qf::negate)),
            Qf::Or(ps) => Qf::and(ps.iter().map(Qf::negate)),
        }
    }

    pub fn mentions(&self, x: &Var) -> bool {
        match self {
            Qf::True | Qf::False => false,
            Qf::Atom(p, _) => p.mentions(x),
            Qf::And(ps) | Qf::Or(ps) => ps.iter().any(|p| p.mentions(x)),
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.visit_atoms(&mut |p, _| out.extend(p.vars()));
        out
    }

    pub fn visit_atoms(&self, f: &mut dyn FnMut(&Poly, Mask)) {
        match self {
            Qf::True | Qf::False => {}
            Qf::Atom(p, m) => f(p, *m),
            Qf::And(ps) | Qf::Or(ps) => ps.iter().for_each(|p| p.visit_atoms(f)),
        }
    }

    pub fn map_atoms(&self, f: &mut dyn FnMut(&Poly, Mask) -> Qf) -> Qf {
        match self {
            Qf::True | Qf::False => self.clone(),
            Qf::Atom(p, m) => f(p, *m),
            Qf::And(ps) => Qf::and(ps.iter().map(|p| p.map_atoms(f))),
            Qf::Or(ps) => Qf::or(ps.iter().map(|p| p.map_atoms(f))),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Qf::True | Qf::False | Qf::Atom(..) => 1,
            Qf::And(ps) | Qf::Or(ps) => 1 + ps.iter().map(Qf::size).sum::<usize>(),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<BigRational>) -> Option<bool> {
        Some(match self {
            Qf::True => true,
            Qf::False => false,
            Qf::Atom(p, m) => sign_mask(&p.eval(env)?) & m != 0,
            Qf::And(ps) => {
                for p in ps {
                    if !p.eval(env)? {
                        return Some(false);
                    }
                }
                true
            }
            Qf::Or(ps) => {
                for p in ps {
                    if p.eval(env)? {
                        return Some(true);
                    }
                }
                false
            }
        })
    }

    /// Readable formula with atoms written as `p ⋈ 0`, or as `a ⋈ b` when the
    /// negative part of `p` is moved to the right.
    pub fn to_formula(&self) -> Formula {
        match self {
            Qf::True => Formula::True,
            Qf::False => Formula::False,
            Qf::Atom(p, m) => atom_formula(p, *m),
            Qf::And(ps) => Formula::conj(ps.iter().map(Qf::to_formula)),
            Qf::Or(ps) => Formula::disj(ps.iter().map(Qf::to_formula)),
        }
    }
}

fn atom_formula(p: &Poly, m: Mask) -> Formula {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (mono, c) in p.terms() {
        if c.is_negative() {
            neg.push((mono.clone(), -c));
        } else {
            pos.push((mono.clone(), c.clone()));
        }
    }
    let lhs = Poly::from_terms(pos);
    let rhs = Poly::from_terms(neg);
    Formula::cmp(lhs.to_term(), rel_of_mask(m), rhs.to_term())
}

/// Translates a first-order formula without quantifiers into NNF.
pub fn from_formula(f: &Formula) -> Result<Qf, ArithError> {
    Ok(match f {
        Formula::True => Qf::True,
        Formula::False => Qf::False,
        Formula::Cmp(a, r, b) => Qf::atom(normalize_poly(&Term::sub(a.clone(), b.clone()))?, mask_of_rel(*r)),
        Formula::Not(a) => from_formula(a)?.negate(),
        Formula::And(a, b) => Qf::and([from_formula(a)?, from_formula(b)?]),
        Formula::Or(a, b) => Qf::or([from_formula(a)?, from_formula(b)?]),
        Formula::Imply(a, b) => Qf::or([from_formula(a)?.negate(), from_formula(b)?]),
        Formula::Equiv(a, b) => {
            let (a, b) = (from_formula(a)?, from_formula(b)?);
            Qf::or([Qf::and([a.clone(), b.clone()]), Qf::and([a.negate(), b.negate()])])
        }
        Formula::Forall(..) | Formula::Exists(..) => return Err(ArithError::Quantified),
        Formula::Box(..) | Formula::Diamond(..) => return Err(ArithError::Modal),
    })
}

/// Facts `p ∈ m` about canonical polynomials.
#[derive(Clone, Debug, Default)]
pub struct Facts {
    map: BTreeMap<Poly, Mask>,
    contradictory: bool,
}

impl Facts {
    pub fn new() -> Facts {
        Facts::default()
    }

    pub fn is_contradictory(&self) -> bool {
        self.contradictory
    }

    pub fn add(&mut self, p: &Poly, m: Mask) {
        let e = self.map.entry(p.clone()).or_insert(ALL);
        *e &= m;
        if *e == 0 {
            self.contradictory = true;
        }
    }

    pub fn add_qf(&mut self, q: &Qf) {
        match q {
            Qf::Atom(p, m) => self.add(p, *m),
            Qf::And(ps) => ps.iter().for_each(|p| self.add_qf(p)),
            Qf::False => self.contradictory = true,
            _ => {}
        }
    }

    /// Known signs of an arbitrary polynomial (possibly unnormalized).
    pub fn mask_of(&self, p: &Poly) -> Mask {
        if let Some(c) = p.constant_value() {
            return sign_mask(&c);
        }
        let (k, q) = p.primitive();
        let m = self.map.get(&q).copied().unwrap_or(ALL) & self.structural_mask(&q);
        if k.is_negative() {
            flip(m)
        } else {
            m
        }
    }

    fn var_mask(&self, x: &Var) -> Mask {
        self.map.get(&Poly::var(x)).copied().unwrap_or(ALL)
    }

    /// Sign information derived term by term from variable signs.
    fn structural_mask(&self, p: &Poly) -> Mask {
        let mut acc = ZERO;
        for (mono, c) in p.terms() {
            let mut m = sign_mask(c);
            for (x, e) in mono.factors() {
                let vm = self.var_mask(x);
                m = mul_mask(m, pow_mask(vm, *e));
            }
            acc = add_mask(acc, m);
            if acc == ALL {
                return ALL;
            }
        }
        acc
    }
}

pub fn pow_mask_pub(m: Mask, e: u32) -> Mask {
    pow_mask(m, e)
}

fn pow_mask(m: Mask, e: u32) -> Mask {
    if e == 0 {
        return POS;
    }
    if e % 2 == 0 {
        let mut out = 0;
        if m & ZERO != 0 {
            out |= ZERO;
        }
        if m & (NEG | POS) != 0 {
            out |= POS;
        }
        out
    } else {
        m
    }
}

pub fn mul_mask(a: Mask, b: Mask) -> Mask {
    let mut out = 0;
    for sa in [NEG, ZERO, POS] {
        if a & sa == 0 {
            continue;
        }
        for sb in [NEG, ZERO, POS] {
            if b & sb == 0 {
                continue;
            }
            out |= match (sa, sb) {
                (ZERO, _) | (_, ZERO) => ZERO,
                (x, y) if x == y => POS,
                _ => NEG,
            };
        }
    }
    out
}

pub fn add_mask(a: Mask, b: Mask) -> Mask {
    let mut out = 0;
    for sa in [NEG, ZERO, POS] {
        if a & sa == 0 {
            continue;
        }
        for sb in [NEG, ZERO, POS] {
            if b & sb == 0 {
                continue;
            }
            out |= match (sa, sb) {
                (ZERO, y) => y,
                (x, ZERO) => x,
                (x, y) if x == y => x,
                _ => ALL,
            };
        }
    }
    out
}
