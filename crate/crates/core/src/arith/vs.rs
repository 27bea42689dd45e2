//! Quantifier elimination by virtual substitution for variables of degree at
//! most two.

use std::time::Instant;

use crate::syntax::Var;

use super::poly::Poly;
use super::qf::{Facts, Mask, Qf, NEG, POS, ZERO};
use super::simplify::simplify_in;
use super::ArithError;

/// Deadline shared by one elimination run.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget { deadline: None }
    }

    pub fn check(&self) -> Result<(), ArithError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(ArithError::Timeout),
            _ => Ok(()),
        }
    }
}

/// The expression `(a + b*sqrt(c)) / d`, with `d` nonzero and `c`
/// nonnegative under the guard it is paired with.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Vt {
    a: Poly,
    b: Poly,
    c: Poly,
    d: Poly,
}

impl Vt {
    fn new(a: Poly, b: Poly, c: Poly, d: Poly) -> Vt {
        let negative = d.constant_value().is_some_and(|v| v < num_traits::Zero::zero());
        if negative {
            Vt { a: -&a, b: -&b, c, d: -&d }
        } else {
            Vt { a, b, c, d }
        }
    }

    fn is_rational(&self) -> bool {
        self.b.is_zero() || self.c.is_zero()
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Candidate {
    guard: Qf,
    vt: Vt,
    eps: bool,
}

fn poly_of_qf_atom(p: &Poly, m: Mask) -> Qf {
    Qf::atom(p.clone(), m)
}

/// `(A + B*sqrt(C)) ∈ m` for `C >= 0`.
fn sqrt_sign(a: &Poly, b: &Poly, c: &Poly, m: Mask) -> Qf {
    if b.is_zero() || c.is_zero() {
        return Qf::atom(a.clone(), m);
    }
    let disc = &(a * a) - &(&(b * b) * c);
    let at = |p: &Poly, m: Mask| poly_of_qf_atom(p, m);
    let neg = || {
        Qf::or([
            Qf::and([at(a, NEG), Qf::or([at(b, NEG | ZERO), at(&disc, POS)])]),
            Qf::and([at(b, NEG), at(&disc, NEG)]),
        ])
    };
    let pos = || {
        Qf::or([
            Qf::and([at(a, POS), Qf::or([at(b, POS | ZERO), at(&disc, POS)])]),
            Qf::and([at(b, POS), at(&disc, NEG)]),
        ])
    };
    let zero = || Qf::and([at(&(a * b), NEG | ZERO), at(&disc, ZERO)]);
    let le = || {
        Qf::or([
            Qf::and([at(a, NEG | ZERO), at(b, NEG | ZERO)]),
            Qf::and([at(a, NEG | ZERO), at(&disc, POS | ZERO)]),
            Qf::and([at(b, NEG | ZERO), at(&disc, NEG | ZERO)]),
        ])
    };
    let ge = || {
        Qf::or([
            Qf::and([at(a, POS | ZERO), at(b, POS | ZERO)]),
            Qf::and([at(a, POS | ZERO), at(&disc, POS | ZERO)]),
            Qf::and([at(b, POS | ZERO), at(&disc, NEG | ZERO)]),
        ])
    };
    match m {
        NEG => neg(),
        POS => pos(),
        ZERO => zero(),
        m if m == NEG | ZERO => le(),
        m if m == POS | ZERO => ge(),
        m if m == NEG | POS => zero().negate(),
        _ => unreachable!(),
    }
}

/// `p[x := vt] ∈ m`.
fn subst_point(p: &Poly, m: Mask, x: &Var, vt: &Vt) -> Qf {
    if !p.mentions(x) {
        return Qf::atom(p.clone(), m);
    }
    if vt.is_rational() {
        if let Some(dc) = vt.d.constant_value() {
            let q = vt.a.scale(&dc.recip());
            return Qf::atom(p.subst(x, &q), m);
        }
    }
    let cs = p.coeffs_in(x);
    let zero = Poly::zero();
    let p0 = &cs[0];
    let p1 = cs.get(1).unwrap_or(&zero);
    let p2 = cs.get(2).unwrap_or(&zero);
    let (a, b, c, d) = (&vt.a, &vt.b, &vt.c, &vt.d);
    let d_const = d.constant_value().is_some();
    let (big_a, big_b) = if p2.is_zero() && d_const {
        // Multiply by the positive constant d.
        (&(p1 * a) + &(p0 * d), p1 * b)
    } else {
        // Multiply by d^2.
        let a2 = &(a * a) + &(&(b * b) * c);
        let big_a = &(&(p2 * &a2) + &(&(p1 * a) * d)) + &(p0 * &(d * d));
        let big_b = &(p2 * &(a * b)).scale(&super::poly::rat(2)) + &(&(p1 * b) * d);
        (big_a, big_b)
    };
    sqrt_sign(&big_a, &big_b, c, m)
}

/// `p[x := vt + ε] ∈ m` for an infinitesimal ε > 0.
fn subst_eps(p: &Poly, m: Mask, x: &Var, vt: &Vt) -> Qf {
    if !p.mentions(x) {
        return Qf::atom(p.clone(), m);
    }
    let mut derivs = vec![p.clone()];
    loop {
        let next = derivs.last().expect("nonempty").derivative(x);
        if next.is_zero() {
            break;
        }
        derivs.push(next);
    }
    // Sign of p just right of the point is the sign of the first
    // nonvanishing derivative.
    let strict = |s: Mask| -> Qf {
        let mut acc = Qf::False;
        for k in (0..derivs.len()).rev() {
            let here = subst_point(&derivs[k], s, x, vt);
            acc = if k + 1 == derivs.len() {
                here
            } else {
                Qf::or([here, Qf::and([subst_point(&derivs[k], ZERO, x, vt), acc])])
            };
        }
        acc
    };
    let zero = || Qf::and(derivs.iter().map(|d| subst_point(d, ZERO, x, vt)));
    let mut parts = Vec::new();
    if m & NEG != 0 {
        parts.push(strict(NEG));
    }
    if m & POS != 0 {
        parts.push(strict(POS));
    }
    if m & ZERO != 0 {
        parts.push(zero());
    }
    Qf::or(parts)
}

/// `p ∈ m` at x = -∞.
fn subst_minus_inf(p: &Poly, m: Mask, x: &Var) -> Qf {
    if !p.mentions(x) {
        return Qf::atom(p.clone(), m);
    }
    let cs = p.coeffs_in(x);
    // Coefficients ordered by dominance, with the sign of x^i at -∞.
    let signed: Vec<Poly> = cs
        .iter()
        .enumerate()
        .rev()
        .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
        .collect();
    let strict = |s: Mask| -> Qf {
        let mut acc = Qf::False;
        for k in (0..signed.len()).rev() {
            let here = Qf::atom(signed[k].clone(), s);
            acc = if k + 1 == signed.len() {
                here
            } else {
                Qf::or([here, Qf::and([Qf::atom(signed[k].clone(), ZERO), acc])])
            };
        }
        acc
    };
    let mut parts = Vec::new();
    if m & NEG != 0 {
        parts.push(strict(NEG));
    }
    if m & POS != 0 {
        parts.push(strict(POS));
    }
    if m & ZERO != 0 {
        parts.push(Qf::and(signed.iter().map(|c| Qf::atom(c.clone(), ZERO))));
    }
    Qf::or(parts)
}

fn substitute(q: &Qf, x: &Var, cand: Option<&Candidate>) -> Qf {
    q.map_atoms(&mut |p, m| match cand {
        None => subst_minus_inf(p, m, x),
        Some(c) if c.eps => subst_eps(p, m, x, &c.vt),
        Some(c) => subst_point(p, m, x, &c.vt),
    })
}

fn strict_sign(m: Mask) -> Option<Mask> {
    match m {
        POS | NEG => Some(m),
        _ => None,
    }
}

fn opposite(s: Mask) -> Mask {
    if s == POS {
        NEG
    } else {
        POS
    }
}

/// Test points contributed by one atom under the left-endpoint scheme.
fn atom_candidates(p: &Poly, m: Mask, x: &Var, facts: &Facts, out: &mut Vec<Candidate>) {
    let cs = p.coeffs_in(x);
    let has0 = m & ZERO != 0;
    let linear = |p0: &Poly, p1: &Poly, guard: Qf, out: &mut Vec<Candidate>| {
        let vt = Vt::new(-p0, Poly::zero(), Poly::zero(), p1.clone());
        let s = strict_sign(facts.mask_of(p1));
        let (exact, eps) = match s {
            Some(s) => (has0 && m & opposite(s) == 0, !has0 && m & s != 0),
            None => (has0, !has0),
        };
        let guard = Qf::and([guard, Qf::atom(p1.clone(), NEG | POS)]);
        if exact {
            out.push(Candidate { guard: guard.clone(), vt: vt.clone(), eps: false });
        }
        if eps {
            out.push(Candidate { guard, vt, eps: true });
        }
    };
    match cs.len() {
        2 => linear(&cs[0], &cs[1], Qf::True, out),
        3 => {
            let (p0, p1, p2) = (&cs[0], &cs[1], &cs[2]);
            let p2_mask = facts.mask_of(p2);
            if p2_mask & ZERO != 0 {
                linear(p0, p1, Qf::atom(p2.clone(), ZERO), out);
            }
            let disc = &(p1 * p1) - &(&(p0 * p2).scale(&super::poly::rat(4)));
            let guard = Qf::and([Qf::atom(p2.clone(), NEG | POS), Qf::atom(disc.clone(), POS | ZERO)]);
            let two_p2 = p2.scale(&super::poly::rat(2));
            let root = |sign: i64| Vt::new(-p1, Poly::int(sign), disc.clone(), two_p2.clone());
            let s = strict_sign(p2_mask & (NEG | POS));
            let s = if p2_mask & ZERO != 0 { None } else { s };
            let mut push = |vt: Vt, exact: bool, eps: bool| {
                if exact {
                    out.push(Candidate { guard: guard.clone(), vt: vt.clone(), eps: false });
                }
                if eps {
                    out.push(Candidate { guard: guard.clone(), vt, eps: true });
                }
            };
            match s {
                Some(s) => {
                    // Dividing by 2*p2 reverses the order of the roots when p2 < 0.
                    let (small, large) = if s == POS { (root(-1), root(1)) } else { (root(1), root(-1)) };
                    push(small, has0 && m & s == 0, !has0);
                    push(large, has0, !has0 && m & s != 0);
                }
                None => {
                    push(root(-1), has0, !has0);
                    push(root(1), has0, !has0);
                }
            }
        }
        _ => {}
    }
}

fn conjuncts(q: &Qf) -> Vec<&Qf> {
    match q {
        Qf::And(ps) => ps.iter().collect(),
        q => vec![q],
    }
}

fn candidates(q: &Qf, x: &Var, facts: &Facts) -> Vec<Candidate> {
    let mut out = Vec::new();
    q.visit_atoms(&mut |p, m| {
        if p.mentions(x) {
            atom_candidates(p, m, x, facts, &mut out);
        }
    });
    out.sort();
    out.dedup();
    out
}

/// Candidates from an equation whose polynomial cannot vanish identically in
/// `x`: every solution is one of its roots.
fn gauss_candidates(q: &Qf, x: &Var, facts: &Facts) -> Option<Vec<Candidate>> {
    let mut best: Option<(u32, &Poly)> = None;
    for c in conjuncts(q) {
        if let Qf::Atom(p, ZERO) = c {
            let d = p.degree_in(x);
            if d == 0 {
                continue;
            }
            let cs = p.coeffs_in(x);
            let nonvanishing = cs[1..].iter().any(|c| facts.mask_of(c) & ZERO == 0);
            if nonvanishing && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, p));
            }
        }
    }
    let (_, p) = best?;
    let mut out = Vec::new();
    let cs = p.coeffs_in(x);
    match cs.len() {
        2 => out.push(Candidate {
            guard: Qf::atom(cs[1].clone(), NEG | POS),
            vt: Vt::new(-&cs[0], Poly::zero(), Poly::zero(), cs[1].clone()),
            eps: false,
        }),
        3 => {
            let (p0, p1, p2) = (&cs[0], &cs[1], &cs[2]);
            if facts.mask_of(p2) & ZERO != 0 {
                out.push(Candidate {
                    guard: Qf::and([Qf::atom(p2.clone(), ZERO), Qf::atom(p1.clone(), NEG | POS)]),
                    vt: Vt::new(-p0, Poly::zero(), Poly::zero(), p1.clone()),
                    eps: false,
                });
            }
            let disc = &(p1 * p1) - &(&(p0 * p2).scale(&super::poly::rat(4)));
            let guard = Qf::and([Qf::atom(p2.clone(), NEG | POS), Qf::atom(disc.clone(), POS | ZERO)]);
            for sign in [-1, 1] {
                out.push(Candidate {
                    guard: guard.clone(),
                    vt: Vt::new(-p1, Poly::int(sign), disc.clone(), p2.scale(&super::poly::rat(2))),
                    eps: false,
                });
            }
        }
        _ => return None,
    }
    Some(out)
}

fn reflect(q: &Qf, x: &Var) -> Qf {
    let minus_x = -&Poly::var(x);
    q.map_atoms(&mut |p, m| Qf::atom(p.subst(x, &minus_x), m))
}

fn max_degree(q: &Qf, x: &Var) -> u32 {
    let mut d = 0;
    q.visit_atoms(&mut |p, _| d = d.max(p.degree_in(x)));
    d
}

fn exponent_gcd(q: &Qf, x: &Var) -> u32 {
    use num_integer::Integer;
    let mut g = 0u32;
    q.visit_atoms(&mut |p, _| g = g.gcd(&p.exponent_gcd(x)));
    g
}

fn distribute(q: &Qf, x: &Var, limit: usize) -> Option<Vec<Qf>> {
    let Qf::And(ps) = q else { return None };
    let mut branches: Vec<Vec<Qf>> = vec![Vec::new()];
    for p in ps {
        match p {
            Qf::Or(alts) if p.mentions(x) => {
                if branches.len() * alts.len() > limit {
                    return None;
                }
                branches = branches
                    .into_iter()
                    .flat_map(|b| {
                        alts.iter().map(move |a| {
                            let mut b = b.clone();
                            b.push(a.clone());
                            b
                        })
                    })
                    .collect();
            }
            p => branches.iter_mut().for_each(|b| b.push(p.clone())),
        }
    }
    if branches.len() <= 1 {
        return None;
    }
    Some(branches.into_iter().map(Qf::and).collect())
}

/// Eliminates `∃x` from `q` under `facts`.
pub fn exists(x: &Var, q: &Qf, facts: &Facts, budget: &Budget) -> Result<Qf, ArithError> {
    budget.check()?;
    let q = simplify_in(q, facts);
    if !q.mentions(x) {
        return Ok(q);
    }
    match &q {
        Qf::Or(ps) => {
            let mut out = Vec::new();
            for p in ps {
                let r = exists(x, p, facts, budget)?;
                if r == Qf::True {
                    return Ok(Qf::True);
                }
                out.push(r);
            }
            Ok(simplify_in(&Qf::or(out), facts))
        }
        Qf::And(ps) => {
            let (with, without): (Vec<Qf>, Vec<Qf>) = ps.iter().cloned().partition(|p| p.mentions(x));
            if without.is_empty() {
                return exists_core(x, &q, facts, budget);
            }
            let mut local = facts.clone();
            without.iter().for_each(|p| local.add_qf(p));
            let r = exists_core(x, &Qf::and(with), &local, budget)?;
            Ok(simplify_in(&Qf::and(without.into_iter().chain([r])), facts))
        }
        _ => exists_core(x, &q, facts, budget),
    }
}

fn exists_core(x: &Var, q: &Qf, facts: &Facts, budget: &Budget) -> Result<Qf, ArithError> {
    let mut q = q.clone();
    let d = max_degree(&q, x);
    if d > 2 {
        let g = exponent_gcd(&q, x);
        if g > 1 && d / g <= 2 {
            q = q.map_atoms(&mut |p, m| Qf::atom(p.deflate(x, g), m));
            if g % 2 == 0 {
                q = Qf::and([q, Qf::atom(Poly::var(x), POS | ZERO)]);
            }
        } else {
            return Err(ArithError::UnsupportedDegree { var: x.to_string(), degree: d });
        }
    }
    if let Some(branches) = distribute(&q, x, 16) {
        let mut out = Vec::new();
        for b in branches {
            let r = exists(x, &b, facts, budget)?;
            if r == Qf::True {
                return Ok(Qf::True);
            }
            out.push(r);
        }
        return Ok(simplify_in(&Qf::or(out), facts));
    }

    let (q, cands, with_inf) = match gauss_candidates(&q, x, facts) {
        Some(c) => (q, c, false),
        None => {
            let lower = candidates(&q, x, facts);
            let reflected = reflect(&q, x);
            let upper = candidates(&reflected, x, facts);
            if upper.len() < lower.len() {
                (reflected, upper, true)
            } else {
                (q, lower, true)
            }
        }
    };

    let mut out = Vec::new();
    if with_inf {
        let r = simplify_in(&substitute(&q, x, None), facts);
        if r == Qf::True {
            return Ok(Qf::True);
        }
        out.push(r);
    }
    for c in &cands {
        budget.check()?;
        let guard = simplify_in(&c.guard, facts);
        if guard == Qf::False {
            continue;
        }
        let mut local = facts.clone();
        local.add_qf(&guard);
        let body = simplify_in(&substitute(&q, x, Some(c)), &local);
        let r = simplify_in(&Qf::and([guard, body]), facts);
        if r == Qf::True {
            return Ok(Qf::True);
        }
        out.push(r);
    }
    Ok(simplify_in(&Qf::or(out), facts))
}

/// Heuristic cost of eliminating `x` next: prefer low degree, an equation
/// to eliminate by, and few occurrences.
fn cost(q: &Qf, x: &Var) -> (u32, u32, u32, usize) {
    let d = max_degree(q, x);
    let eff = if d > 2 {
        let g = exponent_gcd(q, x).max(1);
        if d / g <= 2 {
            d / g
        } else {
            100 + d
        }
    } else {
        d
    };
    let mut has_eq = 1;
    let mut count = 0;
    q.visit_atoms(&mut |p, m| {
        if p.mentions(x) {
            count += 1;
            if m == ZERO && p.degree_in(x) == 1 {
                has_eq = 0;
            }
        }
    });
    (u32::from(eff > 2), has_eq, eff, count)
}

/// Eliminates `∃x1...∃xn` from `q`.
pub fn exists_block(vars: &[Var], q: &Qf, facts: &Facts, budget: &Budget) -> Result<Qf, ArithError> {
    budget.check()?;
    let q = simplify_in(q, facts);
    let live: Vec<&Var> = vars.iter().filter(|v| q.mentions(v)).collect();
    if live.is_empty() {
        return Ok(q);
    }
    if let Qf::Or(ps) = &q {
        let mut out = Vec::new();
        for p in ps {
            let r = exists_block(vars, p, facts, budget)?;
            if r == Qf::True {
                return Ok(Qf::True);
            }
            out.push(r);
        }
        return Ok(simplify_in(&Qf::or(out), facts));
    }
    if let Qf::And(ps) = &q {
        let (with, without): (Vec<Qf>, Vec<Qf>) =
            ps.iter().cloned().partition(|p| live.iter().any(|v| p.mentions(v)));
        if !without.is_empty() {
            let mut local = facts.clone();
            without.iter().for_each(|p| local.add_qf(p));
            let r = exists_block(vars, &Qf::and(with), &local, budget)?;
            return Ok(simplify_in(&Qf::and(without.into_iter().chain([r])), facts));
        }
    }
    let mut order: Vec<&Var> = live.clone();
    order.sort_by_key(|v| cost(&q, v));
    let mut last = None;
    // Another order may keep degrees low enough.
    for x in order {
        let attempt = exists(x, &q, facts, budget).and_then(|r| {
            let rest: Vec<Var> = vars.iter().filter(|v| *v != x).cloned().collect();
            exists_block(&rest, &r, facts, budget)
        });
        match attempt {
            Err(e @ ArithError::UnsupportedDegree { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("some variable was tried"))
}
