//! Context-sensitive simplification of quantifier-free formulas.

use std::collections::BTreeMap;

use super::poly::Poly;
use super::qf::{flip, pow_mask_pub, Facts, Mask, Qf, ALL, NEG, POS};

/// Simplifies without outside assumptions.
pub fn simplify(q: &Qf) -> Qf {
    simplify_in(q, &Facts::new())
}

/// Simplifies under the assumption that `facts` hold. The result is
/// equivalent to `q` in every state satisfying `facts`.
pub fn simplify_in(q: &Qf, facts: &Facts) -> Qf {
    if facts.is_contradictory() {
        return Qf::False;
    }
    match q {
        Qf::True | Qf::False => q.clone(),
        Qf::Atom(p, m) => simplify_atom(p, *m, facts),
        Qf::And(ps) => simplify_and(ps, facts),
        Qf::Or(ps) => simplify_or(ps, facts),
    }
}

fn simplify_atom(p: &Poly, m: Mask, facts: &Facts) -> Qf {
    let known = facts.mask_of(p);
    if known & m == 0 {
        return Qf::False;
    }
    if known & !m & ALL == 0 {
        return Qf::True;
    }
    let mc = p.monomial_content();
    if !mc.is_one() {
        let mut divisor = Vec::new();
        let mut m2 = m;
        for (x, e) in mc.factors() {
            let vm = pow_mask_pub(facts.mask_of(&Poly::var(x)), *e);
            if vm == POS {
                divisor.push((x.clone(), *e));
            } else if vm == NEG {
                divisor.push((x.clone(), *e));
                m2 = flip(m2);
            }
        }
        if !divisor.is_empty() {
            let d = super::poly::Monomial::from_factors(divisor);
            let q = p.div_monomial(&d);
            return simplify_atom_plain(Qf::atom(q, m2), facts);
        }
    }
    let refined = m & known;
    Qf::Atom(p.clone(), refined)
}

fn simplify_atom_plain(q: Qf, facts: &Facts) -> Qf {
    match q {
        Qf::Atom(p, m) => simplify_atom(&p, m, facts),
        q => q,
    }
}

fn merge_atoms(items: Vec<Qf>, conj: bool) -> Vec<Qf> {
    let mut atoms: BTreeMap<Poly, Mask> = BTreeMap::new();
    let mut rest = Vec::new();
    for it in items {
        match it {
            Qf::Atom(p, m) => {
                let e = atoms.entry(p).or_insert(if conj { ALL } else { 0 });
                if conj {
                    *e &= m;
                } else {
                    *e |= m;
                }
            }
            other => rest.push(other),
        }
    }
    let mut out: Vec<Qf> = atoms.into_iter().map(|(p, m)| Qf::atom_canonical(p, m)).collect();
    out.extend(rest);
    out
}

fn simplify_and(ps: &[Qf], facts: &Facts) -> Qf {
    let mut items: Vec<Qf> = match Qf::and(ps.iter().cloned()) {
        Qf::And(v) => merge_atoms(v, true),
        other => return simplify_in(&other, facts),
    };
    for _ in 0..4 {
        let mut changed = false;
        for i in 0..items.len() {
            let mut f = facts.clone();
            for (j, it) in items.iter().enumerate() {
                if j != i {
                    f.add_qf(it);
                }
            }
            if f.is_contradictory() {
                return Qf::False;
            }
            let new = simplify_in(&items[i], &f);
            if new == Qf::False {
                return Qf::False;
            }
            if new != items[i] {
                items[i] = new;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        items = match Qf::and(items) {
            Qf::And(v) => merge_atoms(v, true),
            other => return simplify_in(&other, facts),
        };
    }
    Qf::and(items)
}

fn simplify_or(ps: &[Qf], facts: &Facts) -> Qf {
    let mut items: Vec<Qf> = match Qf::or(ps.iter().cloned()) {
        Qf::Or(v) => merge_atoms(v, false),
        other => return simplify_in(&other, facts),
    };
    for _ in 0..4 {
        let mut changed = false;
        for i in 0..items.len() {
            let mut f = facts.clone();
            for (j, it) in items.iter().enumerate() {
                if j != i {
                    if let Qf::Atom(p, m) = it {
                        f.add(p, ALL & !m);
                    }
                }
            }
            let new = if f.is_contradictory() {
                // The other disjuncts already cover every state.
                return Qf::True;
            } else {
                simplify_in(&items[i], &f)
            };
            if new == Qf::True {
                return Qf::True;
            }
            if new != items[i] {
                items[i] = new;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        items = match Qf::or(items) {
            Qf::Or(v) => merge_atoms(v, false),
            other => return simplify_in(&other, facts),
        };
    }
    Qf::or(items)
}
