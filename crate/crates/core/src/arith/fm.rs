//! Fourier-Motzkin elimination for linear constraints with constant
//! coefficients, kept as an independent cross-check of virtual substitution.

use num_traits::Signed;

use crate::syntax::Var;

use super::poly::Poly;
use super::qf::{Qf, NEG, POS, ZERO};
use super::simplify::simplify;
use super::ArithError;

fn dnf(q: &Qf) -> Vec<Vec<(Poly, u8)>> {
    match q {
        Qf::True => vec![vec![]],
        Qf::False => vec![],
        Qf::Atom(p, m) => {
            // Split p != 0 into p < 0 or p > 0.
            if *m == NEG | POS {
                vec![vec![(p.clone(), NEG)], vec![(p.clone(), POS)]]
            } else {
                vec![vec![(p.clone(), *m)]]
            }
        }
        Qf::Or(ps) => ps.iter().flat_map(dnf).collect(),
        Qf::And(ps) => {
            let mut acc = vec![vec![]];
            for p in ps {
                let d = dnf(p);
                acc = acc
                    .into_iter()
                    .flat_map(|c: Vec<(Poly, u8)>| {
                        d.iter().map(move |e| {
                            let mut c = c.clone();
                            c.extend(e.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            acc
        }
    }
}

/// Eliminates `∃x` from a conjunction of linear atoms.
fn eliminate_conj(x: &Var, atoms: &[(Poly, u8)]) -> Result<Qf, ArithError> {
    let mut rest = Vec::new();
    // Normalized bounds: coefficient of x is +1, the atom reads x + r ∈ m.
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut eqs = Vec::new();
    for (p, m) in atoms {
        let cs = p.coeffs_in(x);
        match cs.len() {
            1 => rest.push(Qf::atom(p.clone(), *m)),
            2 => {
                let Some(k) = cs[1].constant_value() else {
                    return Err(ArithError::NotLinear(x.to_string()));
                };
                let r = cs[0].scale(&k.recip());
                let m = if k.is_negative() { super::qf::flip(*m) } else { *m };
                // x + r ∈ m  <=>  x ∈ m relative to -r.
                let bound = -&r;
                match m {
                    ZERO => eqs.push(bound),
                    NEG => upper.push((bound, true)),
                    m if m == NEG | ZERO => upper.push((bound, false)),
                    POS => lower.push((bound, true)),
                    m if m == POS | ZERO => lower.push((bound, false)),
                    _ => return Err(ArithError::NotLinear(x.to_string())),
                }
            }
            _ => return Err(ArithError::NotLinear(x.to_string())),
        }
    }
    if let Some(e) = eqs.first() {
        let mut out = rest;
        for (p, m) in atoms {
            if p.mentions(x) {
                out.push(Qf::atom(p.subst(x, e), *m));
            }
        }
        return Ok(Qf::and(out));
    }
    let mut out = rest;
    for (l, ls) in &lower {
        for (u, us) in &upper {
            // l < x < u is satisfiable iff l < u (≤ when both bounds are weak).
            let m = if *ls || *us { NEG } else { NEG | ZERO };
            out.push(Qf::atom(l - u, m));
        }
    }
    Ok(Qf::and(out))
}

/// Eliminates `∃x` from a linear formula with constant coefficients.
pub fn exists_fm(x: &Var, q: &Qf) -> Result<Qf, ArithError> {
    let mut out = Vec::new();
    for conj in dnf(q) {
        out.push(eliminate_conj(x, &conj)?);
    }
    Ok(simplify(&Qf::or(out)))
}
