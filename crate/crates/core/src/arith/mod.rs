//! Real arithmetic: exact polynomials, quantifier elimination for the linear
//! and quadratic fragments, decision of sentences, simplification and exact
//! evaluation.

mod fm;
pub mod poly;
pub mod qf;
mod simplify;
mod vs;

use std::collections::BTreeMap;

use num_rational::BigRational;
use thiserror::Error;

use crate::syntax::{free_vars, Formula, Term, Var, VarSet};

pub use poly::{normalize_poly, Monomial, Poly};
pub use qf::{Facts, Mask, Qf};
pub use simplify::{simplify, simplify_in};
pub use vs::Budget;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by non-constant or zero term {0}")]
    Division(String),
    #[error("quantifier in a quantifier-free position")]
    Quantified,
    #[error("modal formula given to real arithmetic")]
    Modal,
    #[error("variable {var} occurs with degree {degree}; quantifier elimination supports degree at most 2")]
    UnsupportedDegree { var: String, degree: u32 },
    #[error("variable {0} does not occur linearly with a constant coefficient")]
    NotLinear(String),
    #[error("arithmetic timed out")]
    Timeout,
    #[error("formula has free variables {0}")]
    NotClosed(String),
    #[error("cannot lift: {0}")]
    Lift(String),
    #[error("no value for variable {0}")]
    Unassigned(String),
}

enum Quant {
    Exists,
    Forall,
}

/// Pulls nested quantifiers of the same kind into one block where the
/// connective permits it, so the elimination order can be chosen freely.
fn collect_block(kind: &Quant, x: &Var, body: &Formula) -> (Vec<Var>, Formula) {
    let mut vars = vec![x.clone()];
    let mut body = body.clone();
    loop {
        let next = match (kind, &body) {
            (Quant::Exists, Formula::Exists(y, b)) | (Quant::Forall, Formula::Forall(y, b)) => {
                Some((y.clone(), (**b).clone()))
            }
            (Quant::Forall, Formula::Imply(a, c)) => match &**c {
                Formula::Forall(y, b) if !free_vars(&**a).contains(y) && !vars.contains(y) => {
                    Some((y.clone(), Formula::imply((**a).clone(), (**b).clone())))
                }
                _ => None,
            },
            (Quant::Exists, Formula::And(a, c)) => match &**c {
                Formula::Exists(y, b) if !free_vars(&**a).contains(y) && !vars.contains(y) => {
                    Some((y.clone(), Formula::and((**a).clone(), (**b).clone())))
                }
                _ => None,
            },
            _ => None,
        };
        match next {
            Some((y, b)) => {
                if !vars.contains(&y) {
                    vars.push(y);
                }
                body = b;
            }
            None => return (vars, body),
        }
    }
}

fn qe_qf(f: &Formula, budget: &Budget) -> Result<Qf, ArithError> {
    Ok(match f {
        Formula::Exists(x, b) => {
            let (vars, body) = collect_block(&Quant::Exists, x, b);
            let q = qe_qf(&body, budget)?;
            vs::exists_block(&vars, &q, &Facts::new(), budget)?
        }
        Formula::Forall(x, b) => {
            let (vars, body) = collect_block(&Quant::Forall, x, b);
            let q = qe_qf(&body, budget)?;
            vs::exists_block(&vars, &q.negate(), &Facts::new(), budget)?.negate()
        }
        Formula::Not(a) => qe_qf(a, budget)?.negate(),
        Formula::And(a, b) => Qf::and([qe_qf(a, budget)?, qe_qf(b, budget)?]),
        Formula::Or(a, b) => Qf::or([qe_qf(a, budget)?, qe_qf(b, budget)?]),
        Formula::Imply(a, b) => Qf::or([qe_qf(a, budget)?.negate(), qe_qf(b, budget)?]),
        Formula::Equiv(a, b) => {
            let (a, b) = (qe_qf(a, budget)?, qe_qf(b, budget)?);
            Qf::or([Qf::and([a.clone(), b.clone()]), Qf::and([a.negate(), b.negate()])])
        }
        Formula::Box(..) | Formula::Diamond(..) => return Err(ArithError::Modal),
        atom => qf::from_formula(atom)?,
    })
}

/// Quantifier elimination into the internal normal form.
pub fn qe_normal(f: &Formula, budget: &Budget) -> Result<Qf, ArithError> {
    Ok(simplify(&qe_qf(f, budget)?))
}

/// A quantifier-free formula equivalent to `f` over the reals.
pub fn qe(f: &Formula) -> Result<Formula, ArithError> {
    Ok(qe_normal(f, &Budget::unlimited())?.to_formula())
}

/// Decides a closed first-order sentence.
pub fn decide(f: &Formula) -> Result<bool, ArithError> {
    decide_with(f, &Budget::unlimited())
}

pub fn decide_with(f: &Formula, budget: &Budget) -> Result<bool, ArithError> {
    let fv = free_vars(f);
    if !fv.is_empty() {
        return Err(ArithError::NotClosed(
            fv.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
        ));
    }
    match qe_normal(f, budget)? {
        Qf::True => Ok(true),
        Qf::False => Ok(false),
        other => unreachable!("closed formula reduced to {other:?}"),
    }
}

/// Universal closure.
pub fn forall_closure(f: &Formula) -> Formula {
    free_vars(f).into_iter().rev().fold(f.clone(), |acc, x| Formula::forall(x, acc))
}

/// Equivalence-preserving simplification of a quantifier-free formula.
pub fn simplify_formula(f: &Formula) -> Result<Formula, ArithError> {
    Ok(simplify(&qf::from_formula(f)?).to_formula())
}

/// Quantifier elimination by Fourier-Motzkin; every quantified variable must
/// occur linearly with constant coefficients.
pub fn qe_fm(f: &Formula) -> Result<Formula, ArithError> {
    fn go(f: &Formula) -> Result<Qf, ArithError> {
        Ok(match f {
            Formula::Exists(x, b) => fm::exists_fm(x, &go(b)?)?,
            Formula::Forall(x, b) => fm::exists_fm(x, &go(b)?.negate())?.negate(),
            Formula::Not(a) => go(a)?.negate(),
            Formula::And(a, b) => Qf::and([go(a)?, go(b)?]),
            Formula::Or(a, b) => Qf::or([go(a)?, go(b)?]),
            Formula::Imply(a, b) => Qf::or([go(a)?.negate(), go(b)?]),
            Formula::Equiv(a, b) => {
                let (a, b) = (go(a)?, go(b)?);
                Qf::or([Qf::and([a.clone(), b.clone()]), Qf::and([a.negate(), b.negate()])])
            }
            Formula::Box(..) | Formula::Diamond(..) => return Err(ArithError::Modal),
            atom => qf::from_formula(atom)?,
        })
    }
    Ok(simplify(&go(f)?).to_formula())
}

/// Quantifier elimination for linear formulas by test-point substitution;
/// rejects quantified variables that occur nonlinearly.
pub fn qe_lw(f: &Formula) -> Result<Formula, ArithError> {
    fn check(f: &Formula) -> Result<(), ArithError> {
        match f {
            Formula::Exists(x, b) | Formula::Forall(x, b) => {
                let q = qe_qf(b, &Budget::unlimited())?;
                let mut ok = true;
                q.visit_atoms(&mut |p, _| {
                    let cs = p.coeffs_in(x);
                    ok &= cs.len() <= 2 && cs.get(1).map_or(true, Poly::is_constant);
                });
                if !ok {
                    return Err(ArithError::NotLinear(x.to_string()));
                }
                check(b)
            }
            Formula::Not(a) => check(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                check(a)?;
                check(b)
            }
            _ => Ok(()),
        }
    }
    check(f)?;
    qe(f)
}

/// Quantifier elimination on an abstraction, re-instantiated: `abstracted`
/// uses fresh variables standing for the terms of `instance`. Sound when no
/// quantified variable occurs in an instantiating term.
pub fn qe_lift(abstracted: &Formula, instance: &[(Var, Term)]) -> Result<Formula, ArithError> {
    let bound = quantified_vars(abstracted);
    for (v, t) in instance {
        if bound.contains(v) {
            return Err(ArithError::Lift(format!("abstraction variable {v} is quantified")));
        }
        if let Some(y) = t.vars().intersection(&bound).next() {
            return Err(ArithError::Lift(format!(
                "quantified variable {y} occurs inside the abstracted term {t}"
            )));
        }
    }
    let q = qe(abstracted)?;
    let map: BTreeMap<Var, Term> = instance.iter().cloned().collect();
    Ok(q.map_terms(&|t| t.replace(&|v| map.get(v).cloned())))
}

fn quantified_vars(f: &Formula) -> VarSet {
    let mut out = VarSet::new();
    fn go(f: &Formula, out: &mut VarSet) {
        match f {
            Formula::Forall(x, b) | Formula::Exists(x, b) => {
                out.insert(x.clone());
                go(b, out);
            }
            Formula::Not(a) => go(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                go(a, out);
                go(b, out);
            }
            _ => {}
        }
    }
    go(f, &mut out);
    out
}

/// Exact truth value of a first-order formula in a rational state.
/// Quantifiers are eliminated first.
pub fn eval_exact(f: &Formula, state: &BTreeMap<Var, BigRational>) -> Result<bool, ArithError> {
    let q = if f.is_quantifier_free_arith() {
        qf::from_formula(f)?
    } else {
        qe_normal(f, &Budget::unlimited())?
    };
    q.eval(&|v| state.get(v).cloned()).ok_or_else(|| {
        let missing = q.vars().into_iter().find(|v| !state.contains_key(v));
        ArithError::Unassigned(missing.map(|v| v.to_string()).unwrap_or_default())
    })
}

/// Exact value of a term in a rational state.
pub fn eval_term(t: &Term, state: &BTreeMap<Var, BigRational>) -> Result<BigRational, ArithError> {
    let p = normalize_poly(t)?;
    p.eval(&|v| state.get(v).cloned()).ok_or_else(|| {
        let missing = p.vars().into_iter().find(|v| !state.contains_key(v));
        ArithError::Unassigned(missing.map(|v| v.to_string()).unwrap_or_default())
    })
}
