//! Syntactic total derivation, differential substitution, weak negation and
//! ε-strengthening.

use thiserror::Error;

use crate::syntax::{Formula, Rel, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivError {
    #[error("cannot derive differential symbol {0}")]
    Differential(String),
    #[error("division by non-constant {0}")]
    Division(String),
    #[error("formula is not in negation normal form: {0}")]
    NormalForm(String),
    #[error("F may not contain equalities")]
    Equality,
}

fn add(a: Term, b: Term) -> Term {
    if a.is_zero_literal() {
        b
    } else if b.is_zero_literal() {
        a
    } else {
        Term::add(a, b)
    }
}

fn sub(a: Term, b: Term) -> Term {
    if b.is_zero_literal() {
        a
    } else if a.is_zero_literal() {
        neg(b)
    } else {
        Term::sub(a, b)
    }
}

fn neg(a: Term) -> Term {
    if a.is_zero_literal() {
        a
    } else {
        Term::neg(a)
    }
}

fn mul(a: Term, b: Term) -> Term {
    if a.is_zero_literal() || b.is_zero_literal() {
        Term::zero()
    } else if a.is_one_literal() {
        b
    } else if b.is_one_literal() {
        a
    } else {
        Term::mul(a, b)
    }
}

fn div(a: Term, b: Term) -> Term {
    if a.is_zero_literal() {
        a
    } else {
        Term::div(a, b)
    }
}

fn pow(a: Term, n: u32) -> Term {
    match n {
        0 => Term::int(1),
        1 => a,
        _ => Term::pow(a, n),
    }
}

/// Removes the zeros and ones introduced by substituting into derived terms.
pub fn prune(t: &Term) -> Term {
    match t {
        Term::Num(_) | Term::Var(_) => t.clone(),
        Term::Neg(a) => neg(prune(a)),
        Term::Add(a, b) => add(prune(a), prune(b)),
        Term::Sub(a, b) => sub(prune(a), prune(b)),
        Term::Mul(a, b) => mul(prune(a), prune(b)),
        Term::Div(a, b) => div(prune(a), prune(b)),
        Term::Pow(a, n) => {
            let a = prune(a);
            if a.is_zero_literal() && *n > 0 {
                a
            } else {
                pow(a, *n)
            }
        }
    }
}

/// The total derivative `(θ)'`.
pub fn derive_term(t: &Term) -> Result<Term, DerivError> {
    Ok(match t {
        Term::Num(_) => Term::zero(),
        Term::Var(x) if x.is_differential() => return Err(DerivError::Differential(x.to_string())),
        Term::Var(x) => Term::Var(x.prime()),
        Term::Neg(a) => neg(derive_term(a)?),
        Term::Add(a, b) => add(derive_term(a)?, derive_term(b)?),
        Term::Sub(a, b) => sub(derive_term(a)?, derive_term(b)?),
        Term::Mul(a, b) => add(
            mul(derive_term(a)?, (**b).clone()),
            mul((**a).clone(), derive_term(b)?),
        ),
        Term::Div(a, b) => {
            let db = derive_term(b)?;
            if db.is_zero_literal() {
                div(derive_term(a)?, (**b).clone())
            } else {
                div(
                    sub(mul(derive_term(a)?, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2),
                )
            }
        }
        Term::Pow(a, n) => match n {
            0 => Term::zero(),
            _ => mul(
                mul(Term::int(*n as i64), pow((**a).clone(), n - 1)),
                derive_term(a)?,
            ),
        },
    })
}

fn derived_rel(r: Rel) -> Rel {
    match r {
        Rel::Ge | Rel::Gt => Rel::Ge,
        Rel::Le | Rel::Lt => Rel::Le,
        Rel::Eq => Rel::Eq,
        Rel::Ne => unreachable!("handled by splitting"),
    }
}

/// `D(F)` for a negation normal form `F`. Disjunctions derive
/// conjunctively and `a≠b` is read as `a>b ∨ a<b`.
pub fn derive_formula(f: &Formula) -> Result<Formula, DerivError> {
    Ok(match f {
        Formula::True | Formula::False => Formula::True,
        Formula::Cmp(a, Rel::Ne, b) => {
            let (da, db) = (derive_term(a)?, derive_term(b)?);
            Formula::and(
                Formula::cmp(da.clone(), Rel::Ge, db.clone()),
                Formula::cmp(da, Rel::Le, db),
            )
        }
        Formula::Cmp(a, r, b) => Formula::cmp(derive_term(a)?, derived_rel(*r), derive_term(b)?),
        Formula::And(a, b) | Formula::Or(a, b) => Formula::and(derive_formula(a)?, derive_formula(b)?),
        _ => return Err(DerivError::NormalForm(f.to_string())),
    })
}

/// Negation normal form of a quantifier-free first-order formula, with
/// negated comparisons turned into the dual comparison.
pub fn nnf(f: &Formula) -> Result<Formula, DerivError> {
    fn go(f: &Formula, positive: bool) -> Result<Formula, DerivError> {
        Ok(match f {
            Formula::True => if positive { Formula::True } else { Formula::False },
            Formula::False => if positive { Formula::False } else { Formula::True },
            Formula::Cmp(a, r, b) => {
                let r = if positive { *r } else { r.negate() };
                Formula::cmp(a.clone(), r, b.clone())
            }
            Formula::Not(a) => go(a, !positive)?,
            Formula::And(a, b) if positive => Formula::and(go(a, true)?, go(b, true)?),
            Formula::And(a, b) => Formula::or(go(a, false)?, go(b, false)?),
            Formula::Or(a, b) if positive => Formula::or(go(a, true)?, go(b, true)?),
            Formula::Or(a, b) => Formula::and(go(a, false)?, go(b, false)?),
            Formula::Imply(a, b) if positive => Formula::or(go(a, false)?, go(b, true)?),
            Formula::Imply(a, b) => Formula::and(go(a, true)?, go(b, false)?),
            Formula::Equiv(a, b) => {
                let both = Formula::and(go(a, true)?, go(b, true)?);
                let neither = Formula::and(go(a, false)?, go(b, false)?);
                let left = Formula::and(go(a, true)?, go(b, false)?);
                let right = Formula::and(go(a, false)?, go(b, true)?);
                if positive {
                    Formula::or(both, neither)
                } else {
                    Formula::or(left, right)
                }
            }
            _ => return Err(DerivError::NormalForm(f.to_string())),
        })
    }
    go(f, true)
}

/// Replaces every differential symbol `x'` by the right-hand side of `x` in
/// the system, or by 0 when `x` has no equation.
pub fn diff_subst(f: &Formula, ode: &[(Var, Term)]) -> Formula {
    f.map_terms(&|t| {
        prune(&t.replace(&|v: &Var| {
            if !v.is_differential() {
                return None;
            }
            let base = v.base();
            Some(
                ode.iter()
                    .find(|(x, _)| *x == base)
                    .map(|(_, rhs)| rhs.clone())
                    .unwrap_or_else(Term::zero),
            )
        }))
    })
}

fn check_no_equalities(f: &Formula) -> Result<(), DerivError> {
    match f {
        Formula::Cmp(_, Rel::Eq | Rel::Ne, _) => Err(DerivError::Equality),
        Formula::And(a, b) | Formula::Or(a, b) => {
            check_no_equalities(a)?;
            check_no_equalities(b)
        }
        Formula::True | Formula::False | Formula::Cmp(..) => Ok(()),
        _ => Err(DerivError::NormalForm(f.to_string())),
    }
}

/// `~F`: like negation, but keeps the boundary.
pub fn weak_negate(f: &Formula) -> Result<Formula, DerivError> {
    check_no_equalities(f)?;
    fn go(f: &Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Cmp(a, r, b) => {
                let r = match r {
                    Rel::Ge | Rel::Gt => Rel::Le,
                    _ => Rel::Ge,
                };
                Formula::cmp(a.clone(), r, b.clone())
            }
            Formula::And(a, b) => Formula::or(go(a), go(b)),
            Formula::Or(a, b) => Formula::and(go(a), go(b)),
            _ => unreachable!("checked"),
        }
    }
    Ok(go(f))
}

/// Replaces `a≥b` by `a≥b+ε` and `a≤b` by `a≤b-ε` (likewise for strict
/// comparisons).
pub fn eps_strengthen(f: &Formula, eps: &Var) -> Result<Formula, DerivError> {
    check_no_equalities(f)?;
    fn go(f: &Formula, e: &Term) -> Formula {
        match f {
            Formula::Cmp(a, r, b) => {
                let b = match r {
                    Rel::Ge | Rel::Gt => Term::add(b.clone(), e.clone()),
                    _ => Term::sub(b.clone(), e.clone()),
                };
                Formula::cmp(a.clone(), *r, b)
            }
            Formula::And(a, b) => Formula::and(go(a, e), go(b, e)),
            Formula::Or(a, b) => Formula::or(go(a, e), go(b, e)),
            other => other.clone(),
        }
    }
    Ok(go(f, &Term::Var(eps.clone())))
}
