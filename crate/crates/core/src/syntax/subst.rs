//! Admissible substitution of terms for variables.

use thiserror::Error;

use super::vars::{bound_vars, must_bound};
use super::{fresh_var, Formula, Ode, Program, Term, Var, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("substituting {term} for {var} clashes with a binder of {binder}")]
pub struct ClashError {
    pub var: Var,
    pub term: Term,
    pub binder: Var,
}

/// Replaces every occurrence of `x` in a term.
pub fn substitute_term(t: &Term, x: &Var, theta: &Term) -> Term {
    t.replace(&|v| (v == x).then(|| theta.clone()))
}

struct Subst<'a> {
    x: &'a Var,
    theta: &'a Term,
    /// `x` together with the variables of `theta`.
    sensitive: VarSet,
}

impl Subst<'_> {
    fn check(&self, taboo: &VarSet) -> Result<(), ClashError> {
        match taboo.intersection(&self.sensitive).next() {
            Some(b) => Err(ClashError {
                var: self.x.clone(),
                term: self.theta.clone(),
                binder: b.clone(),
            }),
            None => Ok(()),
        }
    }

    fn term(&self, t: &Term, taboo: &VarSet) -> Result<Term, ClashError> {
        if !t.mentions(self.x) {
            return Ok(t.clone());
        }
        self.check(taboo)?;
        Ok(substitute_term(t, self.x, self.theta))
    }

    fn formula(&self, f: &Formula, taboo: &VarSet) -> Result<Formula, ClashError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Cmp(a, r, b) => Formula::Cmp(self.term(a, taboo)?, *r, self.term(b, taboo)?),
            Formula::Not(a) => Formula::not(self.formula(a, taboo)?),
            Formula::And(a, b) => Formula::and(self.formula(a, taboo)?, self.formula(b, taboo)?),
            Formula::Or(a, b) => Formula::or(self.formula(a, taboo)?, self.formula(b, taboo)?),
            Formula::Imply(a, b) => Formula::imply(self.formula(a, taboo)?, self.formula(b, taboo)?),
            Formula::Equiv(a, b) => Formula::equiv(self.formula(a, taboo)?, self.formula(b, taboo)?),
            Formula::Forall(y, a) | Formula::Exists(y, a) => {
                let body = if y == self.x {
                    (**a).clone()
                } else {
                    let mut inner = taboo.clone();
                    inner.insert(y.clone());
                    self.formula(a, &inner)?
                };
                if matches!(f, Formula::Forall(..)) {
                    Formula::forall(y.clone(), body)
                } else {
                    Formula::exists(y.clone(), body)
                }
            }
            Formula::Box(p, a) | Formula::Diamond(p, a) => {
                let p2 = self.program(p, taboo)?;
                let a2 = if must_bound(p).contains(self.x) {
                    (**a).clone()
                } else {
                    let mut inner = taboo.clone();
                    inner.extend(bound_vars(p));
                    self.formula(a, &inner)?
                };
                if matches!(f, Formula::Box(..)) {
                    Formula::boxed(p2, a2)
                } else {
                    Formula::diamond(p2, a2)
                }
            }
        })
    }

    fn program(&self, p: &Program, taboo: &VarSet) -> Result<Program, ClashError> {
        Ok(match p {
            Program::Assign(y, t) => Program::Assign(y.clone(), self.term(t, taboo)?),
            Program::Test(c) => Program::Test(self.formula(c, taboo)?),
            Program::Ode(o) => {
                let mut inner = taboo.clone();
                inner.extend(o.vars().cloned());
                let eqs = o
                    .eqs
                    .iter()
                    .map(|(y, t)| Ok((y.clone(), self.term(t, &inner)?)))
                    .collect::<Result<Vec<_>, ClashError>>()?;
                Program::Ode(Ode::new(eqs, self.formula(&o.domain, &inner)?))
            }
            Program::Choice(a, b) => Program::choice(self.program(a, taboo)?, self.program(b, taboo)?),
            Program::Seq(a, b) => {
                let a2 = self.program(a, taboo)?;
                let b2 = if must_bound(a).contains(self.x) {
                    (**b).clone()
                } else {
                    let mut inner = taboo.clone();
                    inner.extend(bound_vars(a));
                    self.program(b, &inner)?
                };
                Program::seq(a2, b2)
            }
            Program::Loop(a) => {
                let mut inner = taboo.clone();
                inner.extend(bound_vars(a));
                Program::looped(self.program(a, &inner)?)
            }
        })
    }
}

/// Replaces every free occurrence of `x` in `phi` by `theta`.
///
/// Fails when a free occurrence of `x` lies in the scope of a binder of `x`
/// or of a variable of `theta`. Bound variables are never renamed.
pub fn admissible_substitute(phi: &Formula, x: &Var, theta: &Term) -> Result<Formula, ClashError> {
    if *theta == Term::Var(x.clone()) {
        return Ok(phi.clone());
    }
    let mut sensitive = theta.vars();
    sensitive.insert(x.clone());
    let s = Subst { x, theta, sensitive };
    s.formula(phi, &VarSet::new())
}

/// Program substitution with the same discipline, used for programs in
/// formula position.
pub fn admissible_substitute_program(p: &Program, x: &Var, theta: &Term) -> Result<Program, ClashError> {
    if *theta == Term::Var(x.clone()) {
        return Ok(p.clone());
    }
    let mut sensitive = theta.vars();
    sensitive.insert(x.clone());
    let s = Subst { x, theta, sensitive };
    s.program(p, &VarSet::new())
}

fn rename_var(v: &Var, x: &Var, y: &Var) -> Var {
    if v.base() != *x {
        v.clone()
    } else if v.is_differential() {
        y.prime()
    } else {
        y.clone()
    }
}

fn rename_term(t: &Term, x: &Var, y: &Var) -> Term {
    t.replace(&|v| (v.base() == *x).then(|| Term::Var(rename_var(v, x, y))))
}

/// Renames every occurrence of `x`, free or bound, to `y`. Equivalent to the
/// original under the swap of the two variables when `y` does not occur.
pub fn rename_formula(f: &Formula, x: &Var, y: &Var) -> Formula {
    let r = |g: &Formula| Box::new(rename_formula(g, x, y));
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(a, rel, b) => Formula::Cmp(rename_term(a, x, y), *rel, rename_term(b, x, y)),
        Formula::Not(a) => Formula::Not(r(a)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Imply(a, b) => Formula::Imply(r(a), r(b)),
        Formula::Equiv(a, b) => Formula::Equiv(r(a), r(b)),
        Formula::Forall(v, a) => Formula::Forall(rename_var(v, x, y), r(a)),
        Formula::Exists(v, a) => Formula::Exists(rename_var(v, x, y), r(a)),
        Formula::Box(p, a) => Formula::Box(Box::new(rename_program(p, x, y)), r(a)),
        Formula::Diamond(p, a) => Formula::Diamond(Box::new(rename_program(p, x, y)), r(a)),
    }
}

pub fn rename_program(p: &Program, x: &Var, y: &Var) -> Program {
    let r = |q: &Program| Box::new(rename_program(q, x, y));
    match p {
        Program::Assign(v, t) => Program::Assign(rename_var(v, x, y), rename_term(t, x, y)),
        Program::Test(f) => Program::Test(rename_formula(f, x, y)),
        Program::Ode(o) => Program::Ode(Ode::new(
            o.eqs.iter().map(|(v, t)| (rename_var(v, x, y), rename_term(t, x, y))).collect(),
            rename_formula(&o.domain, x, y),
        )),
        Program::Choice(a, b) => Program::Choice(r(a), r(b)),
        Program::Seq(a, b) => Program::Seq(r(a), r(b)),
        Program::Loop(a) => Program::Loop(r(a)),
    }
}

/// A program of ordinary assignments with the effect of the simultaneous
/// assignment `x1,...,xn := θ1,...,θn`.
///
/// Assignments are ordered so that no term mentions a variable assigned
/// earlier. When the dependencies are cyclic, the terms are first copied into
/// fresh variables that avoid `taken`.
pub fn vectorial_assignment(pairs: &[(Var, Term)], taken: &VarSet) -> Program {
    let pairs: Vec<&(Var, Term)> = pairs.iter().filter(|(x, t)| *t != Term::Var(x.clone())).collect();
    if pairs.is_empty() {
        return Program::Test(Formula::True);
    }
    let mut order = Vec::new();
    let mut remaining = pairs.clone();
    while !remaining.is_empty() {
        let pick = remaining.iter().position(|(x, _)| {
            remaining
                .iter()
                .all(|(y, t)| y == x || !t.mentions(x))
        });
        match pick {
            Some(i) => order.push(remaining.remove(i)),
            None => break,
        }
    }
    if remaining.is_empty() {
        return Program::seq_all(order.into_iter().map(|(x, t)| Program::assign(x.clone(), t.clone())));
    }
    let mut avoid = taken.clone();
    for (x, t) in &pairs {
        avoid.insert(x.clone());
        avoid.extend(t.vars());
    }
    let mut copies = Vec::new();
    let mut moves = Vec::new();
    for (x, t) in &pairs {
        let y = fresh_var(x.name().split('$').next().unwrap_or("y"), &avoid);
        avoid.insert(y.clone());
        copies.push(Program::assign(y.clone(), t.clone()));
        moves.push(Program::assign(x.clone(), Term::Var(y)));
    }
    Program::seq_all(copies.into_iter().chain(moves))
}
