//! Polynomial closed-form solutions of triangular nilpotent ODE systems.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::arith::{normalize_poly, Poly};
use crate::syntax::{fresh_var, Term, Var, VarSet};

/// `x(t)` for every variable of the system, as polynomials in the time
/// variable and the initial values (written with the variables' own names).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub time: Var,
    pub assignments: Vec<(Var, Term)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Unsolvable {
    #[error("{0} depends on itself or on a cyclic component")]
    Cyclic(String),
    #[error("non-polynomial right-hand side for {0}")]
    NonPolynomial(String),
}

/// Solves by iterated integration in dependency order. `taken` lists the
/// names the time variable must avoid in addition to those of the system.
pub fn solve_ode(ode: &[(Var, Term)], taken: &VarSet) -> Result<Solution, Unsolvable> {
    let mut avoid = taken.clone();
    for (x, t) in ode {
        avoid.insert(x.clone());
        avoid.extend(t.vars());
    }
    let time = fresh_var("t", &avoid);
    let rhs: Vec<(Var, Poly)> = ode
        .iter()
        .map(|(x, t)| normalize_poly(t).map(|p| (x.clone(), p)).map_err(|_| Unsolvable::NonPolynomial(x.to_string())))
        .collect::<Result<_, _>>()?;
    let mut solved: BTreeMap<Var, Poly> = BTreeMap::new();
    while solved.len() < rhs.len() {
        let next = rhs.iter().find(|(x, p)| {
            !solved.contains_key(x) && p.vars().iter().all(|v| solved.contains_key(v) || !rhs.iter().any(|(y, _)| y == v))
        });
        let Some((x, p)) = next else {
            let stuck = rhs.iter().find(|(x, _)| !solved.contains_key(x)).expect("unsolved");
            return Err(Unsolvable::Cyclic(stuck.0.to_string()));
        };
        let integrand = p.subst_all(&solved);
        let flow = &Poly::var(x) + &integrand.integrate(&time);
        solved.insert(x.clone(), flow);
    }
    let assignments = ode.iter().map(|(x, _)| (x.clone(), solved[x].to_term())).collect();
    Ok(Solution { time, assignments })
}

/// Checks `d/dt x(t) = θ(x(t))` and `x(0) = x` by polynomial identity.
pub fn verify_solution(ode: &[(Var, Term)], sol: &Solution) -> bool {
    if ode.len() != sol.assignments.len() {
        return false;
    }
    let mut flows = BTreeMap::new();
    for (x, t) in &sol.assignments {
        if !ode.iter().any(|(y, _)| y == x) {
            return false;
        }
        match normalize_poly(t) {
            Ok(p) => {
                flows.insert(x.clone(), p);
            }
            Err(_) => return false,
        }
    }
    if ode.iter().any(|(x, t)| *x == sol.time || t.mentions(&sol.time)) {
        return false;
    }
    let zero = Poly::zero();
    ode.iter().all(|(x, theta)| {
        let Ok(theta) = normalize_poly(theta) else { return false };
        let flow = &flows[x];
        flow.subst(&sol.time, &zero) == Poly::var(x) && flow.derivative(&sol.time) == theta.subst_all(&flows)
    })
}
