//! Axioms as position-based rewrites. Equivalences rewrite anywhere;
//! implications `A → B` replace an instance of `B` by `A` at positive
//! positions only.

use crate::odesolve::{verify_solution, Solution};
use crate::syntax::{
    admissible_substitute, bound_vars, fresh_var, free_vars, rename_formula, vectorial_assignment, Formula, Ode,
    Program, Rel, Term, Var, VarSet,
};

use super::position::{polarity, replace_at, Polarity};
use super::{Args, KernelError, Position, Sequent, Side};

fn no_match(name: &str, f: &Formula) -> KernelError {
    KernelError::NoMatch(format!("{name} at {f}"))
}

fn is_implication(name: &str) -> bool {
    matches!(name, "K" | "I" | "C" | "B" | "V")
}

pub(super) fn apply(s: &Sequent, name: &str, pos: &Position, args: &Args) -> Result<Sequent, KernelError> {
    let top = s
        .get(pos.side, pos.index)
        .ok_or_else(|| KernelError::Position(format!("no formula at {:?} {}", pos.side, pos.index)))?;
    let f = super::subformula(top, &pos.path)
        .ok_or_else(|| KernelError::Position(format!("path {:?} does not resolve", pos.path)))?;
    if is_implication(name) {
        let start = if pos.side == Side::Succ { Polarity::Positive } else { Polarity::Negative };
        if polarity(top, &pos.path, start) != Some(Polarity::Positive) {
            return Err(KernelError::Position(format!("implication axiom {name} needs a positive position")));
        }
    }
    let taken = s.vars();
    let new = if args.reverse { reverse(name, f)? } else { forward(name, f, args, &taken)? };
    let top = replace_at(top, &pos.path, new).expect("path resolved");
    Ok(s.with(pos.side, pos.index, top))
}

fn forward(name: &str, f: &Formula, args: &Args, taken: &VarSet) -> Result<Formula, KernelError> {
    let (p, post) = match f {
        Formula::Box(p, post) => (&**p, &**post),
        Formula::Diamond(p, post) if name == "<>" => {
            return Ok(Formula::not(Formula::boxed((**p).clone(), Formula::not((**post).clone()))));
        }
        _ if is_implication(name) => return implication(name, f),
        _ => return Err(no_match(name, f)),
    };
    match (name, p) {
        ("[:=]", Program::Assign(x, t)) => {
            admissible_substitute(post, x, t).map_err(|e| KernelError::SideCondition(e.to_string()))
        }
        ("[:=]=", Program::Assign(x, t)) => {
            let y = fresh_var(x.name(), taken);
            Ok(Formula::forall(
                y.clone(),
                Formula::imply(Formula::cmp(Term::Var(y.clone()), Rel::Eq, t.clone()), rename_formula(post, x, &y)),
            ))
        }
        ("[?]", Program::Test(c)) => Ok(Formula::imply(c.clone(), post.clone())),
        ("[++]", Program::Choice(a, b)) => {
            Ok(Formula::and(Formula::boxed((**a).clone(), post.clone()), Formula::boxed((**b).clone(), post.clone())))
        }
        ("[;]", Program::Seq(a, b)) => Ok(Formula::boxed((**a).clone(), Formula::boxed((**b).clone(), post.clone()))),
        ("[*]", Program::Loop(a)) => Ok(Formula::and(
            post.clone(),
            Formula::boxed((**a).clone(), Formula::boxed(p.clone(), post.clone())),
        )),
        ("[']", Program::Ode(o)) => solve(o, post, args, taken),
        ("[&]", Program::Ode(o)) => domain_clock(o, post, taken),
        _ if is_implication(name) => implication(name, f),
        _ => Err(no_match(name, f)),
    }
}

/// `[x'=θ & χ]φ ↔ ∀t (t≥0 → (∀s (0≤s≤t → [x:=y(s)]χ)) → [x:=y(t)]φ)` for a
/// verified polynomial solution `y`. The domain premise is omitted when `χ`
/// is `true`.
fn solve(o: &Ode, post: &Formula, args: &Args, taken: &VarSet) -> Result<Formula, KernelError> {
    let time = args
        .vars
        .first()
        .cloned()
        .ok_or_else(|| KernelError::SideCondition("[′] needs the solution's time variable".into()))?;
    if taken.contains(&time) {
        return Err(KernelError::SideCondition(format!("time variable {time} is not fresh")));
    }
    if args.terms.len() != o.eqs.len() {
        return Err(KernelError::SideCondition("[′] needs one solution term per equation".into()));
    }
    let sol = Solution { time: time.clone(), assignments: o.eqs.iter().map(|(x, _)| x.clone()).zip(args.terms.iter().cloned()).collect() };
    if !verify_solution(&o.eqs, &sol) {
        return Err(KernelError::SideCondition("not a solution of the differential equation".into()));
    }
    let mut avoid = taken.clone();
    avoid.insert(time.clone());
    let at = |tau: &Var| -> Program {
        let pairs: Vec<(Var, Term)> = sol
            .assignments
            .iter()
            .map(|(x, t)| (x.clone(), t.replace(&|v| (*v == time).then(|| Term::Var(tau.clone())))))
            .collect();
        vectorial_assignment(&pairs, &avoid)
    };
    let nonneg = |v: &Var| Formula::cmp(Term::Var(v.clone()), Rel::Ge, Term::zero());
    let after = Formula::boxed(at(&time), post.clone());
    let body = if o.has_domain() {
        let s = fresh_var("s", &avoid);
        let within = Formula::forall(
            s.clone(),
            Formula::imply(
                Formula::and(nonneg(&s), Formula::cmp(Term::Var(s.clone()), Rel::Le, Term::Var(time.clone()))),
                Formula::boxed(at(&s), o.domain.clone()),
            ),
        );
        Formula::imply(within, after)
    } else {
        after
    };
    Ok(Formula::forall(time.clone(), Formula::imply(nonneg(&time), body)))
}

/// `[x'=θ & χ]φ ↔ ∀t0 (t0=τ → [x'=θ,τ'=1]([x'=-θ,τ'=-1](τ≥t0 → χ) → φ))`.
/// An equation `τ'=1` of the system is reused as the clock; otherwise a
/// fresh clock is added under a universal quantifier.
fn domain_clock(o: &Ode, post: &Formula, taken: &VarSet) -> Result<Formula, KernelError> {
    let existing = o.eqs.iter().find(|(_, t)| t.is_one_literal()).map(|(x, _)| x.clone());
    let clock = existing.clone().unwrap_or_else(|| fresh_var("c", taken));
    let mut avoid = taken.clone();
    avoid.insert(clock.clone());
    let t0 = fresh_var("t0", &avoid);
    let mut fwd = o.eqs.clone();
    if existing.is_none() {
        fwd.push((clock.clone(), Term::int(1)));
    }
    let back: Vec<(Var, Term)> = fwd.iter().map(|(x, t)| (x.clone(), Term::neg(t.clone()))).collect();
    let guard = Formula::imply(Formula::cmp(Term::Var(clock.clone()), Rel::Ge, Term::Var(t0.clone())), o.domain.clone());
    let inner = Formula::boxed(
        Program::ode(fwd, Formula::True),
        Formula::imply(Formula::boxed(Program::ode(back, Formula::True), guard), post.clone()),
    );
    let f = Formula::forall(
        t0.clone(),
        Formula::imply(Formula::cmp(Term::Var(t0), Rel::Eq, Term::Var(clock.clone())), inner),
    );
    Ok(if existing.is_none() { Formula::forall(clock, f) } else { f })
}

fn side(cond: bool, msg: impl Into<String>) -> Result<(), KernelError> {
    if cond {
        Ok(())
    } else {
        Err(KernelError::SideCondition(msg.into()))
    }
}

fn implication(name: &str, f: &Formula) -> Result<Formula, KernelError> {
    match (name, f) {
        // K: [α](φ→ψ) → ([α]φ → [α]ψ)
        ("K", Formula::Imply(a, b)) => match (&**a, &**b) {
            (Formula::Box(p, phi), Formula::Box(q, psi)) if p == q => {
                Ok(Formula::boxed((**p).clone(), Formula::imply((**phi).clone(), (**psi).clone())))
            }
            _ => Err(no_match(name, f)),
        },
        // I: [α*](φ→[α]φ) → (φ→[α*]φ)
        ("I", Formula::Imply(a, b)) => match &**b {
            Formula::Box(p, phi) if **phi == **a => match &**p {
                Program::Loop(body) => Ok(Formula::boxed(
                    (**p).clone(),
                    Formula::imply((**a).clone(), Formula::boxed((**body).clone(), (**a).clone())),
                )),
                _ => Err(no_match(name, f)),
            },
            _ => Err(no_match(name, f)),
        },
        // C: [α*]∀v>0 (φ(v) → ⟨α⟩φ(v-1)) → ∀v (φ(v) → ⟨α*⟩∃v≤0 φ(v))
        ("C", Formula::Forall(v, body)) => {
            let Formula::Imply(phi, rhs) = &**body else { return Err(no_match(name, f)) };
            let Formula::Diamond(p, ex) = &**rhs else { return Err(no_match(name, f)) };
            let Program::Loop(alpha) = &**p else { return Err(no_match(name, f)) };
            let Formula::Exists(w, inner) = &**ex else { return Err(no_match(name, f)) };
            let le0 = Formula::cmp(Term::Var(v.clone()), Rel::Le, Term::zero());
            if w != v || **inner != Formula::and(le0, (**phi).clone()) {
                return Err(no_match(name, f));
            }
            side(!p.all_vars().contains(v), format!("{v} must not occur in the program"))?;
            let dec = admissible_substitute(phi, v, &Term::sub(Term::Var(v.clone()), Term::int(1)))
                .map_err(|e| KernelError::SideCondition(e.to_string()))?;
            let gt0 = Formula::cmp(Term::Var(v.clone()), Rel::Gt, Term::zero());
            Ok(Formula::boxed(
                (**p).clone(),
                Formula::forall(
                    v.clone(),
                    Formula::imply(gt0, Formula::imply((**phi).clone(), Formula::diamond((**alpha).clone(), dec))),
                ),
            ))
        }
        // B: ∀x[α]φ → [α]∀xφ
        ("B", Formula::Box(p, inner)) => match &**inner {
            Formula::Forall(x, phi) => {
                side(!p.all_vars().contains(x), format!("{x} must not occur in the program"))?;
                Ok(Formula::forall(x.clone(), Formula::boxed((**p).clone(), (**phi).clone())))
            }
            _ => Err(no_match(name, f)),
        },
        // V: φ → [α]φ
        ("V", Formula::Box(p, phi)) => {
            let clash: Vec<String> =
                free_vars(&**phi).intersection(&bound_vars(p)).map(|v| v.to_string()).collect();
            side(clash.is_empty(), format!("FV(φ)∩BV(α)=∅ fails for {}", clash.join(", ")))?;
            Ok((**phi).clone())
        }
        _ => Err(no_match(name, f)),
    }
}

fn reverse(name: &str, f: &Formula) -> Result<Formula, KernelError> {
    let err = || KernelError::NoMatch(format!("{name} (reversed) at {f}"));
    match (name, f) {
        ("[?]", Formula::Imply(c, post)) if c.is_first_order() => Ok(Formula::boxed(Program::test((**c).clone()), (**post).clone())),
        ("[++]", Formula::And(a, b)) => match (&**a, &**b) {
            (Formula::Box(p, x), Formula::Box(q, y)) if x == y => {
                Ok(Formula::boxed(Program::choice((**p).clone(), (**q).clone()), (**x).clone()))
            }
            _ => Err(err()),
        },
        ("[;]", Formula::Box(p, inner)) => match &**inner {
            Formula::Box(q, post) => Ok(Formula::boxed(Program::seq((**p).clone(), (**q).clone()), (**post).clone())),
            _ => Err(err()),
        },
        ("[*]", Formula::And(a, b)) => match &**b {
            Formula::Box(p, inner) => match &**inner {
                Formula::Box(l, post) if **post == **a && **l == Program::looped((**p).clone()) => {
                    Ok(Formula::boxed((**l).clone(), (**a).clone()))
                }
                _ => Err(err()),
            },
            _ => Err(err()),
        },
        ("<>", Formula::Not(a)) => match &**a {
            Formula::Box(p, inner) => match &**inner {
                Formula::Not(post) => Ok(Formula::diamond((**p).clone(), (**post).clone())),
                _ => Err(err()),
            },
            _ => Err(err()),
        },
        _ => Err(KernelError::NoMatch(format!("{name} cannot be used right to left"))),
    }
}
