//! Sequent calculus rules and the differential equation proof rules.

use crate::arith::{normalize_poly, Budget};
use crate::deriv::{derive_formula, diff_subst, eps_strengthen, nnf, weak_negate, DerivError};
use crate::syntax::{
    admissible_substitute, fresh_var, free_vars, var_analysis, rename_formula, Formula, Ode, Program, Rel, Term, Var,
};

use super::{closing, Args, KernelError, Position, Sequent, Side};

pub(super) fn needs_position(name: &str) -> bool {
    !matches!(name, "close" | "arith")
}

pub(super) fn antecedent_rule(name: &str) -> bool {
    matches!(name, "andL" | "orL" | "impL" | "notL" | "equivL" | "allL" | "existsL" | "hideL")
}

fn shape(name: &str, f: &Formula) -> KernelError {
    KernelError::Shape(format!("{name} does not apply to {f}"))
}

fn side_condition(cond: bool, msg: impl Into<String>) -> Result<(), KernelError> {
    if cond {
        Ok(())
    } else {
        Err(KernelError::SideCondition(msg.into()))
    }
}

fn deriv_err(e: DerivError) -> KernelError {
    match e {
        DerivError::Equality => KernelError::SideCondition(e.to_string()),
        other => KernelError::Shape(other.to_string()),
    }
}

fn push(mut s: Sequent, side: Side, f: Formula) -> Sequent {
    match side {
        Side::Ante => s.ante.push(f),
        Side::Succ => s.succ.push(f),
    }
    s
}

fn top_position(name: &str, args: &Args, side: Option<Side>) -> Result<Position, KernelError> {
    let pos = args.pos.clone().ok_or_else(|| KernelError::Position(format!("{name} needs a position")))?;
    if !pos.is_top() {
        return Err(KernelError::Position(format!("{name} applies to top-level formulas only")));
    }
    if let Some(sd) = side {
        if pos.side != sd {
            return Err(KernelError::Position(format!("{name} applies on the {sd:?} side")));
        }
    }
    Ok(pos)
}

fn arg_formula<'a>(name: &str, args: &'a Args, i: usize) -> Result<&'a Formula, KernelError> {
    args.formulas.get(i).ok_or_else(|| KernelError::Shape(format!("{name} needs a formula argument")))
}

fn ode_box<'a>(name: &str, f: &'a Formula) -> Result<(&'a Ode, &'a Formula), KernelError> {
    match f {
        Formula::Box(p, post) => match &**p {
            Program::Ode(o) => Ok((o, post)),
            _ => Err(shape(name, f)),
        },
        _ => Err(shape(name, f)),
    }
}

/// Γ ⊢ F, Δ unless F is already among the assumptions.
fn init_goal(s: &Sequent, pos: &Position, f: &Formula) -> Option<Sequent> {
    (!s.ante.contains(f)).then(|| s.with(Side::Succ, pos.index, f.clone()))
}

fn domain_ante(chi: &Formula) -> Vec<Formula> {
    if *chi == Formula::True {
        vec![]
    } else {
        vec![chi.clone()]
    }
}

pub(super) fn apply(s: &Sequent, name: &str, args: &Args, budget: &Budget) -> Result<Vec<Sequent>, KernelError> {
    match name {
        "close" => {
            let closed = s.ante.contains(&Formula::False)
                || s.succ.contains(&Formula::True)
                || s.ante.iter().any(|f| s.succ.contains(f));
            side_condition(closed, "no formula occurs on both sides")?;
            return Ok(vec![]);
        }
        "arith" => return closing::close(s, budget).map(|_| vec![]),
        _ => {}
    }
    let ante = antecedent_rule(name);
    let pos = top_position(name, args, if ante { Some(Side::Ante) } else { None })?;
    let f = s
        .get(pos.side, pos.index)
        .ok_or_else(|| KernelError::Position(format!("no formula at {:?} {}", pos.side, pos.index)))?
        .clone();
    let (i, sd) = (pos.index, pos.side);
    let succ_only = || {
        if sd == Side::Succ {
            Ok(())
        } else {
            Err(KernelError::Position(format!("{name} applies on the succedent")))
        }
    };
    match (name, &f) {
        ("andL", Formula::And(a, b)) => Ok(vec![push(s.with(sd, i, (**a).clone()), sd, (**b).clone())]),
        ("andR", Formula::And(a, b)) => {
            succ_only()?;
            Ok(vec![s.with(sd, i, (**a).clone()), s.with(sd, i, (**b).clone())])
        }
        ("orL", Formula::Or(a, b)) => Ok(vec![s.with(sd, i, (**a).clone()), s.with(sd, i, (**b).clone())]),
        ("orR", Formula::Or(a, b)) => {
            succ_only()?;
            Ok(vec![push(s.with(sd, i, (**a).clone()), sd, (**b).clone())])
        }
        ("impR", Formula::Imply(a, b)) => {
            succ_only()?;
            Ok(vec![push(s.with(sd, i, (**b).clone()), Side::Ante, (**a).clone())])
        }
        ("impL", Formula::Imply(a, b)) => {
            let rest = s.without(sd, i);
            Ok(vec![push(rest.clone(), Side::Succ, (**a).clone()), push(rest, Side::Ante, (**b).clone())])
        }
        ("notR", Formula::Not(a)) => {
            succ_only()?;
            Ok(vec![push(s.without(sd, i), Side::Ante, (**a).clone())])
        }
        ("notL", Formula::Not(a)) => Ok(vec![push(s.without(sd, i), Side::Succ, (**a).clone())]),
        ("equivR", Formula::Equiv(a, b)) => {
            succ_only()?;
            Ok(vec![
                push(s.with(sd, i, (**b).clone()), Side::Ante, (**a).clone()),
                push(s.with(sd, i, (**a).clone()), Side::Ante, (**b).clone()),
            ])
        }
        ("equivL", Formula::Equiv(a, b)) => {
            let rest = s.without(sd, i);
            Ok(vec![
                push(push(rest.clone(), Side::Ante, (**a).clone()), Side::Ante, (**b).clone()),
                push(push(rest, Side::Succ, (**a).clone()), Side::Succ, (**b).clone()),
            ])
        }
        ("allR", Formula::Forall(x, body)) | ("existsL", Formula::Exists(x, body)) => {
            if name == "allR" {
                succ_only()?;
            }
            let rest = s.without(sd, i);
            let body = if rest.vars().contains(x) {
                let y = fresh_var(x.name(), &s.vars());
                rename_formula(body, x, &y)
            } else {
                (**body).clone()
            };
            Ok(vec![s.with(sd, i, body)])
        }
        ("allL", Formula::Forall(x, body)) | ("existsR", Formula::Exists(x, body)) => {
            if name == "existsR" {
                succ_only()?;
            }
            let t = args.terms.first().ok_or_else(|| KernelError::Shape(format!("{name} needs a term")))?;
            let inst = admissible_substitute(body, x, t).map_err(|e| KernelError::SideCondition(e.to_string()))?;
            Ok(vec![push(s.clone(), sd, inst)])
        }
        ("hideL", _) | ("hideR", _) => {
            side_condition((name == "hideL") == (sd == Side::Ante), "wrong side")?;
            Ok(vec![s.without(sd, i)])
        }
        ("cut", _) => {
            let c = arg_formula(name, args, 0)?;
            Ok(vec![push(s.clone(), Side::Succ, c.clone()), push(s.clone(), Side::Ante, c.clone())])
        }
        ("MP", _) => {
            succ_only()?;
            let c = arg_formula(name, args, 0)?;
            Ok(vec![s.with(sd, i, Formula::imply(c.clone(), f.clone())), s.with(sd, i, c.clone())])
        }
        ("G", Formula::Box(_, post)) => {
            succ_only()?;
            Ok(vec![Sequent::goal((**post).clone())])
        }
        ("ind", Formula::Box(p, post)) => {
            succ_only()?;
            let Program::Loop(body) = &**p else { return Err(shape(name, &f)) };
            Ok(vec![
                s.with(sd, i, (**post).clone()),
                Sequent::new(vec![(**post).clone()], vec![Formula::boxed((**body).clone(), (**post).clone())]),
            ])
        }
        ("loop", Formula::Box(p, post)) => {
            succ_only()?;
            let Program::Loop(body) = &**p else { return Err(shape(name, &f)) };
            let j = arg_formula(name, args, 0)?;
            Ok(vec![
                s.with(sd, i, j.clone()),
                Sequent::new(vec![j.clone()], vec![Formula::boxed((**body).clone(), j.clone())]),
                Sequent::new(vec![j.clone()], vec![(**post).clone()]),
            ])
        }
        ("con", Formula::Diamond(p, post)) => {
            succ_only()?;
            let Program::Loop(body) = &**p else { return Err(shape(name, &f)) };
            let j = arg_formula(name, args, 0)?;
            let v = args.vars.first().ok_or_else(|| KernelError::Shape("con needs a variant variable".into()))?;
            let (fv, bv) = var_analysis(&**p);
            side_condition(!fv.contains(v) && !bv.contains(v), format!("{v} must not occur in the program"))?;
            side_condition(!free_vars(&**post).contains(v), format!("{v} must not be free in the postcondition"))?;
            let vt = Term::Var(v.clone());
            let dec = admissible_substitute(j, v, &Term::sub(vt.clone(), Term::int(1)))
                .map_err(|e| KernelError::SideCondition(e.to_string()))?;
            let step = Formula::forall(
                v.clone(),
                Formula::imply(
                    Formula::and(Formula::cmp(vt.clone(), Rel::Gt, Term::zero()), j.clone()),
                    Formula::diamond((**body).clone(), dec),
                ),
            );
            let done = Formula::forall(
                v.clone(),
                Formula::imply(Formula::and(Formula::cmp(vt, Rel::Le, Term::zero()), j.clone()), (**post).clone()),
            );
            Ok(vec![s.with(sd, i, Formula::exists(v.clone(), j.clone())), Sequent::goal(step), Sequent::goal(done)])
        }
        ("DI", _) => {
            succ_only()?;
            let (o, post) = ode_box(name, &f)?;
            side_condition(post.is_quantifier_free_arith(), "DI needs a quantifier-free arithmetic invariant")?;
            let derived = derive_formula(&nnf(post).map_err(deriv_err)?).map_err(deriv_err)?;
            let step = Sequent::new(domain_ante(&o.domain), vec![diff_subst(&derived, &o.eqs)]);
            Ok(std::iter::once(step).chain(init_goal(s, &pos, post)).collect())
        }
        ("DC", _) => {
            succ_only()?;
            let (o, post) = ode_box(name, &f)?;
            let c = arg_formula(name, args, 0)?;
            side_condition(c.is_first_order(), "the cut must be first-order")?;
            let show = Formula::boxed(Program::Ode(o.clone()), c.clone());
            let domain = if o.domain == Formula::True { c.clone() } else { Formula::and(o.domain.clone(), c.clone()) };
            let used = Formula::boxed(Program::Ode(Ode::new(o.eqs.clone(), domain)), post.clone());
            Ok(vec![s.with(sd, i, show), s.with(sd, i, used)])
        }
        ("DW", _) => {
            succ_only()?;
            let (o, post) = ode_box(name, &f)?;
            Ok(vec![Sequent::new(domain_ante(&o.domain), vec![post.clone()])])
        }
        ("DV", Formula::Diamond(p, target)) => {
            succ_only()?;
            let Program::Ode(o) = &**p else { return Err(shape(name, &f)) };
            side_condition(target.is_quantifier_free_arith(), "DV needs a quantifier-free arithmetic target")?;
            side_condition(affine_flow(o)?, "DV needs an ODE whose right-hand sides are affine in the evolving variables")?;
            let target = nnf(target).map_err(deriv_err)?;
            let weak = weak_negate(&target).map_err(deriv_err)?;
            let eps = fresh_var("e", &s.vars());
            let strong = eps_strengthen(&derive_formula(&target).map_err(deriv_err)?, &eps).map_err(deriv_err)?;
            let mut progress = Formula::imply(Formula::and(weak.clone(), o.domain.clone()), diff_subst(&strong, &o.eqs));
            if o.domain == Formula::True {
                progress = Formula::imply(weak.clone(), diff_subst(&strong, &o.eqs));
            }
            for (x, _) in o.eqs.iter().rev() {
                progress = Formula::forall(x.clone(), progress);
            }
            let premise = Formula::exists(
                eps.clone(),
                Formula::and(Formula::cmp(Term::Var(eps), Rel::Gt, Term::zero()), progress),
            );
            let mut out = vec![Sequent::goal(premise)];
            if o.domain != Formula::True {
                let stay = Formula::boxed(Program::Ode(Ode::new(o.eqs.clone(), weak)), o.domain.clone());
                out.push(s.with(sd, i, stay));
            }
            Ok(out)
        }
        ("DA", _) => {
            succ_only()?;
            let (o, post) = ode_box(name, &f)?;
            let y = args.vars.first().ok_or_else(|| KernelError::Shape("DA needs the auxiliary variable".into()))?;
            let eta = args.terms.first().ok_or_else(|| KernelError::Shape("DA needs the auxiliary dynamics".into()))?;
            let psi = arg_formula(name, args, 0)?;
            side_condition(!s.vars().contains(y), format!("{y} is not fresh"))?;
            side_condition(!eta.vars().iter().any(Var::is_differential), "auxiliary dynamics mention differential symbols")?;
            let poly = normalize_poly(eta).map_err(|e| KernelError::SideCondition(e.to_string()))?;
            side_condition(
                poly.degree_in(y) <= 1,
                format!("auxiliary dynamics {eta} must be linear in {y}"),
            )?;
            let mut eqs = o.eqs.clone();
            eqs.push((y.clone(), eta.clone()));
            let equiv = Formula::equiv(post.clone(), Formula::exists(y.clone(), psi.clone()));
            let inv = Sequent::new(
                vec![psi.clone()],
                vec![Formula::boxed(Program::Ode(Ode::new(eqs, o.domain.clone())), psi.clone())],
            );
            Ok([Sequent::goal(equiv), inv].into_iter().chain(init_goal(s, &pos, post)).collect())
        }
        _ if super::RULES.contains(&name) => Err(shape(name, &f)),
        _ => Err(KernelError::UnknownRule(name.into())),
    }
}


/// Right-hand sides of total degree at most one in the ODE's own variables, so solutions exist for all time.
fn affine_flow(o: &Ode) -> Result<bool, KernelError> {
    let xs: Vec<&Var> = o.vars().collect();
    for (_, rhs) in &o.eqs {
        let p = normalize_poly(rhs)?;
        if p.terms().any(|(m, _)| xs.iter().map(|x| m.degree_in(x)).sum::<u32>() > 1) {
            return Ok(false);
        }
    }
    Ok(true)
}
