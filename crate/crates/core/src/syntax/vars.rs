//! Static free and bound variable analysis.

use std::collections::BTreeSet;

use super::{Formula, Program, Term, Var};

pub type VarSet = BTreeSet<Var>;

/// Any syntactic category that can be analysed.
#[derive(Clone, Copy, Debug)]
pub enum Expr<'a> {
    Term(&'a Term),
    Formula(&'a Formula),
    Program(&'a Program),
}

impl<'a> From<&'a Term> for Expr<'a> {
    fn from(t: &'a Term) -> Self {
        Expr::Term(t)
    }
}

impl<'a> From<&'a Formula> for Expr<'a> {
    fn from(f: &'a Formula) -> Self {
        Expr::Formula(f)
    }
}

impl<'a> From<&'a Program> for Expr<'a> {
    fn from(p: &'a Program) -> Self {
        Expr::Program(p)
    }
}

/// Free and bound variables of an expression.
///
/// Free variables are those whose initial value the meaning can depend on.
/// Bound variables are all variables written by an assignment, a differential
/// equation or a quantifier anywhere inside.
pub fn var_analysis<'a>(e: impl Into<Expr<'a>>) -> (VarSet, VarSet) {
    match e.into() {
        Expr::Term(t) => (t.vars(), VarSet::new()),
        Expr::Formula(f) => (free_formula(f), bound_formula(f)),
        Expr::Program(p) => (free_program(p), bound_vars(p)),
    }
}

pub fn free_vars<'a>(e: impl Into<Expr<'a>>) -> VarSet {
    var_analysis(e).0
}

/// Variables possibly written by a program.
pub fn bound_vars(p: &Program) -> VarSet {
    let mut out = VarSet::new();
    collect_bound(p, &mut out);
    out
}

fn collect_bound(p: &Program, out: &mut VarSet) {
    match p {
        Program::Assign(x, _) => {
            out.insert(x.clone());
        }
        Program::Test(_) => {}
        Program::Ode(o) => {
            out.extend(o.vars().cloned());
        }
        Program::Choice(a, b) | Program::Seq(a, b) => {
            collect_bound(a, out);
            collect_bound(b, out);
        }
        Program::Loop(a) => collect_bound(a, out),
    }
}

/// Variables written on every run of a program.
pub fn must_bound(p: &Program) -> VarSet {
    match p {
        Program::Assign(x, _) => VarSet::from([x.clone()]),
        Program::Test(_) | Program::Loop(_) => VarSet::new(),
        Program::Ode(o) => o.vars().cloned().collect(),
        Program::Choice(a, b) => must_bound(a).intersection(&must_bound(b)).cloned().collect(),
        Program::Seq(a, b) => must_bound(a).union(&must_bound(b)).cloned().collect(),
    }
}

fn free_program(p: &Program) -> VarSet {
    match p {
        Program::Assign(_, t) => t.vars(),
        Program::Test(c) => free_formula(c),
        Program::Ode(o) => {
            let mut out: VarSet = o.vars().cloned().collect();
            for (_, t) in &o.eqs {
                out.extend(t.vars());
            }
            out.extend(free_formula(&o.domain));
            out
        }
        Program::Choice(a, b) => {
            let mut out = free_program(a);
            out.extend(free_program(b));
            out
        }
        Program::Seq(a, b) => {
            let mut out = free_program(a);
            let mbv = must_bound(a);
            out.extend(free_program(b).into_iter().filter(|v| !mbv.contains(v)));
            out
        }
        Program::Loop(a) => free_program(a),
    }
}

fn free_formula(f: &Formula) -> VarSet {
    match f {
        Formula::True | Formula::False => VarSet::new(),
        Formula::Cmp(a, _, b) => {
            let mut out = a.vars();
            out.extend(b.vars());
            out
        }
        Formula::Not(a) => free_formula(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            let mut out = free_formula(a);
            out.extend(free_formula(b));
            out
        }
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let mut out = free_formula(a);
            out.remove(x);
            out
        }
        Formula::Box(p, a) | Formula::Diamond(p, a) => {
            let mut out = free_program(p);
            let mbv = must_bound(p);
            out.extend(free_formula(a).into_iter().filter(|v| !mbv.contains(v)));
            out
        }
    }
}

fn bound_formula(f: &Formula) -> VarSet {
    let mut out = VarSet::new();
    fn go(f: &Formula, out: &mut VarSet) {
        match f {
            Formula::True | Formula::False | Formula::Cmp(..) => {}
            Formula::Not(a) => go(a, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                out.insert(x.clone());
                go(a, out);
            }
            Formula::Box(p, a) | Formula::Diamond(p, a) => {
                collect_bound(p, out);
                go_program(p, out);
                go(a, out);
            }
        }
    }
    fn go_program(p: &Program, out: &mut VarSet) {
        match p {
            Program::Test(c) => go(c, out),
            Program::Ode(o) => go(&o.domain, out),
            Program::Assign(..) => {}
            Program::Choice(a, b) | Program::Seq(a, b) => {
                go_program(a, out);
                go_program(b, out);
            }
            Program::Loop(a) => go_program(a, out),
        }
    }
    go(f, &mut out);
    out
}

pub(crate) fn collect_all_formula(f: &Formula, out: &mut VarSet) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Cmp(a, _, b) => {
            out.extend(a.vars());
            out.extend(b.vars());
        }
        Formula::Not(a) => collect_all_formula(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            collect_all_formula(a, out);
            collect_all_formula(b, out);
        }
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            out.insert(x.clone());
            collect_all_formula(a, out);
        }
        Formula::Box(p, a) | Formula::Diamond(p, a) => {
            collect_all_program(p, out);
            collect_all_formula(a, out);
        }
    }
}

pub(crate) fn collect_all_program(p: &Program, out: &mut VarSet) {
    match p {
        Program::Assign(x, t) => {
            out.insert(x.clone());
            out.extend(t.vars());
        }
        Program::Test(c) => collect_all_formula(c, out),
        Program::Ode(o) => {
            for (x, t) in &o.eqs {
                out.insert(x.clone());
                out.extend(t.vars());
            }
            collect_all_formula(&o.domain, out);
        }
        Program::Choice(a, b) | Program::Seq(a, b) => {
            collect_all_program(a, out);
            collect_all_program(b, out);
        }
        Program::Loop(a) => collect_all_program(a, out),
    }
}

impl Program {
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        collect_all_program(self, &mut out);
        out
    }

    pub fn must_bound(&self) -> VarSet {
        must_bound(self)
    }
}
