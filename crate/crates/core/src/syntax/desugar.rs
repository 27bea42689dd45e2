//! Derived program constructs and their expansion into core programs.

use super::{Formula, Ode, Program, Term, Var};

/// Hybrid programs extended with nondeterministic assignment, conditionals
/// and while loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceProgram {
    Assign(Var, Term),
    AssignAny(Var),
    Test(Formula),
    Ode(Ode),
    Choice(Box<SurfaceProgram>, Box<SurfaceProgram>),
    Seq(Box<SurfaceProgram>, Box<SurfaceProgram>),
    Loop(Box<SurfaceProgram>),
    IfThen(Formula, Box<SurfaceProgram>),
    IfThenElse(Formula, Box<SurfaceProgram>, Box<SurfaceProgram>),
    While(Formula, Box<SurfaceProgram>),
}

impl From<&Program> for SurfaceProgram {
    fn from(p: &Program) -> Self {
        match p {
            Program::Assign(x, t) => SurfaceProgram::Assign(x.clone(), t.clone()),
            Program::Test(c) => SurfaceProgram::Test(c.clone()),
            Program::Ode(o) => SurfaceProgram::Ode(o.clone()),
            Program::Choice(a, b) => SurfaceProgram::Choice(Box::new((&**a).into()), Box::new((&**b).into())),
            Program::Seq(a, b) => SurfaceProgram::Seq(Box::new((&**a).into()), Box::new((&**b).into())),
            Program::Loop(a) => SurfaceProgram::Loop(Box::new((&**a).into())),
        }
    }
}

fn negate(c: &Formula) -> Formula {
    match c {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        _ => Formula::not(c.clone()),
    }
}

/// Expands derived constructs:
///
/// * `x:=*` becomes `{x'=1} ++ {x'=-1}`
/// * `if (c) {a}` becomes `{?c; a} ++ ?!c`
/// * `if (c) {a} else {b}` becomes `{?c; a} ++ {?!c; b}`
/// * `while (c) {a}` becomes `{?c; a}*; ?!c`
pub fn desugar(p: &SurfaceProgram) -> Program {
    match p {
        SurfaceProgram::Assign(x, t) => Program::assign(x.clone(), t.clone()),
        SurfaceProgram::AssignAny(x) => Program::choice(
            Program::ode(vec![(x.clone(), Term::int(1))], Formula::True),
            Program::ode(vec![(x.clone(), Term::int(-1))], Formula::True),
        ),
        SurfaceProgram::Test(c) => Program::test(c.clone()),
        SurfaceProgram::Ode(o) => Program::Ode(o.clone()),
        SurfaceProgram::Choice(a, b) => Program::choice(desugar(a), desugar(b)),
        SurfaceProgram::Seq(a, b) => Program::seq(desugar(a), desugar(b)),
        SurfaceProgram::Loop(a) => Program::looped(desugar(a)),
        SurfaceProgram::IfThen(c, a) => Program::choice(
            Program::seq(Program::test(c.clone()), desugar(a)),
            Program::test(negate(c)),
        ),
        SurfaceProgram::IfThenElse(c, a, b) => Program::choice(
            Program::seq(Program::test(c.clone()), desugar(a)),
            Program::seq(Program::test(negate(c)), desugar(b)),
        ),
        SurfaceProgram::While(c, a) => Program::seq(
            Program::looped(Program::seq(Program::test(c.clone()), desugar(a))),
            Program::test(negate(c)),
        ),
    }
}
