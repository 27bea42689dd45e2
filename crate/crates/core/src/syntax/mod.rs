//! Abstract syntax of differential dynamic logic.
//!
//! Terms are polynomial expressions over rational constants, formulas are
//! first-order real arithmetic extended with box and diamond modalities, and
//! hybrid programs combine assignments, tests, differential equations,
//! choice, sequence and repetition.

mod automaton;
mod desugar;
mod subst;
mod vars;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use automaton::{choice_branches, compile_automaton, AutomatonError, Edge, HybridAutomaton, Mode};
pub use desugar::{desugar, SurfaceProgram};
pub use subst::{
    admissible_substitute, admissible_substitute_program, rename_formula, rename_program, substitute_term,
    vectorial_assignment, ClashError,
};
pub use vars::{bound_vars, free_vars, must_bound, var_analysis, Expr, VarSet};

/// A real-valued variable, or the differential symbol `x'` of one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    differential: bool,
}

impl Var {
    pub fn new(name: impl AsRef<str>) -> Var {
        let name = name.as_ref();
        assert!(!name.is_empty(), "variable names are nonempty");
        Var {
            name: Arc::from(name),
            differential: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_differential(&self) -> bool {
        self.differential
    }

    /// The differential symbol `x'` of this (base) variable.
    pub fn prime(&self) -> Var {
        Var {
            name: self.name.clone(),
            differential: true,
        }
    }

    /// The base variable `x` of a differential symbol `x'`.
    pub fn base(&self) -> Var {
        Var {
            name: self.name.clone(),
            differential: false,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.differential {
            write!(f, "{}'", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

impl serde::Serialize for Var {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Returns the first name `prefix$n` that is not in `taken`.
pub fn fresh_var(prefix: &str, taken: &VarSet) -> Var {
    (0..)
        .map(|n| Var::new(format!("{prefix}${n}")))
        .find(|v| !taken.contains(v))
        .expect("unbounded name supply")
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Nonnegative constant with a finite decimal expansion. Other rationals
    /// are spelled with `Neg` and `Div`; see [`Term::constant`].
    Num(BigRational),
    Var(Var),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Divisors must be nonzero constants.
    Div(Box<Term>, Box<Term>),
    Pow(Box<Term>, u32),
}

fn is_finite_decimal(r: &BigRational) -> bool {
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
    }
    while (&d % &five).is_zero() {
        d /= &five;
    }
    d.is_one()
}

impl Term {
    pub fn int(n: i64) -> Term {
        Term::constant(&BigRational::from_integer(n.into()))
    }

    /// Builds the canonical term for a rational constant: nonnegative
    /// decimals are literals, negatives use `Neg`, and other fractions use
    /// `Div` of two integer literals.
    pub fn constant(r: &BigRational) -> Term {
        if r.is_negative() {
            return Term::Neg(Box::new(Term::constant(&-r)));
        }
        if r.is_integer() || is_finite_decimal(r) {
            Term::Num(r.clone())
        } else {
            Term::Div(
                Box::new(Term::Num(BigRational::from_integer(r.numer().clone()))),
                Box::new(Term::Num(BigRational::from_integer(r.denom().clone()))),
            )
        }
    }

    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn named(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn zero() -> Term {
        Term::int(0)
    }

    pub fn neg(t: Term) -> Term {
        Term::Neg(Box::new(t))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Term, n: u32) -> Term {
        Term::Pow(Box::new(a), n)
    }

    /// The value of a variable-free term, if it has one (constant divisors
    /// must be nonzero).
    pub fn const_value(&self) -> Option<BigRational> {
        Some(match self {
            Term::Num(r) => r.clone(),
            Term::Var(_) => return None,
            Term::Neg(a) => -a.const_value()?,
            Term::Add(a, b) => a.const_value()? + b.const_value()?,
            Term::Sub(a, b) => a.const_value()? - b.const_value()?,
            Term::Mul(a, b) => a.const_value()? * b.const_value()?,
            Term::Div(a, b) => {
                let d = b.const_value()?;
                if d.is_zero() {
                    return None;
                }
                a.const_value()? / d
            }
            Term::Pow(a, n) => {
                let base = a.const_value()?;
                let mut acc = BigRational::one();
                for _ in 0..*n {
                    acc *= &base;
                }
                acc
            }
        })
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Term::Num(r) if r.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Term::Num(r) if r.is_one())
    }

    /// Replaces every occurrence of each mapped variable; the caller is
    /// responsible for the absence of binders (terms have none).
    pub fn replace(&self, map: &dyn Fn(&Var) -> Option<Term>) -> Term {
        match self {
            Term::Num(_) => self.clone(),
            Term::Var(v) => map(v).unwrap_or_else(|| self.clone()),
            Term::Neg(a) => Term::neg(a.replace(map)),
            Term::Add(a, b) => Term::add(a.replace(map), b.replace(map)),
            Term::Sub(a, b) => Term::sub(a.replace(map), b.replace(map)),
            Term::Mul(a, b) => Term::mul(a.replace(map), b.replace(map)),
            Term::Div(a, b) => Term::div(a.replace(map), b.replace(map)),
            Term::Pow(a, n) => Term::pow(a.replace(map), *n),
        }
    }

    pub fn visit_vars(&self, f: &mut dyn FnMut(&Var)) {
        match self {
            Term::Num(_) => {}
            Term::Var(v) => f(v),
            Term::Neg(a) | Term::Pow(a, _) => a.visit_vars(f),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    pub fn mentions(&self, x: &Var) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == x);
        found
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_term(self))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rel {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Lt => "<",
        }
    }

    /// The relation `r'` with `a r b` equivalent to `not (a r' b)`.
    pub fn negate(self) -> Rel {
        match self {
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
        }
    }

    /// The relation `r'` with `a r b` equivalent to `b r' a`.
    pub fn flip(self) -> Rel {
        match self {
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
            r => r,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Rel::Eq => ord == Equal,
            Rel::Ne => ord != Equal,
            Rel::Ge => ord != Less,
            Rel::Gt => ord == Greater,
            Rel::Le => ord != Greater,
            Rel::Lt => ord == Less,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Cmp(Term, Rel, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    Box(Box<Program>, Box<Formula>),
    Diamond(Box<Program>, Box<Formula>),
}

impl Formula {
    pub fn cmp(a: Term, r: Rel, b: Term) -> Formula {
        Formula::Cmp(a, r, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imply(a: Formula, b: Formula) -> Formula {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn forall(x: Var, f: Formula) -> Formula {
        Formula::Forall(x, Box::new(f))
    }

    pub fn exists(x: Var, f: Formula) -> Formula {
        Formula::Exists(x, Box::new(f))
    }

    pub fn boxed(p: Program, f: Formula) -> Formula {
        Formula::Box(Box::new(p), Box::new(f))
    }

    pub fn diamond(p: Program, f: Formula) -> Formula {
        Formula::Diamond(Box::new(p), Box::new(f))
    }

    /// Right-nested conjunction; `true` when empty.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut v: Vec<Formula> = fs.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Formula::True;
        };
        while let Some(f) = v.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// Right-nested disjunction; `false` when empty.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut v: Vec<Formula> = fs.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Formula::False;
        };
        while let Some(f) = v.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    /// Splits nested conjunctions into their conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(f),
            }
        }
        go(self, &mut out);
        out
    }

    /// Free of modalities.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => true,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.is_first_order(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.is_first_order() && b.is_first_order()
            }
            Formula::Box(..) | Formula::Diamond(..) => false,
        }
    }

    /// Free of modalities and quantifiers.
    pub fn is_quantifier_free_arith(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => true,
            Formula::Not(a) => a.is_quantifier_free_arith(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.is_quantifier_free_arith() && b.is_quantifier_free_arith()
            }
            _ => false,
        }
    }

    /// Number of modal operators.
    pub fn modality_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) => 0,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.modality_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.modality_count() + b.modality_count()
            }
            Formula::Box(_, a) | Formula::Diamond(_, a) => 1 + a.modality_count(),
        }
    }

    /// All variables occurring anywhere (free or bound).
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        vars::collect_all_formula(self, &mut out);
        out
    }

    /// Applies `f` to every term of the formula, including terms inside
    /// programs. Binders are not consulted.
    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(a, r, b) => Formula::Cmp(f(a), *r, f(b)),
            Formula::Not(a) => Formula::not(a.map_terms(f)),
            Formula::And(a, b) => Formula::and(a.map_terms(f), b.map_terms(f)),
            Formula::Or(a, b) => Formula::or(a.map_terms(f), b.map_terms(f)),
            Formula::Imply(a, b) => Formula::imply(a.map_terms(f), b.map_terms(f)),
            Formula::Equiv(a, b) => Formula::equiv(a.map_terms(f), b.map_terms(f)),
            Formula::Forall(x, a) => Formula::forall(x.clone(), a.map_terms(f)),
            Formula::Exists(x, a) => Formula::exists(x.clone(), a.map_terms(f)),
            Formula::Box(p, a) => Formula::boxed(p.map_terms(f), a.map_terms(f)),
            Formula::Diamond(p, a) => Formula::diamond(p.map_terms(f), a.map_terms(f)),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_formula(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_formula(self))
    }
}

/// A system of differential equations `x1'=θ1, ..., xn'=θn & χ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ode {
    pub eqs: Vec<(Var, Term)>,
    pub domain: Formula,
}

impl Ode {
    pub fn new(eqs: Vec<(Var, Term)>, domain: Formula) -> Ode {
        Ode { eqs, domain }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.eqs.iter().map(|(x, _)| x)
    }

    pub fn rhs(&self, x: &Var) -> Option<&Term> {
        self.eqs.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn has_domain(&self) -> bool {
        self.domain != Formula::True
    }

    /// Left-hand sides pairwise distinct, base variables only.
    pub fn check_well_formed(&self) -> Result<(), String> {
        let mut seen = VarSet::new();
        for (x, t) in &self.eqs {
            if x.is_differential() {
                return Err(format!("differential symbol {x} on the left of an ODE"));
            }
            if !seen.insert(x.clone()) {
                return Err(format!("variable {x} has two differential equations"));
            }
            let mut bad = None;
            t.visit_vars(&mut |v| {
                if v.is_differential() {
                    bad = Some(v.clone());
                }
            });
            if let Some(v) = bad {
                return Err(format!("differential symbol {v} in ODE right-hand side"));
            }
        }
        if !self.domain.is_first_order() {
            return Err("evolution domain must be first-order".into());
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Assign(Var, Term),
    Test(Formula),
    Ode(Ode),
    Choice(Box<Program>, Box<Program>),
    Seq(Box<Program>, Box<Program>),
    Loop(Box<Program>),
}

impl Program {
    pub fn assign(x: Var, t: Term) -> Program {
        Program::Assign(x, t)
    }

    pub fn test(f: Formula) -> Program {
        Program::Test(f)
    }

    pub fn ode(eqs: Vec<(Var, Term)>, domain: Formula) -> Program {
        Program::Ode(Ode::new(eqs, domain))
    }

    pub fn choice(a: Program, b: Program) -> Program {
        Program::Choice(Box::new(a), Box::new(b))
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn looped(a: Program) -> Program {
        Program::Loop(Box::new(a))
    }

    /// Right-nested sequential composition; `?true` when empty.
    pub fn seq_all(ps: impl IntoIterator<Item = Program>) -> Program {
        let mut v: Vec<Program> = ps.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Program::Test(Formula::True);
        };
        while let Some(p) = v.pop() {
            acc = Program::seq(p, acc);
        }
        acc
    }

    /// Right-nested choice; `?false` when empty.
    pub fn choice_all(ps: impl IntoIterator<Item = Program>) -> Program {
        let mut v: Vec<Program> = ps.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Program::Test(Formula::False);
        };
        while let Some(p) = v.pop() {
            acc = Program::choice(p, acc);
        }
        acc
    }

    pub fn has_ode(&self) -> bool {
        match self {
            Program::Ode(_) => true,
            Program::Assign(..) | Program::Test(_) => false,
            Program::Choice(a, b) | Program::Seq(a, b) => a.has_ode() || b.has_ode(),
            Program::Loop(a) => a.has_ode(),
        }
    }

    /// Number of program constructors.
    pub fn size(&self) -> usize {
        match self {
            Program::Assign(..) | Program::Test(_) | Program::Ode(_) => 1,
            Program::Choice(a, b) | Program::Seq(a, b) => 1 + a.size() + b.size(),
            Program::Loop(a) => 1 + a.size(),
        }
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Program {
        match self {
            Program::Assign(x, t) => Program::Assign(x.clone(), f(t)),
            Program::Test(c) => Program::Test(c.map_terms(f)),
            Program::Ode(o) => Program::Ode(Ode::new(
                o.eqs.iter().map(|(x, t)| (x.clone(), f(t))).collect(),
                o.domain.map_terms(f),
            )),
            Program::Choice(a, b) => Program::choice(a.map_terms(f), b.map_terms(f)),
            Program::Seq(a, b) => Program::seq(a.map_terms(f), b.map_terms(f)),
            Program::Loop(a) => Program::looped(a.map_terms(f)),
        }
    }

    /// Checks the structural invariants of programs: well-formed ODEs,
    /// first-order tests and domains.
    pub fn check_well_formed(&self) -> Result<(), String> {
        match self {
            Program::Assign(x, _) if x.is_differential() => {
                Err(format!("cannot assign differential symbol {x}"))
            }
            Program::Assign(..) => Ok(()),
            Program::Test(c) if !c.is_first_order() => Err("tests must be first-order".into()),
            Program::Test(_) => Ok(()),
            Program::Ode(o) => o.check_well_formed(),
            Program::Choice(a, b) | Program::Seq(a, b) => {
                a.check_well_formed()?;
                b.check_well_formed()
            }
            Program::Loop(a) => a.check_well_formed(),
        }
    }
}

impl fmt::Debug for Ode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_program(&Program::Ode(self.clone())))
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_program(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::pretty_program(self))
    }
}
