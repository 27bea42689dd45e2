//! Generators and checks shared by the property suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use dl_core::arith::Budget;
use dl_core::deriv::{derive_term, diff_subst};
use dl_core::kernel::{derive, Args, Position, Rule, Sequent};
use dl_core::parser::parse_formula;
use dl_core::sim::{eval_discrete, ExactState};
use dl_core::syntax::{Formula, Ode, Program, Rel, Term, Var};

pub const POOL: &[&str] = &["x", "y", "z", "a", "b"];

pub fn var() -> impl Strategy<Value = Var> {
    prop::sample::select(POOL).prop_map(Var::new)
}

pub fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(vec![Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt])
}

pub fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![(0i64..10).prop_map(Term::int), var().prop_map(Term::Var)];
    leaf.prop_recursive(3, 12, 2, |t| {
        prop_oneof![
            t.clone().prop_map(Term::neg),
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (t.clone(), 1i64..5).prop_map(|(a, k)| Term::div(a, Term::int(k))),
            (t, 2u32..4).prop_map(|(a, n)| Term::pow(a, n)),
        ]
    })
}

pub fn atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        6 => (term(), rel(), term()).prop_map(|(a, r, b)| Formula::cmp(a, r, b)),
    ]
}

pub fn first_order() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(3, 10, 2, |f| {
        prop_oneof![
            f.clone().prop_map(Formula::not),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::imply(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::equiv(a, b)),
            (var(), f.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (var(), f).prop_map(|(x, a)| Formula::exists(x, a)),
        ]
    })
}

pub fn ode() -> impl Strategy<Value = Program> {
    (prop::sample::subsequence(POOL.to_vec(), 1..3), prop::collection::vec(term(), 2), first_order()).prop_map(
        |(xs, rhs, dom)| {
            let eqs = xs.iter().zip(rhs).map(|(x, t)| (Var::new(x), t)).collect();
            Program::Ode(Ode::new(eqs, dom))
        },
    )
}

pub fn program() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![
        (var(), term()).prop_map(|(x, t)| Program::assign(x, t)),
        first_order().prop_map(Program::test),
        ode(),
    ];
    leaf.prop_recursive(2, 6, 2, |p| {
        prop_oneof![
            (p.clone(), p.clone()).prop_map(|(a, b)| Program::choice(a, b)),
            (p.clone(), p.clone()).prop_map(|(a, b)| Program::seq(a, b)),
            p.prop_map(Program::looped),
        ]
    })
}

pub fn formula() -> impl Strategy<Value = Formula> {
    atom().prop_recursive(6, 24, 2, |f| {
        prop_oneof![
            f.clone().prop_map(Formula::not),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::imply(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::equiv(a, b)),
            (var(), f.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (var(), f.clone()).prop_map(|(x, a)| Formula::exists(x, a)),
            (program(), f.clone()).prop_map(|(p, a)| Formula::boxed(p, a)),
            (program(), f).prop_map(|(p, a)| Formula::diamond(p, a)),
        ]
    })
}

// Discrete fragment over x and y with small values, so that reachable sets
// stay small.

pub fn small_var() -> impl Strategy<Value = Var> {
    prop::sample::select(vec!["x", "y"]).prop_map(Var::new)
}

pub fn small_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![(-3i64..4).prop_map(Term::int), small_var().prop_map(Term::Var)];
    leaf.prop_recursive(2, 4, 2, |t| {
        prop_oneof![
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (t.clone(), t.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (t, 1i64..3).prop_map(|(a, k)| Term::div(a, Term::int(k))),
        ]
    })
}

pub fn small_fo() -> impl Strategy<Value = Formula> {
    let atom = (small_term(), rel(), small_term()).prop_map(|(a, r, b)| Formula::cmp(a, r, b));
    atom.prop_recursive(2, 4, 2, |f| {
        prop_oneof![
            f.clone().prop_map(Formula::not),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (f.clone(), f).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
}

pub fn straight_line() -> impl Strategy<Value = Program> {
    let leaf = prop_oneof![
        3 => (small_var(), small_term()).prop_map(|(x, t)| Program::assign(x, t)),
        1 => small_fo().prop_map(Program::test),
    ];
    leaf.prop_recursive(2, 4, 2, |p| {
        prop_oneof![
            (p.clone(), p.clone()).prop_map(|(a, b)| Program::choice(a, b)),
            (p.clone(), p).prop_map(|(a, b)| Program::seq(a, b)),
        ]
    })
}

pub fn discrete() -> impl Strategy<Value = Program> {
    straight_line().prop_recursive(2, 4, 2, |p| {
        prop_oneof![
            (p.clone(), p.clone()).prop_map(|(a, b)| Program::choice(a, b)),
            (p.clone(), p.clone()).prop_map(|(a, b)| Program::seq(a, b)),
            p.prop_map(Program::looped),
        ]
    })
}

pub fn post() -> impl Strategy<Value = Formula> {
    prop_oneof![
        3 => small_fo(),
        1 => (discrete(), small_fo()).prop_map(|(p, f)| Formula::boxed(p, f)),
        1 => (discrete(), small_fo()).prop_map(|(p, f)| Formula::diamond(p, f)),
    ]
}

pub fn rational() -> impl Strategy<Value = BigRational> {
    (-6i64..7, 1i64..4).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

pub fn exact_state() -> impl Strategy<Value = ExactState> {
    (rational(), rational()).prop_map(|(x, y)| BTreeMap::from([(Var::new("x"), x), (Var::new("y"), y)]))
}

pub const BOUND: usize = 2;
pub const CAP: usize = 20_000;

pub fn truth(f: &Formula, s: &ExactState, bound: usize) -> Option<bool> {
    eval_discrete(f, s, bound, CAP).ok()
}

pub fn rewrite(name: &str, f: &Formula) -> Formula {
    let s = Sequent::goal(f.clone());
    let out = derive(&s, &Rule::new(name, Args::at(Position::succ(0))), &Budget::unlimited())
        .unwrap_or_else(|e| panic!("{name} on {f}: {e}"));
    out[0].succ[0].clone()
}

pub fn same_truth(lhs: &Formula, rhs: &Formula, s: &ExactState) -> Result<(), TestCaseError> {
    match (truth(lhs, s, BOUND), truth(rhs, s, BOUND)) {
        (Some(a), Some(b)) => prop_assert_eq!(a, b, "{} vs {} at {:?}", lhs, rhs, s),
        _ => return Err(TestCaseError::reject("reachable set too large")),
    }
    Ok(())
}



// Quantifier elimination.

pub fn quadratic_oracle(a: &BigRational, b: &BigRational, c: &BigRational, r: Rel) -> bool {
    let disc = b * b - BigRational::from_integer(4.into()) * a * c;
    let z = |q: &BigRational| q.is_zero();
    match r {
        Rel::Eq => if z(a) { !z(b) || z(c) } else { !disc.is_negative() },
        Rel::Ne => !(z(a) && z(b) && z(c)),
        Rel::Gt => a.is_positive() || (z(a) && (!z(b) || c.is_positive())) || (a.is_negative() && disc.is_positive()),
        Rel::Ge => a.is_positive() || (z(a) && (!z(b) || !c.is_negative())) || (a.is_negative() && !disc.is_negative()),
        Rel::Lt => quadratic_oracle(&-a, &-b, &-c, Rel::Gt),
        Rel::Le => quadratic_oracle(&-a, &-b, &-c, Rel::Ge),
    }
}

pub fn coefficient() -> impl Strategy<Value = BigRational> {
    prop_oneof![1 => Just(BigRational::zero()), 3 => rational()]
}

pub fn linear_atom() -> impl Strategy<Value = Formula> {
    let vars = ["x", "y", "z"];
    (prop::collection::vec(-3i64..4, 3), -4i64..5, rel()).prop_map(move |(cs, k, r)| {
        let lhs = cs.iter().zip(vars).fold(Term::int(k), |acc, (c, v)| {
            Term::add(acc, Term::mul(Term::int(*c), Term::named(v)))
        });
        Formula::cmp(lhs, r, Term::zero())
    })
}

pub fn linear_matrix() -> impl Strategy<Value = Formula> {
    linear_atom().prop_recursive(2, 4, 2, |f| {
        prop_oneof![
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (f.clone(), f.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            f.prop_map(Formula::not),
        ]
    })
}

pub fn state_over(names: &[&str]) -> impl Strategy<Value = ExactState> {
    let names: Vec<Var> = names.iter().map(Var::new).collect();
    prop::collection::vec(rational(), names.len()).prop_map(move |vals| names.iter().cloned().zip(vals).collect())
}

pub fn quadratic(r: Rel) -> Formula {
    parse_formula(&format!("\\exists x a*x^2 + b*x + c {} 0", r.symbol())).unwrap()
}



// Flows.

pub fn float_state(names: &[Var], vals: &[f64]) -> dl_core::sim::State {
    names.iter().cloned().zip(vals.iter().copied()).collect()
}

pub fn rk4(eqs: &[(Var, Term)], s: &[f64], h: f64) -> Vec<f64> {
    let xs: Vec<Var> = eqs.iter().map(|(x, _)| x.clone()).collect();
    let f = |v: &[f64]| -> Vec<f64> {
        let st = float_state(&xs, v);
        eqs.iter().map(|(_, t)| dl_core::sim::eval_term(t, &st)).collect()
    };
    let add = |a: &[f64], b: &[f64], k: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + k * y).collect() };
    let k1 = f(s);
    let k2 = f(&add(s, &k1, h / 2.0));
    let k3 = f(&add(s, &k2, h / 2.0));
    let k4 = f(&add(s, &k3, h));
    (0..s.len()).map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

pub fn poly_term(vars: Vec<Var>, max_degree: u32) -> impl Strategy<Value = Term> {
    let n = vars.len();
    prop::collection::vec((prop::collection::vec(0u32..=max_degree, n), -2i64..3), 1..4).prop_map(move |mons| {
        mons.into_iter().fold(Term::zero(), |acc, (exps, c)| {
            let m = vars.iter().zip(exps).fold(Term::int(c), |m, (v, e)| {
                if e == 0 { m } else { Term::mul(m, Term::pow(Term::Var(v.clone()), e)) }
            });
            Term::add(acc, m)
        })
    })
}

pub fn system() -> impl Strategy<Value = (Vec<(Var, Term)>, Term, Vec<f64>, f64)> {
    (1usize..=3).prop_flat_map(|n| {
        let xs: Vec<Var> = (0..n).map(|i| Var::new(format!("x{i}"))).collect();
        (
            prop::collection::vec(poly_term(xs.clone(), 2), n),
            poly_term(xs.clone(), 3),
            prop::collection::vec(-1.0f64..1.0, n),
            0.0f64..0.2,
        )
            .prop_map(move |(rhs, c, init, t)| (xs.iter().cloned().zip(rhs).collect(), c, init, t))
    })
}


pub fn triangular() -> impl Strategy<Value = Vec<(Var, Term)>> {
    let xs: Vec<Var> = ["p", "q", "r"].iter().map(Var::new).collect();
    (-3i64..4, poly_term(xs[..1].to_vec(), 2), poly_term(xs[..2].to_vec(), 2)).prop_map(move |(c, t1, t2)| {
        vec![(xs[0].clone(), Term::int(c)), (xs[1].clone(), t1), (xs[2].clone(), t2)]
    })
}

pub fn axiom_case(name: &str, lhs: Formula, s: &ExactState) -> Result<(), TestCaseError> {
    same_truth(&lhs, &rewrite(name, &lhs), s)
}

/// `[a*]f` with `k + 1` iterations against its unwinding with `k`.
pub fn unwind_case(a: Program, f: Formula, s: &ExactState, k: usize) -> Result<(), TestCaseError> {
    let lhs = Formula::boxed(Program::looped(a), f);
    let rhs = rewrite("[*]", &lhs);
    let (Some(l), Some(r)) = (truth(&lhs, s, k + 1), truth(&rhs, s, k)) else {
        return Err(TestCaseError::reject("reachable set too large"));
    };
    prop_assert_eq!(l, r, "{} at {:?}", lhs, s);
    Ok(())
}

/// Central difference of `c` along the flow against its symbolic derivative.
pub fn derivation_case(sys: (Vec<(Var, Term)>, Term, Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let (eqs, c, init, t) = sys;
    let xs: Vec<Var> = eqs.iter().map(|(x, _)| x.clone()).collect();
    let steps = (t / 1e-3).ceil() as usize;
    let mut s = init;
    for _ in 0..steps {
        s = rk4(&eqs, &s, t / steps.max(1) as f64);
    }
    prop_assume!(s.iter().all(|v| v.is_finite() && v.abs() < 10.0));
    let h = 1e-4;
    let value = |v: &[f64]| dl_core::sim::eval_term(&c, &float_state(&xs, v));
    let slope = (value(&rk4(&eqs, &s, h)) - value(&rk4(&eqs, &s, -h))) / (2.0 * h);
    let d = derive_term(&c).unwrap();
    let Formula::Cmp(dt, _, _) = diff_subst(&Formula::cmp(d, Rel::Eq, Term::zero()), &eqs) else { unreachable!() };
    let symbolic = dl_core::sim::eval_term(&dt, &float_state(&xs, &s));
    prop_assert!((slope - symbolic).abs() <= 1e-4 * symbolic.abs().max(1.0), "{} along {:?}: {} vs {}", c, eqs, slope, symbolic);
    Ok(())
}
