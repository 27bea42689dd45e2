mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;

use dl_core::arith::{self, decide, eval_exact, normalize_poly, qe, qe_fm, qe_lw, simplify_formula};
use dl_core::deriv::{derive_formula, derive_term};
use dl_core::odesolve::{solve_ode, verify_solution};
use dl_core::parser::{parse_formula, parse_program};
use dl_core::syntax::{admissible_substitute, free_vars, Formula, Program, Rel, Term, Var, VarSet};

use support::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pretty_then_parse_is_identity(f in formula()) {
        let text = f.to_string();
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, f, "{}", text);
    }

    #[test]
    fn pretty_then_parse_programs(p in program()) {
        let text = p.to_string();
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, p, "{}", text);
    }

    #[test]
    fn normalization_is_a_ring_homomorphism(a in term(), b in term()) {
        let (pa, pb) = (normalize_poly(&a).unwrap(), normalize_poly(&b).unwrap());
        prop_assert_eq!(normalize_poly(&Term::mul(a.clone(), b.clone())).unwrap(), &pa * &pb);
        prop_assert_eq!(normalize_poly(&Term::add(a, b)).unwrap(), &pa + &pb);
    }

    #[test]
    fn derived_formulas_are_conjunctive(f in first_order()) {
        if let Ok(d) = derive_formula(&f) {
            let text = d.to_string();
            prop_assert!(!text.contains('|') && !text.contains("!="), "{}", text);
        }
    }

    #[test]
    fn derivative_is_linear(a in term(), b in term()) {
        let sum = derive_term(&Term::add(a.clone(), b.clone())).unwrap();
        let parts = Term::add(derive_term(&a).unwrap(), derive_term(&b).unwrap());
        prop_assert_eq!(normalize_poly(&sum).unwrap(), normalize_poly(&parts).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn assignment_axiom_is_valid(x in small_var(), t in small_term(), f in post(), s in exact_state()) {
        prop_assume!(admissible_substitute(&f, &x, &t).is_ok());
        axiom_case("[:=]", Formula::boxed(Program::assign(x, t), f), &s)?;
    }

    #[test]
    fn test_axiom_is_valid(c in small_fo(), f in post(), s in exact_state()) {
        axiom_case("[?]", Formula::boxed(Program::test(c), f), &s)?;
    }

    #[test]
    fn choice_axiom_is_valid(a in discrete(), b in discrete(), f in post(), s in exact_state()) {
        axiom_case("[++]", Formula::boxed(Program::choice(a, b), f), &s)?;
    }

    #[test]
    fn sequence_axiom_is_valid(a in discrete(), b in discrete(), f in post(), s in exact_state()) {
        axiom_case("[;]", Formula::boxed(Program::seq(a, b), f), &s)?;
    }

    #[test]
    fn diamond_axiom_is_valid(a in discrete(), f in post(), s in exact_state()) {
        axiom_case("<>", Formula::diamond(a, f), &s)?;
    }

    #[test]
    fn unwinding_axiom_is_valid(a in straight_line(), f in small_fo(), s in exact_state(), k in 0usize..3) {
        unwind_case(a, f, &s, k)?;
    }

    #[test]
    fn substitution_lemma(x in small_var(), t in small_term(), f in post(), s in exact_state()) {
        let Ok(g) = admissible_substitute(&f, &x, &t) else {
            return Err(TestCaseError::reject("clash"));
        };
        let mut moved = s.clone();
        moved.insert(x, arith::eval_term(&t, &s).unwrap());
        let (Some(a), Some(b)) = (truth(&g, &s, BOUND), truth(&f, &moved, BOUND)) else {
            return Err(TestCaseError::reject("reachable set too large"));
        };
        prop_assert_eq!(a, b);
    }

    #[test]
    fn truth_depends_on_free_variables_only(f in post(), s in exact_state(), z in rational()) {
        for v in ["x", "y"] {
            let v = Var::new(v);
            if free_vars(&f).contains(&v) {
                continue;
            }
            let mut other = s.clone();
            other.insert(v, z.clone());
            let (Some(a), Some(b)) = (truth(&f, &s, BOUND), truth(&f, &other, BOUND)) else {
                return Err(TestCaseError::reject("reachable set too large"));
            };
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn quadratic_elimination_matches_root_analysis() {
    let rels = [Rel::Eq, Rel::Ne, Rel::Gt, Rel::Ge, Rel::Lt, Rel::Le];
    let eliminated: Vec<Formula> = rels.iter().map(|r| qe(&quadratic(*r)).unwrap()).collect();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(1000));
    runner
        .run(&(coefficient(), coefficient(), coefficient()), |(a, b, c)| {
            let s = BTreeMap::from([(Var::new("a"), a.clone()), (Var::new("b"), b.clone()), (Var::new("c"), c.clone())]);
            for (r, q) in rels.iter().zip(&eliminated) {
                prop_assert_eq!(eval_exact(q, &s).unwrap(), quadratic_oracle(&a, &b, &c, *r), "{} {:?}", q, s);
            }
            Ok(())
        })
        .unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn linear_procedures_agree(m in linear_matrix(), universal in any::<bool>(), s in state_over(&["y", "z"])) {
        let x = Var::new("x");
        let f = if universal { Formula::forall(x, m) } else { Formula::exists(x, m) };
        let fm = qe_fm(&f).unwrap();
        let lw = qe_lw(&f).unwrap();
        let vs = qe(&f).unwrap();
        for q in [&fm, &lw, &vs] {
            prop_assert!(free_vars(q).is_subset(&free_vars(&f)), "{}", q);
        }
        let a = eval_exact(&fm, &s).unwrap();
        prop_assert_eq!(a, eval_exact(&lw, &s).unwrap(), "{} / {}", fm, lw);
        prop_assert_eq!(a, eval_exact(&vs, &s).unwrap(), "{} / {}", fm, vs);
    }

    #[test]
    fn decide_agrees_with_elimination(m in linear_matrix(), q in prop::collection::vec(any::<bool>(), 3)) {
        let f = ["x", "y", "z"].iter().zip(&q).fold(m, |acc, (v, all)| {
            if *all { Formula::forall(Var::new(v), acc) } else { Formula::exists(Var::new(v), acc) }
        });
        let simplified = simplify_formula(&qe(&f).unwrap()).unwrap();
        prop_assert_eq!(decide(&f).unwrap(), simplified == Formula::True);
        prop_assert!(simplified == Formula::True || simplified == Formula::False);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivation_lemma(sys in system()) {
        derivation_case(sys)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flows_compose(eqs in triangular()) {
        let sol = solve_ode(&eqs, &VarSet::new()).unwrap();
        prop_assert!(verify_solution(&eqs, &sol));
        let t = sol.time.clone();
        let s = Var::new("s");
        let at_sum = |x: &Term| x.replace(&|v| (*v == t).then(|| Term::add(Term::Var(t.clone()), Term::Var(s.clone()))));
        let at_t: BTreeMap<Var, Term> = sol.assignments.iter().cloned().collect();
        let composed = |x: &Term| {
            x.replace(&|v| if *v == t { Some(Term::Var(s.clone())) } else { at_t.get(v).cloned() })
        };
        for (_, y) in &sol.assignments {
            prop_assert_eq!(normalize_poly(&at_sum(y)).unwrap(), normalize_poly(&composed(y)).unwrap());
        }
    }
}
