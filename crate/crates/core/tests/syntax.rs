mod basics {
    use dl_core::syntax::*;
    use num_rational::BigRational;

    #[test]
    fn constants_are_canonical() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(Term::constant(&half), Term::Num(half.clone()));
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(
            Term::constant(&-third.clone()),
            Term::neg(Term::div(Term::int(1), Term::int(3)))
        );
        assert_eq!(Term::constant(&third).const_value(), Some(BigRational::new(1.into(), 3.into())));
    }

    #[test]
    fn fresh_names_skip_taken() {
        let mut taken = VarSet::new();
        taken.insert(Var::new("t$0"));
        assert_eq!(fresh_var("t", &taken), Var::new("t$1"));
    }

    #[test]
    fn ode_rejects_duplicate_lhs() {
        let o = Ode::new(
            vec![(Var::new("x"), Term::int(1)), (Var::new("x"), Term::int(2))],
            Formula::True,
        );
        assert!(o.check_well_formed().is_err());
    }
}

mod subst {
    use dl_core::syntax::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn capture_is_rejected() {
        let phi = Formula::forall(v("y"), Formula::cmp(Term::named("x"), Rel::Ge, Term::named("y")));
        assert!(admissible_substitute(&phi, &v("x"), &Term::named("y")).is_err());
    }

    #[test]
    fn must_bound_stops_substitution() {
        let phi = Formula::boxed(
            Program::assign(v("x"), Term::add(Term::named("x"), Term::int(1))),
            Formula::cmp(Term::named("x"), Rel::Ge, Term::int(0)),
        );
        let got = admissible_substitute(&phi, &v("x"), &Term::int(5)).unwrap();
        let want = Formula::boxed(
            Program::assign(v("x"), Term::add(Term::int(5), Term::int(1))),
            Formula::cmp(Term::named("x"), Rel::Ge, Term::int(0)),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn cyclic_vectorial_assignment_copies() {
        let p = vectorial_assignment(
            &[(v("x"), Term::named("y")), (v("y"), Term::named("x"))],
            &VarSet::new(),
        );
        assert_eq!(p.size(), 7);
    }
}

mod desugar {
    use dl_core::syntax::*;

    #[test]
    fn nondeterministic_assignment() {
        let x = Var::new("x");
        let got = desugar(&SurfaceProgram::AssignAny(x.clone()));
        assert_eq!(
            got,
            Program::choice(
                Program::ode(vec![(x.clone(), Term::int(1))], Formula::True),
                Program::ode(vec![(x, Term::int(-1))], Formula::True),
            )
        );
    }
}
