use dl_core::odesolve::*;
use dl_core::syntax::*;
use dl_core::arith::normalize_poly;
use dl_core::parser::parse_term;

fn sys(src: &[(&str, &str)]) -> Vec<(Var, Term)> {
    src.iter().map(|(x, t)| (Var::new(x), parse_term(t).unwrap())).collect()
}

#[test]
fn braking_flow() {
    let ode = sys(&[("x", "v"), ("v", "a")]);
    let sol = solve_ode(&ode, &VarSet::new()).unwrap();
    assert_eq!(sol.time, Var::new("t$0"));
    let x = normalize_poly(&sol.assignments[0].1).unwrap();
    let want = normalize_poly(&parse_term("x + v*t$0 + a/2*t$0^2").unwrap()).unwrap();
    assert_eq!(x, want);
    assert!(verify_solution(&ode, &sol));
}

#[test]
fn rotation_is_unsolvable() {
    assert!(solve_ode(&sys(&[("x", "y"), ("y", "-x")]), &VarSet::new()).is_err());
}

#[test]
fn wrong_solution_rejected() {
    let ode = sys(&[("x", "2")]);
    let sol = Solution { time: Var::new("t$0"), assignments: sys(&[("x", "x + t$0")]) };
    assert!(!verify_solution(&ode, &sol));
}
