use dl_core::deriv::*;
use dl_core::syntax::*;
use dl_core::parser::{parse_formula, parse_term};

fn ode(src: &[(&str, &str)]) -> Vec<(Var, Term)> {
    src.iter().map(|(x, t)| (Var::new(x), parse_term(t).unwrap())).collect()
}

#[test]
fn constants_and_sums() {
    assert_eq!(derive_term(&parse_term("5").unwrap()).unwrap(), Term::zero());
    assert_eq!(derive_term(&parse_term("x^2+y^2").unwrap()).unwrap().to_string(), "2*x*x' + 2*y*y'");
    assert_eq!(derive_term(&parse_term("a/2").unwrap()).unwrap().to_string(), "a'/2");
}

#[test]
fn rotational_premise() {
    let d = derive_formula(&parse_formula("x^2+y^2 >= p^2").unwrap()).unwrap();
    let s = diff_subst(&d, &ode(&[("x", "y"), ("y", "-x")]));
    assert_eq!(s.to_string(), "2*x*y + 2*y*(-x) >= 0");
}

#[test]
fn disjunction_derives_conjunctively() {
    let d = derive_formula(&parse_formula("x>=0 | y>=0").unwrap()).unwrap();
    assert_eq!(d.to_string(), "x' >= 0 & y' >= 0");
}

#[test]
fn weak_negation() {
    assert_eq!(weak_negate(&parse_formula("x>=b").unwrap()).unwrap().to_string(), "x <= b");
    assert_eq!(weak_negate(&parse_formula("x<b").unwrap()).unwrap().to_string(), "x >= b");
    assert_eq!(weak_negate(&parse_formula("x=b").unwrap()), Err(DerivError::Equality));
}
