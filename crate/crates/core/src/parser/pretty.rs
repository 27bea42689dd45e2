use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::syntax::{Formula, Program, Term};

fn decimal(r: &BigRational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = r.abs() * BigRational::from_integer(BigInt::from(10).pow(digits));
    let n = scaled.to_integer().to_string();
    let s = if digits == 0 {
        n
    } else {
        let d = digits as usize;
        let padded = format!("{:0>width$}", n, width = d + 1);
        let (int, frac) = padded.split_at(padded.len() - d);
        format!("{int}.{frac}")
    };
    Some(if r.is_negative() { format!("-{s}") } else { s })
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Mul(..) | Term::Div(..) => 2,
        Term::Neg(_) => 3,
        Term::Pow(..) => 4,
        Term::Num(r) => {
            if decimal(r).is_none() {
                2
            } else if r.is_negative() {
                3
            } else {
                5
            }
        }
        Term::Var(_) => 5,
    }
}

fn write_term(t: &Term, min: u8, out: &mut String) {
    let paren = term_level(t) < min;
    if paren {
        out.push('(');
    }
    match t {
        Term::Num(r) => match decimal(r) {
            Some(s) => out.push_str(&s),
            None => out.push_str(&format!("{}/{}", r.numer(), r.denom())),
        },
        Term::Var(v) => out.push_str(&v.to_string()),
        Term::Neg(a) => {
            out.push('-');
            write_term(a, 3, out);
        }
        Term::Add(a, b) | Term::Sub(a, b) => {
            write_term(a, 1, out);
            out.push_str(if matches!(t, Term::Add(..)) { " + " } else { " - " });
            write_term(b, 2, out);
        }
        Term::Mul(a, b) | Term::Div(a, b) => {
            write_term(a, 2, out);
            out.push(if matches!(t, Term::Mul(..)) { '*' } else { '/' });
            write_term(b, 4, out);
        }
        Term::Pow(a, n) => {
            write_term(a, 5, out);
            out.push_str(&format!("^{n}"));
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn pretty_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, 0, &mut s);
    s
}

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Imply(..) | Formula::Equiv(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) | Formula::Forall(..) | Formula::Exists(..) | Formula::Box(..) | Formula::Diamond(..) => 4,
        Formula::True | Formula::False | Formula::Cmp(..) => 5,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut String) {
    let paren = formula_level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Cmp(a, r, b) => {
            write_term(a, 0, out);
            out.push_str(&format!(" {} ", r.symbol()));
            write_term(b, 0, out);
        }
        Formula::Not(a) => {
            out.push('!');
            write_formula(a, 4, out);
        }
        Formula::And(a, b) => {
            write_formula(a, 3, out);
            out.push_str(" & ");
            write_formula(b, 4, out);
        }
        Formula::Or(a, b) => {
            write_formula(a, 2, out);
            out.push_str(" | ");
            write_formula(b, 3, out);
        }
        Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            write_formula(a, 2, out);
            out.push_str(if matches!(f, Formula::Imply(..)) { " -> " } else { " <-> " });
            write_formula(b, 1, out);
        }
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            out.push_str(if matches!(f, Formula::Forall(..)) { "\\forall " } else { "\\exists " });
            out.push_str(x.name());
            out.push(' ');
            write_formula(a, 4, out);
        }
        Formula::Box(p, a) => {
            out.push('[');
            write_program(p, out);
            out.push(']');
            write_formula(a, 4, out);
        }
        Formula::Diamond(p, a) => {
            out.push('<');
            write_program(p, out);
            out.push('>');
            write_formula(a, 4, out);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn pretty_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, 0, &mut s);
    s
}

fn braced(p: &Program, out: &mut String) {
    out.push('{');
    write_program(p, out);
    out.push('}');
}

fn write_program(p: &Program, out: &mut String) {
    match p {
        Program::Assign(x, t) => {
            out.push_str(&format!("{x} := "));
            write_term(t, 0, out);
        }
        Program::Test(f) => {
            out.push('?');
            write_formula(f, 0, out);
        }
        Program::Ode(o) => {
            out.push('{');
            for (i, (x, t)) in o.eqs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("{x}'="));
                write_term(t, 0, out);
            }
            if o.has_domain() {
                out.push_str(" & ");
                write_formula(&o.domain, 0, out);
            }
            out.push('}');
        }
        Program::Choice(a, b) => {
            if matches!(**a, Program::Choice(..)) {
                braced(a, out);
            } else {
                write_program(a, out);
            }
            out.push_str(" ++ ");
            write_program(b, out);
        }
        Program::Seq(a, b) => {
            if matches!(**a, Program::Seq(..) | Program::Choice(..)) {
                braced(a, out);
            } else {
                write_program(a, out);
            }
            out.push_str("; ");
            if matches!(**b, Program::Choice(..)) {
                braced(b, out);
            } else {
                write_program(b, out);
            }
        }
        Program::Loop(a) => {
            braced(a, out);
            out.push('*');
        }
    }
}

pub fn pretty_program(p: &Program) -> String {
    let mut s = String::new();
    write_program(p, &mut s);
    s
}
