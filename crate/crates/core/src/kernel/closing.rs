//! Closing goals by real arithmetic.

use crate::arith::qf::{add_mask, flip, from_formula, mask_of_rel, mul_mask, pow_mask_pub, sign_mask, ALL};
use crate::arith::{decide_with, forall_closure, normalize_poly, qe_normal, simplify_in, Budget, Facts, Mask};
use crate::syntax::{free_vars, Formula, Term, Var};

use super::{KernelError, Sequent};

/// Sign facts of the quantifier-free first-order assumptions.
pub fn facts(ante: &[Formula]) -> Facts {
    let mut out = Facts::new();
    for f in ante {
        if f.is_quantifier_free_arith() {
            if let Ok(q) = from_formula(f) {
                out.add_qf(&q);
            }
        }
    }
    out
}

/// Possible signs of `t` under `facts`, combining the signs of its syntactic
/// parts with those known for its normal form.
pub fn term_sign(t: &Term, facts: &Facts) -> Mask {
    let known = normalize_poly(t).map(|p| facts.mask_of(&p)).unwrap_or(ALL);
    let structural = match t {
        Term::Num(c) => sign_mask(c),
        Term::Var(_) => ALL,
        Term::Neg(a) => flip(term_sign(a, facts)),
        Term::Add(a, b) => add_mask(term_sign(a, facts), term_sign(b, facts)),
        Term::Sub(a, b) => add_mask(term_sign(a, facts), flip(term_sign(b, facts))),
        Term::Mul(a, b) => mul_mask(term_sign(a, facts), term_sign(b, facts)),
        Term::Div(a, b) => match b.const_value() {
            Some(c) => mul_mask(term_sign(a, facts), sign_mask(&c)),
            None => ALL,
        },
        Term::Pow(a, n) => pow_mask_pub(term_sign(a, facts), *n),
    };
    let m = known & structural;
    if m == 0 {
        ALL
    } else {
        m
    }
}

fn first_order(fs: &[Formula]) -> Vec<Formula> {
    fs.iter().filter(|f| f.is_first_order()).cloned().collect()
}

fn sign_closes(s: &Sequent) -> bool {
    let fs = facts(&s.ante);
    if fs.is_contradictory() {
        return true;
    }
    s.succ.iter().any(|f| match f {
        Formula::True => true,
        Formula::Cmp(a, r, b) => {
            let m = term_sign(&Term::sub(a.clone(), b.clone()), &fs);
            m & !mask_of_rel(*r) == 0
        }
        _ => false,
    })
}

/// Closes `Γ ⊢ Δ` when its first-order part is valid over the reals.
pub(super) fn close(s: &Sequent, budget: &Budget) -> Result<(), KernelError> {
    if sign_closes(s) {
        return Ok(());
    }
    let ante = first_order(&s.ante);
    let succ = first_order(&s.succ);
    let claim = forall_closure(&Formula::imply(Formula::conj(ante), Formula::disj(succ)));
    if decide_with(&claim, budget)? {
        Ok(())
    } else {
        Err(KernelError::NotClosed(residual(s, budget)?.to_string()))
    }
}

/// The first-order succedent after quantifier elimination, simplified
/// under the assumptions. Generated names (`x$n`) are quantified away
/// together with the assumptions that mention them, so the result only
/// speaks about the variables of the conjecture.
pub fn residual(s: &Sequent, budget: &Budget) -> Result<Formula, KernelError> {
    let fresh: Vec<Var> = s.vars().into_iter().filter(|v| v.name().contains('$')).collect();
    let (local, global): (Vec<Formula>, Vec<Formula>) =
        first_order(&s.ante).into_iter().partition(|f| free_vars(f).iter().any(|v| fresh.contains(v)));
    let mut claim = Formula::disj(first_order(&s.succ));
    if !local.is_empty() {
        claim = Formula::imply(Formula::conj(local), claim);
    }
    for v in fresh.into_iter().rev() {
        claim = Formula::forall(v, claim);
    }
    let q = qe_normal(&claim, budget)?;
    Ok(simplify_in(&q, &facts(&global)).to_formula())
}

