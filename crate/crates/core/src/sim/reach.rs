use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use thiserror::Error;

use crate::arith::{self, ArithError};
use crate::syntax::{Formula, Program, Var};

pub type ExactState = BTreeMap<Var, BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("more than {0} reachable states")]
    Explosion(usize),
    #[error("program contains a differential equation")]
    NotDiscrete,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

struct Reach {
    bound: usize,
    cap: usize,
}

impl Reach {
    fn step(&self, p: &Program, from: &BTreeSet<ExactState>) -> Result<BTreeSet<ExactState>, ReachError> {
        let out = match p {
            Program::Assign(x, t) => {
                let mut out = BTreeSet::new();
                for s in from {
                    let mut n = s.clone();
                    n.insert(x.clone(), arith::eval_term(t, s)?);
                    out.insert(n);
                }
                out
            }
            Program::Test(f) => {
                let mut out = BTreeSet::new();
                for s in from {
                    if self.eval(f, s)? {
                        out.insert(s.clone());
                    }
                }
                out
            }
            Program::Ode(_) => return Err(ReachError::NotDiscrete),
            Program::Choice(a, b) => {
                let mut out = self.step(a, from)?;
                out.extend(self.step(b, from)?);
                out
            }
            Program::Seq(a, b) => {
                let mid = self.step(a, from)?;
                self.step(b, &mid)?
            }
            Program::Loop(a) => {
                let mut out = from.clone();
                let mut frontier = from.clone();
                for _ in 0..self.bound {
                    let next: BTreeSet<ExactState> = self.step(a, &frontier)?.difference(&out).cloned().collect();
                    if next.is_empty() {
                        break;
                    }
                    out.extend(next.iter().cloned());
                    frontier = next;
                    if out.len() > self.cap {
                        return Err(ReachError::Explosion(self.cap));
                    }
                }
                out
            }
        };
        if out.len() > self.cap {
            return Err(ReachError::Explosion(self.cap));
        }
        Ok(out)
    }

    fn eval(&self, f: &Formula, s: &ExactState) -> Result<bool, ReachError> {
        Ok(match f {
            Formula::Box(p, a) => {
                let finals = self.step(p, &BTreeSet::from([s.clone()]))?;
                let mut all = true;
                for t in &finals {
                    all &= self.eval(a, t)?;
                }
                all
            }
            Formula::Diamond(p, a) => {
                let finals = self.step(p, &BTreeSet::from([s.clone()]))?;
                let mut any = false;
                for t in &finals {
                    any |= self.eval(a, t)?;
                }
                any
            }
            Formula::Not(a) => !self.eval(a, s)?,
            Formula::And(a, b) => self.eval(a, s)? & self.eval(b, s)?,
            Formula::Or(a, b) => self.eval(a, s)? | self.eval(b, s)?,
            Formula::Imply(a, b) => !self.eval(a, s)? | self.eval(b, s)?,
            Formula::Equiv(a, b) => self.eval(a, s)? == self.eval(b, s)?,
            _ => arith::eval_exact(f, s)?,
        })
    }
}

/// All states reachable from `s`, unrolling each loop at most
/// `loop_bound` times. Fails once more than `cap` states are reachable.
pub fn discrete_reach(
    p: &Program,
    s: &ExactState,
    loop_bound: usize,
    cap: usize,
) -> Result<BTreeSet<ExactState>, ReachError> {
    Reach { bound: loop_bound, cap }.step(p, &BTreeSet::from([s.clone()]))
}

/// Exact truth value of a formula whose programs are discrete, under the
/// same bounded loop semantics. Quantifiers may only occur in first-order
/// subformulas.
pub fn eval_discrete(f: &Formula, s: &ExactState, loop_bound: usize, cap: usize) -> Result<bool, ReachError> {
    Reach { bound: loop_bound, cap }.eval(f, s)
}
