use serde::{Deserialize, Serialize};

use crate::syntax::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ante,
    Succ,
}

/// A subformula occurrence: a top-level formula of a sequent and a path of
/// child indices below it. Binary connectives number their operands 0 and
/// 1; negations, quantifiers and modalities have the single child 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub side: Side,
    pub index: usize,
    #[serde(default)]
    pub path: Vec<usize>,
}

impl Position {
    pub fn succ(index: usize) -> Position {
        Position { side: Side::Succ, index, path: Vec::new() }
    }

    pub fn ante(index: usize) -> Position {
        Position { side: Side::Ante, index, path: Vec::new() }
    }

    pub fn child(&self, k: usize) -> Position {
        let mut p = self.clone();
        p.path.push(k);
        p
    }

    pub fn is_top(&self) -> bool {
        self.path.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
    Mixed,
}

impl Polarity {
    fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Mixed => Polarity::Mixed,
        }
    }
}

pub fn children(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::True | Formula::False | Formula::Cmp(..) => vec![],
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => vec![a],
        Formula::Box(_, a) | Formula::Diamond(_, a) => vec![a],
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => vec![a, b],
    }
}

pub fn subformula<'a>(f: &'a Formula, path: &[usize]) -> Option<&'a Formula> {
    match path.split_first() {
        None => Some(f),
        Some((k, rest)) => subformula(children(f).get(*k)?, rest),
    }
}

pub fn replace_at(f: &Formula, path: &[usize], new: Formula) -> Option<Formula> {
    let Some((k, rest)) = path.split_first() else {
        return Some(new);
    };
    let sub = |g: &Formula| replace_at(g, rest, new.clone()).map(Box::new);
    Some(match (f, k) {
        (Formula::Not(a), 0) => Formula::Not(sub(a)?),
        (Formula::Forall(x, a), 0) => Formula::Forall(x.clone(), sub(a)?),
        (Formula::Exists(x, a), 0) => Formula::Exists(x.clone(), sub(a)?),
        (Formula::Box(p, a), 0) => Formula::Box(p.clone(), sub(a)?),
        (Formula::Diamond(p, a), 0) => Formula::Diamond(p.clone(), sub(a)?),
        (Formula::And(a, b), 0) => Formula::And(sub(a)?, b.clone()),
        (Formula::And(a, b), 1) => Formula::And(a.clone(), sub(b)?),
        (Formula::Or(a, b), 0) => Formula::Or(sub(a)?, b.clone()),
        (Formula::Or(a, b), 1) => Formula::Or(a.clone(), sub(b)?),
        (Formula::Imply(a, b), 0) => Formula::Imply(sub(a)?, b.clone()),
        (Formula::Imply(a, b), 1) => Formula::Imply(a.clone(), sub(b)?),
        (Formula::Equiv(a, b), 0) => Formula::Equiv(sub(a)?, b.clone()),
        (Formula::Equiv(a, b), 1) => Formula::Equiv(a.clone(), sub(b)?),
        _ => return None,
    })
}

/// Polarity of the occurrence at `path` in a formula whose own polarity is
/// `start`.
pub fn polarity(f: &Formula, path: &[usize], start: Polarity) -> Option<Polarity> {
    let Some((k, rest)) = path.split_first() else {
        return Some(start);
    };
    let child = *children(f).get(*k)?;
    let next = match (f, k) {
        (Formula::Not(_), _) | (Formula::Imply(..), 0) => start.flip(),
        (Formula::Equiv(..), _) => Polarity::Mixed,
        _ => start,
    };
    polarity(child, rest, next)
}
