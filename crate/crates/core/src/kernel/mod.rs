//! The trusted proof kernel. Every proof step is a pure function from a
//! sequent to its premises; proofs are trees of such steps and can be
//! replayed independently.

mod axioms;
mod closing;
mod position;
mod proof_file;
mod rules;

use std::fmt;

use thiserror::Error;

use crate::arith::{ArithError, Budget};
use crate::syntax::{Formula, Term, Var, VarSet};

pub use closing::{facts, residual, term_sign};
pub use position::{children, polarity, replace_at, subformula, Polarity, Position, Side};
pub use proof_file::{check_dlp, from_dlp, to_dlp, ProofFileError};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Sequent {
    pub ante: Vec<Formula>,
    pub succ: Vec<Formula>,
}

impl Sequent {
    pub fn new(ante: Vec<Formula>, succ: Vec<Formula>) -> Sequent {
        Sequent { ante, succ }
    }

    /// `⊢ φ`
    pub fn goal(f: Formula) -> Sequent {
        Sequent { ante: Vec::new(), succ: vec![f] }
    }

    pub fn side(&self, side: Side) -> &Vec<Formula> {
        match side {
            Side::Ante => &self.ante,
            Side::Succ => &self.succ,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut Vec<Formula> {
        match side {
            Side::Ante => &mut self.ante,
            Side::Succ => &mut self.succ,
        }
    }

    pub fn get(&self, side: Side, index: usize) -> Option<&Formula> {
        self.side(side).get(index)
    }

    pub fn at(&self, pos: &Position) -> Option<&Formula> {
        subformula(self.get(pos.side, pos.index)?, &pos.path)
    }

    /// The sequent with the top-level formula at `side, index` replaced.
    pub fn with(&self, side: Side, index: usize, f: Formula) -> Sequent {
        let mut s = self.clone();
        s.side_mut(side)[index] = f;
        s
    }

    pub fn without(&self, side: Side, index: usize) -> Sequent {
        let mut s = self.clone();
        s.side_mut(side).remove(index);
        s
    }

    pub fn vars(&self) -> VarSet {
        let mut v = VarSet::new();
        for f in self.ante.iter().chain(&self.succ) {
            v.extend(f.all_vars());
        }
        v
    }

    /// `⋀Γ → ⋁Δ`
    pub fn to_formula(&self) -> Formula {
        let lhs = Formula::conj(self.ante.iter().cloned());
        let rhs = Formula::disj(self.succ.iter().cloned());
        if self.ante.is_empty() {
            rhs
        } else {
            Formula::imply(lhs, rhs)
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Formula]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        if self.ante.is_empty() {
            write!(f, "==> {}", join(&self.succ))
        } else {
            write!(f, "{} ==> {}", join(&self.ante), join(&self.succ))
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Inputs of a proof step. Which fields are used depends on the rule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Args {
    pub pos: Option<Position>,
    pub formulas: Vec<Formula>,
    pub terms: Vec<Term>,
    pub vars: Vec<Var>,
    /// Use an equivalence axiom right to left.
    pub reverse: bool,
}

impl Args {
    pub fn at(pos: Position) -> Args {
        Args { pos: Some(pos), ..Args::default() }
    }

    pub fn formula(mut self, f: Formula) -> Args {
        self.formulas.push(f);
        self
    }

    pub fn term(mut self, t: Term) -> Args {
        self.terms.push(t);
        self
    }

    pub fn var(mut self, v: Var) -> Args {
        self.vars.push(v);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub name: String,
    pub args: Args,
}

impl Rule {
    pub fn new(name: &str, args: Args) -> Rule {
        Rule { name: canonical_name(name).to_string(), args }
    }
}

pub const AXIOMS: &[&str] = &["[:=]", "[:=]=", "[?]", "[++]", "[;]", "[*]", "[']", "[&]", "<>", "K", "I", "C", "B", "V"];

pub const RULES: &[&str] = &[
    "andL", "andR", "orL", "orR", "impL", "impR", "notL", "notR", "equivL", "equivR", "allR", "allL", "existsL",
    "existsR", "cut", "hideL", "hideR", "close", "arith", "MP", "G", "ind", "loop", "con", "DI", "DC", "DW", "DV", "DA",
];

pub fn canonical_name(name: &str) -> &str {
    match name {
        "[∪]" | "[u]" => "[++]",
        "[′]" => "[']",
        "∀gen" | "allgen" => "allR",
        "⟨⟩" => "<>",
        "QE" | "qe" | "R" => "arith",
        other => other,
    }
}

pub fn is_axiom(name: &str) -> bool {
    AXIOMS.contains(&canonical_name(name))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("unknown goal {0}")]
    UnknownGoal(usize),
    #[error("unknown rule or axiom {0}")]
    UnknownRule(String),
    #[error("position error: {0}")]
    Position(String),
    #[error("{0} does not match")]
    NoMatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("side condition violated: {0}")]
    SideCondition(String),
    #[error("arithmetic does not close the goal; residual: {0}")]
    NotClosed(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// The premises of applying `rule` to `s`. An empty list closes the goal.
pub fn derive(s: &Sequent, rule: &Rule, budget: &Budget) -> Result<Vec<Sequent>, KernelError> {
    let name = canonical_name(&rule.name);
    if AXIOMS.contains(&name) {
        let pos = rule.args.pos.as_ref().ok_or_else(|| KernelError::Position("axiom needs a position".into()))?;
        return axioms::apply(s, name, pos, &rule.args).map(|s| vec![s]);
    }
    rules::apply(s, name, &rule.args, budget)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: usize,
    pub sequent: Sequent,
    /// `None` while the goal is open.
    pub rule: Option<Rule>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// An immutable proof: node 0 is the conjecture, open goals are the leaves
/// without a rule.
#[derive(Clone, Debug, PartialEq)]
pub struct ProofState {
    pub conjecture: Formula,
    pub nodes: Vec<Node>,
}

impl ProofState {
    pub fn init(conjecture: Formula) -> ProofState {
        let root = Node { id: 0, sequent: Sequent::goal(conjecture.clone()), rule: None, children: vec![], parent: None };
        ProofState { conjecture, nodes: vec![root] }
    }

    pub fn open_goals(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.rule.is_none()).map(|n| n.id).collect()
    }

    pub fn is_proved(&self) -> bool {
        self.nodes.iter().all(|n| n.rule.is_some())
    }

    pub fn goal(&self, id: usize) -> Result<&Sequent, KernelError> {
        match self.nodes.get(id) {
            Some(n) if n.rule.is_none() => Ok(&n.sequent),
            _ => Err(KernelError::UnknownGoal(id)),
        }
    }

    /// Applies a rule to an open goal. When the rule needs a position and
    /// none is given, the first matching top-level formula is used and
    /// recorded.
    pub fn apply(&self, goal: usize, rule: Rule, budget: &Budget) -> Result<ProofState, KernelError> {
        let s = self.goal(goal)?;
        let rule = resolve_position(s, rule, budget)?;
        let premises = derive(s, &rule, budget)?;
        let mut next = self.clone();
        let mut ids = Vec::new();
        for p in premises {
            let id = next.nodes.len();
            next.nodes.push(Node { id, sequent: p, rule: None, children: vec![], parent: Some(goal) });
            ids.push(id);
        }
        let node = &mut next.nodes[goal];
        node.rule = Some(rule);
        node.children = ids;
        Ok(next)
    }

    /// Subgoal ids created by the step at `goal`.
    pub fn children(&self, goal: usize) -> &[usize] {
        &self.nodes[goal].children
    }
}

/// Fills in the position of a rule that needs one: the first top-level
/// formula where it applies. When it applies nowhere, a side condition
/// failure is reported in preference to a shape mismatch.
pub fn resolve_position(s: &Sequent, rule: Rule, budget: &Budget) -> Result<Rule, KernelError> {
    let name = canonical_name(&rule.name);
    if rule.args.pos.is_some() || !rules::needs_position(name) {
        return Ok(rule);
    }
    let sides: &[Side] = if rules::antecedent_rule(name) { &[Side::Ante] } else { &[Side::Succ, Side::Ante] };
    let mut blocked = None;
    for side in sides {
        for i in 0..s.side(*side).len() {
            let mut r = rule.clone();
            r.args.pos = Some(Position { side: *side, index: i, path: vec![] });
            match derive(s, &r, budget) {
                Ok(_) => return Ok(r),
                Err(e @ (KernelError::SideCondition(_) | KernelError::Arith(_))) => {
                    blocked.get_or_insert(e);
                }
                Err(_) => {}
            }
        }
    }
    Err(blocked.unwrap_or(KernelError::NoMatch(rule.name)))
}

pub fn apply_axiom(
    ps: &ProofState,
    goal: usize,
    axiom: &str,
    pos: Position,
    inst: Args,
) -> Result<ProofState, KernelError> {
    if !is_axiom(axiom) {
        return Err(KernelError::UnknownRule(axiom.into()));
    }
    let args = Args { pos: Some(pos), ..inst };
    ps.apply(goal, Rule::new(axiom, args), &Budget::unlimited())
}

pub fn apply_rule(ps: &ProofState, goal: usize, rule: &str, args: Args) -> Result<ProofState, KernelError> {
    ps.apply(goal, Rule::new(rule, args), &Budget::unlimited())
}

pub fn close_arith(ps: &ProofState, goal: usize, budget: &Budget) -> Result<ProofState, KernelError> {
    ps.apply(goal, Rule::new("arith", Args::default()), budget)
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("node {node}: {reason}")]
pub struct ReplayError {
    pub node: usize,
    pub reason: String,
}

/// Re-derives every step of a proof and checks that no goal is open.
pub fn check_proof(ps: &ProofState) -> Result<(), ReplayError> {
    let err = |node: usize, reason: String| ReplayError { node, reason };
    if ps.nodes.is_empty() || ps.nodes[0].sequent != Sequent::goal(ps.conjecture.clone()) {
        return Err(err(0, "root is not the conjecture".into()));
    }
    for (i, n) in ps.nodes.iter().enumerate() {
        if n.id != i {
            return Err(err(i, "node id out of place".into()));
        }
        let linked = match n.parent {
            None => i == 0,
            Some(p) => p < i && ps.nodes[p].children.contains(&i),
        };
        if !linked {
            return Err(err(i, "inconsistent parent".into()));
        }
        let Some(rule) = &n.rule else {
            return Err(err(n.id, "open goal".into()));
        };
        let premises = derive(&n.sequent, rule, &Budget::unlimited()).map_err(|e| err(n.id, e.to_string()))?;
        let recorded: Option<Vec<&Sequent>> = n.children.iter().map(|c| ps.nodes.get(*c).map(|c| &c.sequent)).collect();
        let recorded = recorded.ok_or_else(|| err(n.id, "dangling child".into()))?;
        if premises.len() != recorded.len() || premises.iter().zip(&recorded).any(|(a, b)| a != *b) {
            return Err(err(n.id, format!("{} does not produce the recorded premises", rule.name)));
        }
        for c in &n.children {
            if ps.nodes[*c].parent != Some(n.id) {
                return Err(err(*c, "inconsistent parent".into()));
            }
        }
    }
    Ok(())
}
