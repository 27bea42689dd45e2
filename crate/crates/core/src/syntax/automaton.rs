//! Hybrid automata and their compilation into hybrid programs.

use thiserror::Error;

use super::subst::vectorial_assignment;
use super::{fresh_var, Formula, Program, Rel, Term, Var, VarSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub name: String,
    pub flow: Vec<(Var, Term)>,
    pub domain: Formula,
    /// `None` when the mode is not marked initial.
    pub init: Option<Formula>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub guard: Formula,
    pub reset: Vec<(Var, Term)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridAutomaton {
    pub variables: Vec<Var>,
    pub modes: Vec<Mode>,
    pub edges: Vec<Edge>,
    pub initial: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("duplicate mode {0}")]
    DuplicateMode(String),
    #[error("unknown mode {0}")]
    UnknownMode(String),
    #[error("several modes are marked initial ({0}); designate one")]
    MultipleInit(String),
    #[error("no initial mode")]
    NoInit,
    #[error("automaton has no modes")]
    Empty,
}

impl HybridAutomaton {
    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.name == name)
    }

    pub fn check(&self) -> Result<(), AutomatonError> {
        if self.modes.is_empty() {
            return Err(AutomatonError::Empty);
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].iter().any(|n| n.name == m.name) {
                return Err(AutomatonError::DuplicateMode(m.name.clone()));
            }
        }
        for e in &self.edges {
            for end in [&e.source, &e.target] {
                if self.mode_index(end).is_none() {
                    return Err(AutomatonError::UnknownMode(end.clone()));
                }
            }
        }
        if let Some(i) = &self.initial {
            if self.mode_index(i).is_none() {
                return Err(AutomatonError::UnknownMode(i.clone()));
            }
        }
        Ok(())
    }

    fn initial_mode(&self) -> Result<usize, AutomatonError> {
        if let Some(name) = &self.initial {
            return self.mode_index(name).ok_or_else(|| AutomatonError::UnknownMode(name.clone()));
        }
        let marked: Vec<usize> = (0..self.modes.len())
            .filter(|&i| !matches!(self.modes[i].init, None | Some(Formula::False)))
            .collect();
        match marked.len() {
            1 => Ok(marked[0]),
            0 if self.modes.len() == 1 => Ok(0),
            0 => Err(AutomatonError::NoInit),
            _ => Err(AutomatonError::MultipleInit(
                marked.iter().map(|&i| self.modes[i].name.as_str()).collect::<Vec<_>>().join(", "),
            )),
        }
    }

    fn taken(&self) -> VarSet {
        let mut taken: VarSet = self.variables.iter().cloned().collect();
        for m in &self.modes {
            for (x, t) in &m.flow {
                taken.insert(x.clone());
                taken.extend(t.vars());
            }
            taken.extend(m.domain.all_vars());
            if let Some(i) = &m.init {
                taken.extend(i.all_vars());
            }
        }
        for e in &self.edges {
            taken.extend(e.guard.all_vars());
            for (x, t) in &e.reset {
                taken.insert(x.clone());
                taken.extend(t.vars());
            }
        }
        taken
    }
}

fn and_guard(a: Formula, b: &Formula) -> Formula {
    if *b == Formula::True {
        a
    } else {
        Formula::and(a, b.clone())
    }
}

/// Compiles an automaton into the program
/// `q:=init; {branch_1 ++ ... ++ branch_k}*` with one continuous branch per
/// mode and one discrete branch per edge. Mode `i` is coded as the constant
/// `i` of a fresh mode variable.
pub fn compile_automaton(a: &HybridAutomaton) -> Result<Program, AutomatonError> {
    a.check()?;
    let init = a.initial_mode()?;
    let taken = a.taken();
    let q = if taken.contains(&Var::new("q")) {
        fresh_var("q", &taken)
    } else {
        Var::new("q")
    };
    let code = |i: usize| Term::int(i as i64);
    let is_mode = |i: usize| Formula::cmp(Term::Var(q.clone()), Rel::Eq, code(i));

    let mut branches = Vec::new();
    for (i, m) in a.modes.iter().enumerate() {
        branches.push(Program::seq(
            Program::test(is_mode(i)),
            Program::ode(m.flow.clone(), m.domain.clone()),
        ));
    }
    for e in &a.edges {
        let s = a.mode_index(&e.source).expect("checked");
        let t = a.mode_index(&e.target).expect("checked");
        let mut steps = vec![Program::test(and_guard(is_mode(s), &e.guard))];
        if !e.reset.is_empty() {
            steps.push(vectorial_assignment(&e.reset, &taken));
        }
        steps.push(Program::assign(q.clone(), code(t)));
        if a.modes[t].domain != Formula::True {
            steps.push(Program::test(a.modes[t].domain.clone()));
        }
        branches.push(Program::seq_all(steps));
    }

    let mut prefix = vec![Program::assign(q.clone(), code(init))];
    if let Some(f) = &a.modes[init].init {
        if *f != Formula::True {
            prefix.push(Program::test(f.clone()));
        }
    }
    prefix.push(Program::looped(Program::choice_all(branches)));
    Ok(Program::seq_all(prefix))
}

/// Number of alternatives in a right-nested choice.
pub fn choice_branches(p: &Program) -> usize {
    match p {
        Program::Choice(_, b) => 1 + choice_branches(b),
        _ => 1,
    }
}
