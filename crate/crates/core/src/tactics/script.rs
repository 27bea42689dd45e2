//! Tactic scripts (`.dlt`): one command per line, optionally addressed to
//! a goal with `@N`. Arguments are split like a shell command line, so
//! formulas containing spaces are quoted.
//!
//! ```text
//! # comment
//! loop 'v^2 <= 2*b*(m-x) & A >= 0 & b > 0'
//! auto
//! @4 di
//! saturate 'y^5 >= 0'
//! apply DC --at succ.0 --formula 'y^5 >= 0'
//! ```

use thiserror::Error;

use crate::arith::Budget;
use crate::kernel::{Args, Position, ProofState, Rule, Side};
use crate::parser::{parse_formula, parse_term};
use crate::syntax::{Formula, Var};

use super::{auto, auto_goal, di_prove, diff_saturate, loop_invariant, AutoConfig, TacticError};

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Auto,
    Loop(Formula),
    Di(Option<Formula>),
    Saturate(Vec<Formula>),
    Apply(Rule),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub line: usize,
    pub goal: Option<usize>,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {err}")]
    Tactic { line: usize, err: TacticError },
}

fn parse_position(text: &str) -> Option<Position> {
    let mut parts = text.split('.');
    let side = match parts.next()? {
        "succ" => Side::Succ,
        "ante" => Side::Ante,
        _ => return None,
    };
    let index = parts.next()?.parse().ok()?;
    let path = parts.map(|p| p.parse().ok()).collect::<Option<Vec<usize>>>()?;
    Some(Position { side, index, path })
}

fn parse_line(line: usize, text: &str) -> Result<Option<Step>, ScriptError> {
    let err = |msg: String| ScriptError::Syntax { line, msg };
    let text = text.trim();
    if text.is_empty() || text.starts_with('#') {
        return Ok(None);
    }
    let words = shlex::split(text).ok_or_else(|| err("unbalanced quotes".into()))?;
    let mut words = words.into_iter().peekable();
    let mut goal = None;
    if let Some(w) = words.peek() {
        if let Some(n) = w.strip_prefix('@') {
            goal = Some(n.parse().map_err(|_| err(format!("bad goal {w}")))?);
            words.next();
        }
    }
    let formula = |t: &str| parse_formula(t).map_err(|e| err(format!("{t:?}: {e}")));
    let cmd = words.next().ok_or_else(|| err("missing command".into()))?;
    let rest: Vec<String> = words.collect();
    let command = match cmd.as_str() {
        "auto" if rest.is_empty() => Command::Auto,
        "loop" if rest.len() == 1 => Command::Loop(formula(&rest[0])?),
        "di" if rest.len() <= 1 => Command::Di(rest.first().map(|t| formula(t)).transpose()?),
        "saturate" => Command::Saturate(rest.iter().map(|t| formula(t)).collect::<Result<_, _>>()?),
        "apply" => {
            let (name, opts) = rest.split_first().ok_or_else(|| err("apply needs a rule name".into()))?;
            let mut args = Args::default();
            let mut it = opts.iter();
            while let Some(o) = it.next() {
                let mut value = || it.next().ok_or_else(|| err(format!("{o} needs a value")));
                match o.as_str() {
                    "--at" => {
                        let v = value()?;
                        args.pos = Some(parse_position(v).ok_or_else(|| err(format!("bad position {v}")))?);
                    }
                    "--formula" => args.formulas.push(formula(value()?)?),
                    "--term" => {
                        let v = value()?;
                        args.terms.push(parse_term(v).map_err(|e| err(format!("{v:?}: {e}")))?);
                    }
                    "--var" => args.vars.push(Var::new(value()?)),
                    "--reverse" => args.reverse = true,
                    other => return Err(err(format!("unknown option {other}"))),
                }
            }
            Command::Apply(Rule::new(name, args))
        }
        other => return Err(err(format!("unknown or malformed command {other}"))),
    };
    Ok(Some(Step { line, goal, command }))
}

pub fn parse_script(text: &str) -> Result<Vec<Step>, ScriptError> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        out.extend(parse_line(i + 1, l)?);
    }
    Ok(out)
}

/// Runs the steps in order. Commands without a goal address act on the
/// first open goal, except `auto`, which acts on all of them.
pub fn run_script(ps: &ProofState, steps: &[Step], cfg: &AutoConfig) -> Result<ProofState, ScriptError> {
    let mut ps = ps.clone();
    for step in steps {
        let fail = |err: TacticError| ScriptError::Tactic { line: step.line, err };
        let goal = match step.goal {
            Some(g) => g,
            None if step.command == Command::Auto => {
                ps = auto(&ps, cfg);
                continue;
            }
            None => match ps.open_goals().first() {
                Some(g) => *g,
                None => return Err(fail(TacticError::Shape("no open goal".into()))),
            },
        };
        ps = match &step.command {
            Command::Auto => {
                ps.goal(goal).map_err(|e| fail(e.into()))?;
                auto_goal(&ps, goal, cfg)
            }
            Command::Loop(j) => loop_invariant(&ps, goal, j).map_err(fail)?,
            Command::Di(f) => di_prove(&ps, goal, f.as_ref(), cfg).map_err(fail)?,
            Command::Saturate(cuts) => diff_saturate(&ps, goal, cuts, cfg).map_err(fail)?,
            Command::Apply(r) => ps.apply(goal, r.clone(), &Budget::unlimited()).map_err(|e| fail(e.into()))?,
        };
    }
    Ok(ps)
}
