//! The `.dlp` proof format: a JSON proof tree whose formulas are stored as
//! text. Checking re-derives every step from the parsed parent sequent and
//! compares the printed premises with the stored children.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::Budget;
use crate::parser::{parse_formula, parse_term, ParseError};
use crate::syntax::{Formula, Var};

use super::{derive, Args, Node, Position, ProofState, Rule, Sequent};

pub const FORMAT: &str = "dlp/1";

#[derive(Debug, Error)]
pub enum ProofFileError {
    #[error("malformed proof file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {0}")]
    Format(String),
    #[error("cannot parse {text:?}: {err}")]
    Parse { text: String, err: ParseError },
    #[error("node {node}: {reason}")]
    Invalid { node: usize, reason: String },
}

#[derive(Serialize, Deserialize)]
struct FileSequent {
    ante: Vec<String>,
    succ: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FileRule {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<Position>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    formulas: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vars: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    reverse: bool,
}

#[derive(Serialize, Deserialize)]
struct FileNode {
    id: usize,
    sequent: FileSequent,
    rule: Option<FileRule>,
    #[serde(default)]
    children: Vec<usize>,
    #[serde(default)]
    parent: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProofFile {
    format: String,
    conjecture: String,
    nodes: Vec<FileNode>,
}

fn texts(fs: &[Formula]) -> Vec<String> {
    fs.iter().map(|f| f.to_string()).collect()
}

fn file_sequent(s: &Sequent) -> FileSequent {
    FileSequent { ante: texts(&s.ante), succ: texts(&s.succ) }
}

/// Serializes a proof state.
pub fn to_dlp(ps: &ProofState) -> String {
    let nodes = ps
        .nodes
        .iter()
        .map(|n| FileNode {
            id: n.id,
            sequent: file_sequent(&n.sequent),
            rule: n.rule.as_ref().map(|r| FileRule {
                name: r.name.clone(),
                pos: r.args.pos.clone(),
                formulas: texts(&r.args.formulas),
                terms: r.args.terms.iter().map(|t| t.to_string()).collect(),
                vars: r.args.vars.iter().map(|v| v.to_string()).collect(),
                reverse: r.args.reverse,
            }),
            children: n.children.clone(),
            parent: n.parent,
        })
        .collect();
    let file = ProofFile { format: FORMAT.into(), conjecture: ps.conjecture.to_string(), nodes };
    serde_json::to_string_pretty(&file).expect("proof serializes")
}

fn formula(text: &str) -> Result<Formula, ProofFileError> {
    parse_formula(text).map_err(|err| ProofFileError::Parse { text: text.into(), err })
}

fn sequent(s: &FileSequent) -> Result<Sequent, ProofFileError> {
    let parse = |v: &[String]| v.iter().map(|t| formula(t)).collect::<Result<Vec<_>, _>>();
    Ok(Sequent::new(parse(&s.ante)?, parse(&s.succ)?))
}

fn rule(r: &FileRule) -> Result<Rule, ProofFileError> {
    let terms = r
        .terms
        .iter()
        .map(|t| parse_term(t).map_err(|err| ProofFileError::Parse { text: t.clone(), err }))
        .collect::<Result<Vec<_>, _>>()?;
    let args = Args {
        pos: r.pos.clone(),
        formulas: r.formulas.iter().map(|f| formula(f)).collect::<Result<_, _>>()?,
        terms,
        vars: r.vars.iter().map(Var::new).collect(),
        reverse: r.reverse,
    };
    Ok(Rule::new(&r.name, args))
}

/// Reads a proof state without checking it.
pub fn from_dlp(text: &str) -> Result<ProofState, ProofFileError> {
    let file: ProofFile = serde_json::from_str(text)?;
    if file.format != FORMAT {
        return Err(ProofFileError::Format(file.format));
    }
    let conjecture = formula(&file.conjecture)?;
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for (i, n) in file.nodes.iter().enumerate() {
        if n.id != i {
            return Err(ProofFileError::Invalid { node: n.id, reason: format!("expected id {i}") });
        }
        nodes.push(Node {
            id: n.id,
            sequent: sequent(&n.sequent)?,
            rule: n.rule.as_ref().map(rule).transpose()?,
            children: n.children.clone(),
            parent: n.parent,
        });
    }
    Ok(ProofState { conjecture, nodes })
}

/// Checks a `.dlp` file: the tree must be well formed, every step must
/// re-derive its stored premises and no goal may be open. Returns the
/// conjecture on success.
pub fn check_dlp(text: &str) -> Result<Formula, ProofFileError> {
    let file: ProofFile = serde_json::from_str(text)?;
    let ps = from_dlp(text)?;
    let invalid = |node: usize, reason: String| ProofFileError::Invalid { node, reason };
    if ps.nodes.is_empty() || ps.nodes[0].sequent != Sequent::goal(ps.conjecture.clone()) || ps.nodes[0].parent.is_some()
    {
        return Err(invalid(0, "root is not the conjecture".into()));
    }
    for n in &ps.nodes[1..] {
        let ok = n.parent.is_some_and(|p| p < n.id && ps.nodes[p].children.contains(&n.id));
        if !ok {
            return Err(invalid(n.id, "not attached to the tree".into()));
        }
    }
    for n in &ps.nodes {
        let Some(r) = &n.rule else {
            return Err(invalid(n.id, "open goal".into()));
        };
        let premises = derive(&n.sequent, r, &Budget::unlimited()).map_err(|e| invalid(n.id, e.to_string()))?;
        if premises.len() != n.children.len() {
            return Err(invalid(n.id, format!("{} yields {} premises, file has {}", r.name, premises.len(), n.children.len())));
        }
        for (p, c) in premises.iter().zip(&n.children) {
            let stored = file.nodes.get(*c).ok_or_else(|| invalid(n.id, format!("missing child {c}")))?;
            let derived = file_sequent(p);
            if ps.nodes[*c].parent != Some(n.id)
                || derived.ante != stored.sequent.ante
                || derived.succ != stored.sequent.succ
            {
                return Err(invalid(*c, format!("does not match the premise of {}: {p}", r.name)));
            }
        }
    }
    Ok(ps.conjecture)
}
