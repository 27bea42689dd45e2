use crate::syntax::{compile_automaton, free_vars, Edge, Formula, HybridAutomaton, Mode, Program, Var};

use super::lexer::Tok;
use super::{Defs, ParseError, Parser};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    State,
    Constant,
}

/// A parsed `.dl` file.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    /// Empty when the file has no `Vars:` section.
    pub declarations: Vec<(Var, Role)>,
    pub definitions: Defs,
    pub assumptions: Vec<Formula>,
    pub goal: Option<Formula>,
    pub automaton: Option<HybridAutomaton>,
}

impl Problem {
    /// `A1 & ... & An -> P`, or `P` alone without assumptions.
    pub fn conjecture(&self) -> Formula {
        let goal = self.goal.clone().unwrap_or(Formula::True);
        if self.assumptions.is_empty() {
            goal
        } else {
            Formula::imply(Formula::conj(self.assumptions.iter().cloned()), goal)
        }
    }

    pub fn constants(&self) -> Vec<Var> {
        self.declarations.iter().filter(|(_, r)| *r == Role::Constant).map(|(v, _)| v.clone()).collect()
    }

    /// The hybrid program of the goal when it has the shape `[α]φ` (possibly
    /// under assumptions), else the compiled automaton.
    pub fn program(&self) -> Option<Program> {
        match &self.goal {
            Some(Formula::Box(p, _)) | Some(Formula::Diamond(p, _)) => Some((**p).clone()),
            _ => self.definitions.programs.get("automaton").cloned(),
        }
    }

    /// The postcondition when the goal is `[α]φ`.
    pub fn postcondition(&self) -> Option<Formula> {
        match &self.goal {
            Some(Formula::Box(_, f)) => Some((**f).clone()),
            _ => None,
        }
    }
}

const SECTIONS: &[&str] = &["Vars", "Defs", "Assume", "Prove", "Automaton"];

/// Splits the source into sections. Each section's text keeps the original
/// line and column layout so lexer positions refer to the file.
fn split_sections(src: &str) -> Result<Vec<(&'static str, String)>, ParseError> {
    let mut out: Vec<(&'static str, Vec<String>)> = Vec::new();
    let lines: Vec<&str> = src.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim_start();
        let header = SECTIONS
            .iter()
            .find(|s| trimmed.strip_prefix(**s).is_some_and(|r| r.starts_with(':')));
        if let Some(name) = header {
            let mut body: Vec<String> = vec![String::new(); lines.len()];
            let indent = line.len() - trimmed.len();
            body[i] = format!("{}{}", " ".repeat(indent + name.len() + 1), &trimmed[name.len() + 1..]);
            out.push((name, body));
        } else if let Some((_, body)) = out.last_mut() {
            body[i] = line.to_string();
        } else {
            let content = line.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                return Err(ParseError::syntax(i + 1, 1, "text before the first section"));
            }
        }
    }
    Ok(out.into_iter().map(|(n, b)| (n, b.join("\n"))).collect())
}

fn parse_vars(src: &str, decls: &mut Vec<(Var, Role)>) -> Result<(), ParseError> {
    let defs = Defs::default();
    let mut p = Parser::new(src, &defs)?;
    while !p.at_eof() {
        let role = if p.try_keyword("const") {
            Role::Constant
        } else {
            p.try_keyword("state");
            Role::State
        };
        let v = Var::new(p.ident()?);
        if !decls.iter().any(|(w, _)| *w == v) {
            decls.push((v, role));
        }
        if !p.try_tok(Tok::Comma) && !p.try_tok(Tok::Semi) {
            p.expect_eof()?;
        }
    }
    Ok(())
}

fn parse_defs(src: &str, defs: &mut Defs) -> Result<(), ParseError> {
    let toks = super::lexer::lex(src)?;
    let mut pos = 0;
    loop {
        let snapshot = defs.clone();
        let mut p = Parser::from_tokens(toks.clone(), pos, &snapshot);
        if p.at_eof() {
            return Ok(());
        }
        let is_program = if p.try_keyword("HP") {
            true
        } else {
            p.keyword("F")?;
            false
        };
        let name = p.ident()?;
        if !(p.try_tok(Tok::Colon) && p.try_tok(Tok::Assign)) {
            return p.error("expected '::='");
        }
        if is_program {
            let prog = p.program()?;
            defs.programs.insert(name, prog);
        } else {
            let f = p.formula()?;
            defs.formulas.insert(name, f);
        }
        p.try_tok(Tok::Semi);
        pos = p.position();
    }
}

fn assignments(p: &mut Parser) -> Result<Vec<(Var, crate::syntax::Term)>, ParseError> {
    let mut out = Vec::new();
    loop {
        let x = Var::new(p.ident()?);
        if !p.try_tok(Tok::Assign) {
            return p.error("expected ':='");
        }
        out.push((x, p.term()?));
        if !p.try_tok(Tok::Comma) {
            return Ok(out);
        }
    }
}

/// Parses the body of an `Automaton:` section.
///
/// ```text
/// mode NAME [init [(FORMULA)]] : x'=θ, ... [& DOMAIN]
/// edge SRC -> TGT [when GUARD] [do x := θ, ...]
/// initial NAME
/// ```
pub fn parse_automaton(src: &str, defs: &Defs, variables: Vec<Var>) -> Result<HybridAutomaton, ParseError> {
    let mut p = Parser::new(src, defs)?;
    let mut a = HybridAutomaton { variables, modes: Vec::new(), edges: Vec::new(), initial: None };
    while !p.at_eof() {
        if p.try_keyword("mode") {
            let name = p.ident()?;
            let init = if p.try_keyword("init") {
                if p.try_tok(Tok::LParen) {
                    let f = p.formula()?;
                    if !p.try_tok(Tok::RParen) {
                        return p.error("expected ')'");
                    }
                    Some(f)
                } else {
                    Some(Formula::True)
                }
            } else {
                None
            };
            if !p.try_tok(Tok::Colon) {
                return p.error("expected ':' after mode name");
            }
            let ode = p.ode_body()?;
            a.modes.push(Mode { name, flow: ode.eqs, domain: ode.domain, init });
        } else if p.try_keyword("edge") {
            let source = p.ident()?;
            if !p.try_tok(Tok::Imply) {
                return p.error("expected '->'");
            }
            let target = p.ident()?;
            let guard = if p.try_keyword("when") { p.formula()? } else { Formula::True };
            let reset = if p.try_keyword("do") { assignments(&mut p)? } else { Vec::new() };
            a.edges.push(Edge { source, target, guard, reset });
        } else if p.try_keyword("initial") {
            a.initial = Some(p.ident()?);
        } else {
            return p.error("expected 'mode', 'edge' or 'initial'");
        }
        p.try_tok(Tok::Semi);
    }
    Ok(a)
}

pub fn parse_problem(src: &str) -> Result<Problem, ParseError> {
    let sections = split_sections(src)?;
    let mut prob = Problem::default();
    let has_vars = sections.iter().any(|(n, _)| *n == "Vars");
    for (name, body) in &sections {
        if *name == "Vars" {
            parse_vars(body, &mut prob.declarations)?;
        }
    }
    for (name, body) in &sections {
        if *name == "Defs" {
            parse_defs(body, &mut prob.definitions)?;
        }
    }
    for (name, body) in &sections {
        if *name == "Automaton" {
            if prob.automaton.is_some() {
                return Err(ParseError::Problem("more than one Automaton section".into()));
            }
            let vars = prob
                .declarations
                .iter()
                .filter(|(_, r)| *r == Role::State)
                .map(|(v, _)| v.clone())
                .collect();
            let a = parse_automaton(body, &prob.definitions, vars)?;
            let compiled = compile_automaton(&a).map_err(|e| ParseError::Problem(e.to_string()))?;
            prob.definitions.programs.insert("automaton".into(), compiled);
            prob.automaton = Some(a);
        }
    }
    for (name, body) in &sections {
        match *name {
            "Assume" => {
                let mut p = Parser::new(body, &prob.definitions)?;
                let f = p.formula()?;
                p.try_tok(Tok::Semi);
                p.expect_eof()?;
                prob.assumptions.push(f);
            }
            "Prove" => {
                if prob.goal.is_some() {
                    return Err(ParseError::Problem("more than one Prove section".into()));
                }
                let mut p = Parser::new(body, &prob.definitions)?;
                let f = p.formula()?;
                p.try_tok(Tok::Semi);
                p.expect_eof()?;
                prob.goal = Some(f);
            }
            _ => {}
        }
    }
    if prob.goal.is_none() {
        return Err(ParseError::Problem("missing Prove section".into()));
    }
    if has_vars {
        let declared: Vec<&Var> = prob.declarations.iter().map(|(v, _)| v).collect();
        let mut missing: Vec<String> = free_vars(&prob.conjecture())
            .into_iter()
            .filter(|v| !declared.contains(&&v.base()))
            .map(|v| v.to_string())
            .collect();
        missing.dedup();
        if !missing.is_empty() {
            return Err(ParseError::Undeclared(missing.join(", ")));
        }
    }
    Ok(prob)
}
