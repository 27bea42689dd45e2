//! Concrete syntax: recursive-descent parsing of terms, formulas, programs
//! and `.dl` problem files, and the matching pretty printer.

mod lexer;
mod pretty;
mod problem;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{desugar, Formula, Ode, Program, Rel, SurfaceProgram, Term, Var};

use lexer::{lex, Tok, Token};

pub use pretty::{pretty_formula, pretty_program, pretty_term};
pub use problem::{parse_automaton, parse_problem, Problem, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: malformed differential equation system: {msg}")]
    Arity { line: usize, col: usize, msg: String },
    #[error("undeclared variable(s): {0}")]
    Undeclared(String),
    #[error("problem file: {0}")]
    Problem(String),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. } | ParseError::Arity { line, col, .. } => (*line, *col),
            _ => (0, 0),
        }
    }
}

/// Named abbreviations expanded during parsing.
#[derive(Clone, Debug, Default)]
pub struct Defs {
    pub formulas: BTreeMap<String, Formula>,
    pub programs: BTreeMap<String, Program>,
}

const RESERVED: &[&str] = &["true", "false", "if", "else", "while"];

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    defs: &'a Defs,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &str, defs: &'a Defs) -> Result<Parser<'a>, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, defs })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::syntax(line, col, msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Eof => "end of input".into(),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Num(n) => format!("number {n}"),
            t => format!("{t:?}"),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.describe()))
        }
    }

    pub(crate) fn from_tokens(toks: Vec<Token>, pos: usize, defs: &'a Defs) -> Parser<'a> {
        Parser { toks, pos, defs }
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.describe()))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    pub(crate) fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.is_keyword(word) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{word}', found {}", self.describe()))
        }
    }

    pub(crate) fn try_keyword(&mut self, word: &str) -> bool {
        if self.is_keyword(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn try_tok(&mut self, t: Tok) -> bool {
        if *self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    // Terms

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    t = Term::add(t, self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    t = Term::sub(t, self.product()?);
                }
                _ => return Ok(t),
            }
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut t = self.negation()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    t = Term::mul(t, self.negation()?);
                }
                Tok::Slash => {
                    self.bump();
                    let (line, col) = self.here();
                    let d = self.negation()?;
                    match d.const_value() {
                        Some(v) if !num_traits::Zero::is_zero(&v) => {}
                        _ => {
                            return Err(ParseError::syntax(
                                line,
                                col,
                                format!("divisor {d} is not a nonzero constant"),
                            ))
                        }
                    }
                    t = Term::div(t, d);
                }
                _ => return Ok(t),
            }
        }
    }

    fn negation(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Term::neg(self.negation()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Term, ParseError> {
        let base = self.term_atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            match self.bump() {
                Tok::Num(n) if n.is_integer() && n >= num_rational::BigRational::from_integer(0.into()) => {
                    let e: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| ParseError::syntax(0, 0, "exponent too large"))?;
                    Ok(Term::pow(base, e))
                }
                _ => {
                    self.pos -= 1;
                    self.error("exponent must be a nonnegative integer literal")
                }
            }
        } else {
            Ok(base)
        }
    }

    fn term_atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                let v = Var::new(&s);
                if *self.peek() == Tok::Prime {
                    self.bump();
                    Ok(Term::Var(v.prime()))
                } else {
                    Ok(Term::Var(v))
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.error(format!("expected term, found {}", self.describe())),
        }
    }

    // Formulas

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        let a = self.disjunction()?;
        match self.peek() {
            Tok::Imply => {
                self.bump();
                Ok(Formula::imply(a, self.formula()?))
            }
            Tok::Equiv => {
                self.bump();
                Ok(Formula::equiv(a, self.formula()?))
            }
            _ => Ok(a),
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut a = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            a = Formula::or(a, self.conjunction()?);
        }
        Ok(a)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut a = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            a = Formula::and(a, self.unary()?);
        }
        Ok(a)
    }

    fn bound_var(&mut self) -> Result<Var, ParseError> {
        let x = Var::new(self.ident()?);
        self.try_tok(Tok::Dot);
        Ok(x)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall => {
                self.bump();
                let x = self.bound_var()?;
                Ok(Formula::forall(x, self.unary()?))
            }
            Tok::Exists => {
                self.bump();
                let x = self.bound_var()?;
                Ok(Formula::exists(x, self.unary()?))
            }
            Tok::LBrack => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RBrack, "']'")?;
                Ok(Formula::boxed(p, self.unary()?))
            }
            Tok::Lt => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::Gt, "'>' closing the diamond")?;
                Ok(Formula::diamond(p, self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) if self.defs.formulas.contains_key(&s) => {
                self.bump();
                Ok(self.defs.formulas[&s].clone())
            }
            Tok::LParen => {
                let save = self.pos;
                let first = self.comparison();
                match first {
                    Ok(f) => Ok(f),
                    Err(e1) => {
                        let far1 = e1.position();
                        self.pos = save;
                        self.bump();
                        let inner = self.formula().and_then(|f| {
                            self.expect(Tok::RParen, "')'")?;
                            Ok(f)
                        });
                        match inner {
                            Ok(f) => Ok(f),
                            Err(e2) => Err(if e2.position() >= far1 { e2 } else { e1 }),
                        }
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<Formula, ParseError> {
        let a = self.term()?;
        let rel = match self.peek() {
            Tok::Eq => Rel::Eq,
            Tok::Ne => Rel::Ne,
            Tok::Ge => Rel::Ge,
            Tok::Gt => Rel::Gt,
            Tok::Le => Rel::Le,
            Tok::Lt => Rel::Lt,
            _ => return self.error(format!("expected comparison operator, found {}", self.describe())),
        };
        self.bump();
        let b = self.term()?;
        Ok(Formula::cmp(a, rel, b))
    }

    // Programs

    pub(crate) fn program(&mut self) -> Result<Program, ParseError> {
        let a = self.sequence()?;
        if *self.peek() == Tok::Choice {
            self.bump();
            return Ok(Program::choice(a, self.program()?));
        }
        Ok(a)
    }

    fn starts_atomic(&self) -> bool {
        match self.peek() {
            Tok::Question | Tok::LBrace => true,
            Tok::Ident(s) if s == "if" || s == "while" => true,
            Tok::Ident(s) => *self.peek_at(1) == Tok::Assign || self.defs.programs.contains_key(s),
            _ => false,
        }
    }

    fn sequence(&mut self) -> Result<Program, ParseError> {
        let a = self.atomic()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            if self.starts_atomic() {
                return Ok(Program::seq(a, self.sequence()?));
            }
        }
        Ok(a)
    }

    fn is_ode_start(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Prime && *self.peek_at(3) == Tok::Eq
    }

    pub(crate) fn ode_body(&mut self) -> Result<Ode, ParseError> {
        let (line, col) = self.here();
        let mut eqs = Vec::new();
        loop {
            let x = Var::new(self.ident()?);
            self.expect(Tok::Prime, "\"'\"")?;
            self.expect(Tok::Eq, "'='")?;
            let t = self.term()?;
            eqs.push((x, t));
            if !self.try_tok(Tok::Comma) {
                break;
            }
        }
        let domain = if self.try_tok(Tok::And) { self.formula()? } else { Formula::True };
        let ode = Ode::new(eqs, domain);
        ode.check_well_formed()
            .map_err(|msg| ParseError::Arity { line, col, msg })?;
        Ok(ode)
    }

    fn block(&mut self) -> Result<Program, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let p = self.program()?;
        self.expect(Tok::RBrace, "'}'")?;
        Ok(p)
    }

    fn atomic(&mut self) -> Result<Program, ParseError> {
        match self.peek().clone() {
            Tok::Question => {
                self.bump();
                let (line, col) = self.here();
                let f = self.formula()?;
                if !f.is_first_order() {
                    return Err(ParseError::syntax(line, col, "tests must be first-order"));
                }
                Ok(Program::test(f))
            }
            Tok::LBrace => {
                let p = if self.is_ode_start() {
                    self.bump();
                    let o = self.ode_body()?;
                    self.expect(Tok::RBrace, "'}'")?;
                    Program::Ode(o)
                } else {
                    self.block()?
                };
                if self.try_tok(Tok::Star) {
                    Ok(Program::looped(p))
                } else {
                    Ok(p)
                }
            }
            Tok::Ident(s) if s == "if" => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let c = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                let a = self.block()?;
                let surface = if self.try_keyword("else") {
                    let b = self.block()?;
                    SurfaceProgram::IfThenElse(c, Box::new((&a).into()), Box::new((&b).into()))
                } else {
                    SurfaceProgram::IfThen(c, Box::new((&a).into()))
                };
                Ok(desugar(&surface))
            }
            Tok::Ident(s) if s == "while" => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let c = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                let a = self.block()?;
                Ok(desugar(&SurfaceProgram::While(c, Box::new((&a).into()))))
            }
            Tok::Ident(s) if *self.peek_at(1) == Tok::Assign => {
                let x = Var::new(self.ident()?);
                self.bump();
                if self.try_tok(Tok::Star) {
                    Ok(desugar(&SurfaceProgram::AssignAny(x)))
                } else {
                    let _ = s;
                    Ok(Program::assign(x, self.term()?))
                }
            }
            Tok::Ident(s) if self.defs.programs.contains_key(&s) => {
                self.bump();
                Ok(self.defs.programs[&s].clone())
            }
            _ => self.error(format!("expected program, found {}", self.describe())),
        }
    }
}

static NO_DEFS: std::sync::OnceLock<Defs> = std::sync::OnceLock::new();

fn no_defs() -> &'static Defs {
    NO_DEFS.get_or_init(Defs::default)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, no_defs())?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    parse_formula_with(src, no_defs())
}

pub fn parse_formula_with(src: &str, defs: &Defs) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, defs)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    parse_program_with(src, no_defs())
}

pub fn parse_program_with(src: &str, defs: &Defs) -> Result<Program, ParseError> {
    let mut p = Parser::new(src, defs)?;
    let prog = p.program()?;
    p.expect_eof()?;
    Ok(prog)
}
