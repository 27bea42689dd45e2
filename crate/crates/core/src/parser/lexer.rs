//! Tokenizer for the ASCII surface syntax (Unicode aliases accepted).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigRational),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Assign,
    Question,
    Choice,
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
    Not,
    And,
    Or,
    Imply,
    Equiv,
    Forall,
    Exists,
    Colon,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied().unwrap_or('\0');
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '$') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = match word.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ => Tok::Ident(word),
            };
            (tok, j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let int: String = chars[i..j].iter().collect();
            let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
            if j < chars.len() && chars[j] == '.' && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let frac: String = chars[j + 1..k].iter().collect();
                let den = pow(BigInt::from(10), frac.len());
                value += BigRational::new(frac.parse::<BigInt>().expect("digits"), den);
                j = k;
            }
            (Tok::Num(value), j - i)
        } else if c == '\\' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_alphabetic() {
                j += 1;
            }
            let word: String = chars[i + 1..j].iter().collect();
            let tok = match word.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                _ => {
                    return Err(ParseError::syntax(line, col, format!("unknown command \\{word}")));
                }
            };
            (tok, j - i)
        } else {
            match (c, peek(1), peek(2)) {
                ('<', '-', '>') => (Tok::Equiv, 3),
                ('<', '=', _) => (Tok::Le, 2),
                ('-', '>', _) => (Tok::Imply, 2),
                ('>', '=', _) => (Tok::Ge, 2),
                ('!', '=', _) => (Tok::Ne, 2),
                (':', '=', _) => (Tok::Assign, 2),
                ('+', '+', _) => (Tok::Choice, 2),
                ('=', '=', _) => (Tok::Eq, 2),
                ('&', '&', _) => (Tok::And, 2),
                ('|', '|', _) => (Tok::Or, 2),
                ('<', _, _) => (Tok::Lt, 1),
                ('>', _, _) => (Tok::Gt, 1),
                ('=', _, _) => (Tok::Eq, 1),
                ('!', _, _) | ('¬', _, _) => (Tok::Not, 1),
                ('&', _, _) | ('∧', _, _) => (Tok::And, 1),
                ('|', _, _) | ('∨', _, _) => (Tok::Or, 1),
                ('→', _, _) => (Tok::Imply, 1),
                ('↔', _, _) => (Tok::Equiv, 1),
                ('≥', _, _) => (Tok::Ge, 1),
                ('≤', _, _) => (Tok::Le, 1),
                ('≠', _, _) => (Tok::Ne, 1),
                ('∀', _, _) => (Tok::Forall, 1),
                ('∃', _, _) => (Tok::Exists, 1),
                ('∪', _, _) => (Tok::Choice, 1),
                ('′', _, _) | ('\'', _, _) => (Tok::Prime, 1),
                ('−', _, _) | ('-', _, _) => (Tok::Minus, 1),
                ('·', _, _) | ('*', _, _) => (Tok::Star, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('/', _, _) => (Tok::Slash, 1),
                ('^', _, _) => (Tok::Caret, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('[', _, _) => (Tok::LBrack, 1),
                (']', _, _) => (Tok::RBrack, 1),
                ('{', _, _) => (Tok::LBrace, 1),
                ('}', _, _) => (Tok::RBrace, 1),
                (',', _, _) => (Tok::Comma, 1),
                (';', _, _) => (Tok::Semi, 1),
                ('.', _, _) => (Tok::Dot, 1),
                ('?', _, _) => (Tok::Question, 1),
                (':', _, _) => (Tok::Colon, 1),
                _ => return Err(ParseError::syntax(line, col, format!("unexpected character {c:?}"))),
            }
        };
        out.push(Token { tok, line: start.0, col: start.1 });
        advance(len, &mut i, &mut col);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
