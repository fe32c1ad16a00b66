//! Recursive-descent parser for noncommutative rational expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | primary
//! primary := number ['i'] | 'i' | 'x'<index> | 'inv' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Multiplication is noncommutative and operand order is preserved exactly.
//! Division is intentionally absent: `inv(...)` names the inverse without
//! choosing a side.

use num_complex::Complex64;

use super::NcExpr;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Var(usize),
    Inv,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0 }
    }

    fn error(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::Syntax { pos, msg: msg.into() }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let start = self.pos;
            let ch = self.src[self.pos];
            match ch {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((start, Tok::Plus));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((start, Tok::Minus));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((start, Tok::Star));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((start, Tok::LParen));
                    self.pos += 1;
                }
                b')' => {
                    out.push((start, Tok::RParen));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'.' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_digit()
                            || self.src[end] == b'.'
                            || self.src[end] == b'e'
                            || self.src[end] == b'E'
                            || ((self.src[end] == b'+' || self.src[end] == b'-')
                                && end > self.pos
                                && (self.src[end - 1] == b'e' || self.src[end - 1] == b'E')))
                    {
                        end += 1;
                    }
                    let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                    let value: f64 = text
                        .parse()
                        .map_err(|_| self.error(start, format!("bad number literal `{text}`")))?;
                    self.pos = end;
                    if self.pos < self.src.len() && self.src[self.pos] == b'i' {
                        self.pos += 1;
                        out.push((start, Tok::Imag(value)));
                    } else {
                        out.push((start, Tok::Num(value)));
                    }
                }
                b'i' => {
                    // `inv` keyword or the imaginary unit
                    if self.src[self.pos..].starts_with(b"inv") {
                        self.pos += 3;
                        out.push((start, Tok::Inv));
                    } else {
                        self.pos += 1;
                        out.push((start, Tok::Imag(1.0)));
                    }
                }
                b'x' => {
                    let mut end = self.pos + 1;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                    if end == self.pos + 1 {
                        return Err(self.error(start, "variable needs an index, e.g. x1"));
                    }
                    let idx: usize = std::str::from_utf8(&self.src[self.pos + 1..end])
                        .unwrap()
                        .parse()
                        .map_err(|_| self.error(start, "bad variable index"))?;
                    if idx == 0 {
                        return Err(self.error(start, "variable indices start at 1"));
                    }
                    self.pos = end;
                    out.push((start, Tok::Var(idx)));
                }
                other => {
                    return Err(self.error(start, format!("unexpected character `{}`", other as char)))
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    cursor: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.cursor).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.cursor).map(|(_, t)| t.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(Error::Syntax { pos, msg: format!("expected {what}, found {t:?}") }),
            None => Err(Error::Syntax { pos, msg: format!("expected {what}, found end of input") }),
        }
    }

    fn expr(&mut self) -> Result<NcExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = NcExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = NcExpr::Add(Box::new(lhs), Box::new(NcExpr::Neg(Box::new(rhs))));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<NcExpr> {
        let mut lhs = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            let rhs = self.factor()?;
            lhs = NcExpr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<NcExpr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.factor()?;
            return Ok(NcExpr::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<NcExpr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(NcExpr::Const(Complex64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(NcExpr::Const(Complex64::new(0.0, v))),
            Some(Tok::Var(idx)) => Ok(NcExpr::Var(idx)),
            Some(Tok::Inv) => {
                self.expect(Tok::LParen, "`(` after inv")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)` closing inv")?;
                Ok(NcExpr::Inv(Box::new(inner)))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(t) => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parse an expression; operand order is preserved verbatim.
pub fn parse_expr(text: &str) -> Result<NcExpr> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, cursor: 0, end: text.len() };
    let e = p.expr()?;
    if p.cursor != p.toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input after expression".into() });
    }
    Ok(e)
}

/// Parse and require all variable indices to lie in 1..=d.
pub fn parse_expr_with_vars(text: &str, d: usize) -> Result<NcExpr> {
    let e = parse_expr(text)?;
    let max = e.max_var();
    if max > d {
        return Err(Error::InvalidInput(format!(
            "expression uses x{max} but only {d} variables are available"
        )));
    }
    Ok(e)
}
