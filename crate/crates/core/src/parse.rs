//! Recursive-descent parser for the expression grammar.
//!
//! Infix `+ - * / ^` with `^` binding tighter than unary minus, integer and
//! `p/q` rational literals, jet variables `u`, `u1`..`u9`, `u_10`.., the
//! independent variable `x`, parameters as bare identifiers, and function
//! application `a(u)` where a trailing apostrophe chain means derivatives of
//! the symbol. Whitespace is insignificant.

use num::bigint::BigInt;
use num::rational::BigRational;

use crate::atom::Atom;
use crate::context::Context;
use crate::derive;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::subst;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    At,
    End,
}

struct Lexer<'s> {
    src: &'s [u8],
    pos: usize,
    line: u32,
    col: u32,
}

struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'s> Lexer<'s> {
    fn new(src: &'s str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Spanned> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let at = |tok| Spanned { tok, line, col };
        let c = match self.peek() {
            None => return Ok(at(Tok::End)),
            Some(c) => c,
        };
        let tok = match c {
            b'+' => {
                self.bump();
                Tok::Plus
            }
            b'-' => {
                self.bump();
                Tok::Minus
            }
            b'*' => {
                self.bump();
                Tok::Star
            }
            b'/' => {
                self.bump();
                Tok::Slash
            }
            b'^' => {
                self.bump();
                Tok::Caret
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'@' => {
                self.bump();
                Tok::At
            }
            b'0'..=b'9' => {
                let mut s = String::new();
                while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    s.push(self.bump().unwrap() as char);
                }
                Tok::Int(s.parse().expect("digits"))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while matches!(self.peek(), Some(d) if d.is_ascii_alphanumeric() || d == b'_' || d == b'\'')
                {
                    s.push(self.bump().unwrap() as char);
                }
                Tok::Ident(s)
            }
            other => {
                return Err(self.error(format!("unexpected character `{}`", other as char)))
            }
        };
        Ok(at(tok))
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    loop {
        let t = lx.next_token()?;
        let done = t.tok == Tok::End;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}

struct Parser<'c, 't> {
    ctx: &'c Context,
    toks: &'t [Spanned],
    pos: usize,
    allow_hole: bool,
}

impl<'c, 't> Parser<'c, 't> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn bump(&mut self) -> &Tok {
        let t = &self.toks[self.pos].tok;
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.ctx.add(&acc, &rhs);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.ctx.sub(&acc, &rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.ctx.mul(&acc, &rhs)?;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = self.ctx.div(&acc, &rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(self.ctx.neg(&inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let mut neg = false;
        if *self.peek() == Tok::Minus {
            self.bump();
            neg = true;
        }
        let e = match self.bump().clone() {
            Tok::Int(n) => n,
            _ => return Err(self.error("expected an integer exponent")),
        };
        let e: i64 = e
            .try_into()
            .map_err(|_| self.error("exponent too large"))?;
        self.ctx.pow(&base, if neg { -e } else { e })
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.bump().clone() {
            Tok::Int(n) => Ok(Expr::constant(BigRational::from_integer(n))),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::At => {
                if !self.allow_hole {
                    Err(self.error("`@` is only valid inside rule templates"))
                } else {
                    Ok(Expr::hole())
                }
            }
            Tok::Ident(name) => self.resolve_ident(name),
            Tok::End => Err(self.error("unexpected end of input")),
            other => Err(self.error(format!("unexpected token {other:?}"))),
        }
    }

    fn resolve_ident(&mut self, name: String) -> Result<Expr> {
        // Function application: the identifier is followed by `(`.
        if *self.peek() == Tok::LParen {
            self.bump();
            let arg = self.expr()?;
            self.expect(Tok::RParen, "`)` closing the argument")?;
            return self.apply_function(&name, &arg);
        }
        if let Some(binding) = self.ctx.param_binding(&name) {
            return Ok(match binding {
                Some(v) => Expr::constant(v.clone()),
                None => Expr::atom(Atom::param(name.as_str())),
            });
        }
        if let Some(s) = self.ctx.surd_def() {
            if *s.name == name {
                return Ok(Expr::atom(Atom::Surd(s.name.clone())));
            }
        }
        if let Some((var, order)) = split_jet(&name) {
            if self.ctx.has_dep(var) {
                return self
                    .ctx
                    .jet(var, order)
                    .map_err(|e| self.wrap(e));
            }
        }
        if name == "x" {
            return Ok(self.ctx.x());
        }
        if self.ctx.func_def(&name).is_some() {
            return Err(self.error(format!(
                "function symbol `{name}` needs an argument"
            )));
        }
        Err(self.wrap(Error::UnknownSymbol(name)))
    }

    fn wrap(&self, e: Error) -> Error {
        match e {
            Error::UnknownSymbol(s) => {
                let (line, col) = self.here();
                Error::Syntax {
                    line,
                    col,
                    msg: format!("unknown symbol `{s}`"),
                }
            }
            other => other,
        }
    }

    /// `name` may carry extra apostrophes beyond a declared symbol; each one
    /// differentiates the symbol's rule template.
    fn apply_function(&mut self, name: &str, arg: &Expr) -> Result<Expr> {
        if self.ctx.func_def(name).is_some() {
            return self.ctx.func(name, arg);
        }
        let mut base = name;
        let mut primes = 0u32;
        while let Some(stripped) = base.strip_suffix('\'') {
            base = stripped;
            primes += 1;
            if self.ctx.func_def(base).is_some() {
                break;
            }
        }
        if self.ctx.func_def(base).is_none() {
            return Err(self.wrap(Error::UnknownSymbol(name.to_string())));
        }
        let mut template = self.ctx.func_derivative_template(base)?;
        for _ in 1..primes {
            template = derive::diff(self.ctx, &template, &Atom::Hole)?;
        }
        subst::instantiate(self.ctx, &template, arg)
    }
}

fn split_jet(name: &str) -> Option<(&str, u32)> {
    if let Some((base, digits)) = name.split_once('_') {
        if !base.is_empty() && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return Some((base, digits.parse().ok()?));
        }
        return None;
    }
    let digits_at = name.find(|c: char| c.is_ascii_digit());
    match digits_at {
        None => Some((name, 0)),
        Some(i) => {
            let (base, digits) = name.split_at(i);
            if digits.bytes().all(|b| b.is_ascii_digit()) {
                Some((base, digits.parse().ok()?))
            } else {
                None
            }
        }
    }
}

fn parse_with(ctx: &Context, text: &str, allow_hole: bool) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        ctx,
        toks: &toks,
        pos: 0,
        allow_hole,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

/// Parses expression text against the session symbols.
pub fn parse(ctx: &Context, text: &str) -> Result<Expr> {
    parse_with(ctx, text, false)
}

/// Parses a rule template, allowing the argument hole `@`.
pub fn parse_template(ctx: &Context, text: &str) -> Result<Expr> {
    parse_with(ctx, text, true)
}
