//! Recursive-descent parser for polynomial text.
//!
//! Grammar (whitespace insignificant, no implicit multiplication):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | atom
//! atom    := primary ('^' integer)?
//! primary := integer | variable | '(' expr ')'
//! ```
//!
//! Integer coefficients may have any number of digits; they are folded mod p
//! digit by digit.  Exponents must be plain non-negative integers at most
//! [`MAX_EXPONENT`].  Variables are x1..xN, with x, y, z accepted when the
//! polynomial has at most three variables.

use crate::error::{Error, Result};
use crate::gf::FieldCtx;

use super::{Exp, MvPoly, MAX_EXPONENT};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { bytes: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.bytes[self.pos];
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
                    end += 1;
                }
                let s = std::str::from_utf8(&self.bytes[start..end]).expect("digits are ascii");
                self.pos = end;
                return Ok(Some((Tok::Int(s.to_string()), start)));
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos + 1;
                while end < self.bytes.len() && self.bytes[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let s = std::str::from_utf8(&self.bytes[start..end]).expect("checked ascii");
                self.pos = end;
                return Ok(Some((Tok::Ident(s.to_string()), start)));
            }
            other => {
                return Err(Error::parse(start, format!("unexpected character `{}`", other as char)))
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }
}

struct Parser<'a> {
    ctx: &'a FieldCtx,
    nvars: usize,
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end_pos: usize,
}

pub(super) fn parse(ctx: &FieldCtx, nvars: usize, text: &str) -> Result<MvPoly> {
    if nvars == 0 {
        return Err(Error::domain("polynomials need at least one variable"));
    }
    let toks = Lexer::tokens(text)?;
    let mut parser = Parser { ctx, nvars, toks, idx: 0, end_pos: text.len() };
    let poly = parser.expr()?;
    if let Some((tok, pos)) = parser.peek() {
        return Err(Error::parse(pos, format!("unexpected `{}` after the expression", describe(&tok))));
    }
    Ok(poly)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Int(s) => s.clone(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<(Tok, usize)> {
        self.toks.get(self.idx).cloned()
    }

    fn advance(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<MvPoly> {
        let mut acc = self.term()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.advance();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.advance();
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MvPoly> {
        let mut acc = self.factor()?;
        while let Some((Tok::Star, _)) = self.peek() {
            self.advance();
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MvPoly> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.advance();
            return Ok(-&self.factor()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<MvPoly> {
        let base = self.primary()?;
        if let Some((Tok::Caret, caret_pos)) = self.peek() {
            self.advance();
            let (tok, pos) = self
                .advance()
                .ok_or_else(|| Error::parse(self.end_pos, "expected an exponent after `^`"))?;
            let digits = match tok {
                Tok::Int(s) => s,
                other => {
                    return Err(Error::parse(
                        pos,
                        format!("expected a non-negative integer exponent, found `{}`", describe(&other)),
                    ))
                }
            };
            let e: u64 = digits
                .parse()
                .ok()
                .filter(|&e| e <= MAX_EXPONENT as u64)
                .ok_or_else(|| Error::parse(pos, format!("exponent {digits} exceeds the cap {MAX_EXPONENT}")))?;
            let _ = caret_pos;
            return Ok(base.pow(e as u32));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<MvPoly> {
        let (tok, pos) = self
            .advance()
            .ok_or_else(|| Error::parse(self.end_pos, "unexpected end of input"))?;
        match tok {
            Tok::Int(digits) => {
                // Fold the decimal digits mod p so literals of any size work.
                let p = self.ctx.p();
                let mut acc = 0u64;
                for b in digits.bytes() {
                    acc = (acc * 10 + (b - b'0') as u64) % p;
                }
                Ok(MvPoly::constant(&self.ctx.from_int(acc as i64), self.nvars))
            }
            Tok::Ident(name) => {
                let index = self.variable_index(&name, pos)?;
                let mut exp: Exp = vec![0; self.nvars];
                exp[index] = 1;
                Ok(MvPoly::monomial(&self.ctx.one(), exp))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                match self.advance() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((other, p)) => {
                        Err(Error::parse(p, format!("expected `)`, found `{}`", describe(&other))))
                    }
                    None => Err(Error::parse(self.end_pos, "unclosed parenthesis")),
                }
            }
            other => Err(Error::parse(pos, format!("unexpected `{}`", describe(&other)))),
        }
    }

    fn variable_index(&self, name: &str, pos: usize) -> Result<usize> {
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let i: usize = rest
                    .parse()
                    .map_err(|_| Error::parse(pos, format!("variable `{name}` is malformed")))?;
                if i == 0 || i > self.nvars {
                    return Err(Error::parse(
                        pos,
                        format!("variable `{name}` out of range for {} variables", self.nvars),
                    ));
                }
                return Ok(i - 1);
            }
        }
        if self.nvars <= 3 {
            if let Some(i) = ["x", "y", "z"].iter().position(|&a| a == name) {
                if i < self.nvars {
                    return Ok(i);
                }
                return Err(Error::parse(
                    pos,
                    format!("variable `{name}` out of range for {} variables", self.nvars),
                ));
            }
        }
        Err(Error::parse(
            pos,
            format!("unknown variable `{name}`; use x1..x{} ", self.nvars)
                + if self.nvars <= 3 { "(or x, y, z)" } else { "" },
        ))
    }
}
