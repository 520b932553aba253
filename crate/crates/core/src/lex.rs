//! Tokenizer shared by the external-number and expression grammars.

use crate::error::{Error, Result};
use crate::scale::neutrix::Exp;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push(Token {
                tok: Tok::Num(src[start..i].to_string()),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos: start,
            });
        } else if b"+-*/^(),".contains(&c) {
            out.push(Token {
                tok: Tok::Sym(c as char),
                pos: start,
            });
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character {ch:?}"),
            });
        }
    }
    Ok(out)
}

pub fn parse_f64(text: &str, pos: usize) -> Result<f64> {
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            pos,
            msg: format!("bad number {text:?}"),
        })
}

/// Exact rational value of a decimal literal such as `0.125` or `3`.
pub fn parse_rational(text: &str, pos: usize) -> Result<Exp> {
    let err = || Error::Parse {
        pos,
        msg: format!("bad exponent {text:?}"),
    };
    if text.contains(['e', 'E']) {
        return Err(err());
    }
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.len() > 9 || int.len() > 9 {
        return Err(err());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| err())? };
    let den = 10i64.pow(frac.len() as u32);
    Ok(Exp::new(num, den))
}

/// Cursor over a token list.
pub struct Cursor<'a> {
    toks: &'a [Token],
    idx: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], end: usize) -> Self {
        Cursor { toks, idx: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.idx + 1).map(|t| &t.tok)
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|t| t.pos).unwrap_or(self.end)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|t| t.tok.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected {c:?}")))
        }
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    /// Exponent after `^`: `2`, `-1`, `0.5`, `(1/2)`, `(-3/2)`.
    pub fn exponent(&mut self) -> Result<Exp> {
        let pos = self.pos();
        if self.eat('(') {
            let neg = self.eat('-');
            let num = self.rational_literal()?;
            let val = if self.eat('/') {
                let den = self.rational_literal()?;
                if den == Exp::from_integer(0) {
                    return Err(Error::Parse {
                        pos,
                        msg: "zero denominator".into(),
                    });
                }
                num / den
            } else {
                num
            };
            self.expect(')')?;
            Ok(if neg { -val } else { val })
        } else {
            let neg = self.eat('-');
            let v = self.rational_literal()?;
            Ok(if neg { -v } else { v })
        }
    }

    fn rational_literal(&mut self) -> Result<Exp> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::Num(s)) => parse_rational(&s, pos),
            _ => Err(Error::Parse {
                pos,
                msg: "expected exponent".into(),
            }),
        }
    }
}
