//! Text form of external numbers, e.g. `1 - 2*eps^(1/2) + eps*pounds`.
//!
//! ```text
//! external := sign? term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := number | sqrt(number) | eps ('^' exponent)?
//!           | oslash | pounds | Meps | mueps | R
//! ```
//! A term that mentions a neutrix word denotes that neutrix scaled by the
//! term's power of `eps`; its coefficient only has to be nonzero.

use super::asym::AsymptoticReal;
use super::external::ExternalNumber;
use super::neutrix::{eps_power, Exp, Neutrix};
use crate::error::{Error, Result};
use crate::lex::{parse_f64, tokenize, Cursor, Tok};
use num_traits::Zero;
use std::fmt;
use std::str::FromStr;

pub fn fmt_coef(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

/// Render one monomial without a sign.
fn fmt_monomial(c: f64, q: Exp) -> String {
    if q.is_zero() {
        fmt_coef(c)
    } else if c == 1.0 {
        eps_power(q)
    } else {
        format!("{}*{}", fmt_coef(c), eps_power(q))
    }
}

pub fn render_asym(a: &AsymptoticReal) -> String {
    if a.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, t) in a.terms().iter().enumerate() {
        let body = fmt_monomial(t.coef.abs(), t.exp);
        if i == 0 {
            if t.coef < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(if t.coef < 0.0 { " - " } else { " + " });
        }
        s.push_str(&body);
    }
    s
}

impl fmt::Display for ExternalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.neutrix();
        if self.rep().is_zero() {
            return f.write_str(&n.token());
        }
        f.write_str(&render_asym(self.rep()))?;
        if !n.is_zero() {
            write!(f, " + {}", n.token())?;
        }
        Ok(())
    }
}

enum Piece {
    Value(f64, Exp),
    Set(Neutrix),
}

fn neutrix_word(w: &str) -> Option<Neutrix> {
    Some(match w {
        "oslash" => Neutrix::OSLASH,
        "pounds" => Neutrix::POUNDS,
        "Meps" => Neutrix::Meps,
        "mueps" => Neutrix::Mueps,
        "R" => Neutrix::Full,
        _ => return None,
    })
}

fn parse_factor(cur: &mut Cursor) -> Result<Piece> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Num(s)) => Ok(Piece::Value(parse_f64(&s, pos)?, Exp::zero())),
        Some(Tok::Ident(w)) if w == "eps" => {
            let q = if cur.eat('^') { cur.exponent()? } else { Exp::from_integer(1) };
            Ok(Piece::Value(1.0, q))
        }
        Some(Tok::Ident(w)) if w == "sqrt" => {
            cur.expect('(')?;
            let p = cur.pos();
            let v = match cur.next() {
                Some(Tok::Num(s)) => parse_f64(&s, p)?,
                _ => return Err(Error::Parse { pos: p, msg: "expected number".into() }),
            };
            cur.expect(')')?;
            Ok(Piece::Value(v.sqrt(), Exp::zero()))
        }
        Some(Tok::Ident(w)) => neutrix_word(&w)
            .map(Piece::Set)
            .ok_or_else(|| Error::Parse { pos, msg: format!("unknown word {w:?}") }),
        _ => Err(Error::Parse { pos, msg: "expected a factor".into() }),
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Piece> {
    let mut coef = 1.0;
    let mut q = Exp::zero();
    let mut set: Option<Neutrix> = None;
    let mut first = true;
    loop {
        let divide = if first {
            false
        } else if cur.eat('*') {
            false
        } else if cur.eat('/') {
            true
        } else {
            break;
        };
        first = false;
        let pos = cur.pos();
        match parse_factor(cur)? {
            Piece::Value(c, e) => {
                if divide {
                    if c == 0.0 {
                        return Err(Error::Parse { pos, msg: "division by zero".into() });
                    }
                    coef /= c;
                    q -= e;
                } else {
                    coef *= c;
                    q += e;
                }
            }
            Piece::Set(n) => {
                if divide {
                    return Err(Error::Parse { pos, msg: "cannot divide by a neutrix".into() });
                }
                set = Some(match set {
                    None => n,
                    Some(m) => m.mul(&n),
                });
            }
        }
    }
    Ok(match set {
        Some(n) if coef != 0.0 => Piece::Set(n.scale(q)),
        Some(_) => Piece::Set(Neutrix::Zero),
        None => Piece::Value(coef, q),
    })
}

pub fn parse_external(src: &str) -> Result<ExternalNumber> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src.len());
    if cur.at_end() {
        return Err(cur.error("empty input"));
    }
    let mut terms = Vec::new();
    let mut neutrix = Neutrix::Zero;
    let mut sign = if cur.eat('-') {
        -1.0
    } else {
        cur.eat('+');
        1.0
    };
    loop {
        match parse_term(&mut cur)? {
            Piece::Value(c, q) => terms.push((sign * c, q)),
            Piece::Set(n) => neutrix = neutrix.add(&n),
        }
        if cur.eat('+') {
            sign = 1.0;
        } else if cur.eat('-') {
            sign = -1.0;
        } else {
            break;
        }
    }
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(ExternalNumber::new(AsymptoticReal::from_terms(terms), neutrix))
}

impl FromStr for ExternalNumber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_external(s)
    }
}

impl FromStr for Neutrix {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let x = parse_external(s)?;
        if x.is_neutricial() {
            Ok(x.neutrix())
        } else {
            Err(Error::Parse { pos: 0, msg: format!("{s:?} is not a neutrix") })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::neutrix::{exp, exp_frac};

    #[test]
    fn render_examples() {
        let x = ExternalNumber::new(
            AsymptoticReal::from_terms([(1.0, exp(0)), (-2.0, exp_frac(1, 2))]),
            Neutrix::pounds(exp(1)),
        );
        assert_eq!(x.to_string(), "1 - 2*eps^(1/2) + eps*pounds");
        assert_eq!(ExternalNumber::from_neutrix(Neutrix::OSLASH).to_string(), "oslash");
        assert_eq!(ExternalNumber::monomial(-1.0, exp(-1)).to_string(), "-eps^-1");
        assert_eq!(ExternalNumber::real(0.5).to_string(), "0.5");
    }

    #[test]
    fn parse_examples() {
        let x: ExternalNumber = "sqrt(3)/2 + eps^2*oslash".parse().unwrap();
        assert!((x.rep().coef_at(exp(0)) - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(x.neutrix(), Neutrix::oslash(exp(2)));
        let y: ExternalNumber = "-1/3*eps^(-1/2) + 2*eps".parse().unwrap();
        assert_eq!(y.rep().terms().len(), 2);
        assert!("eps^".parse::<ExternalNumber>().is_err());
        assert!("1 / oslash".parse::<ExternalNumber>().is_err());
    }

    #[test]
    fn round_trip_fixed() {
        for s in ["0", "R", "Meps", "mueps", "-3 + eps*oslash", "0.1 - eps^(7/8)", "eps^-2*pounds"] {
            let x: ExternalNumber = s.parse().unwrap();
            let back: ExternalNumber = x.to_string().parse().unwrap();
            assert_eq!(x, back, "{s}");
        }
    }
}
