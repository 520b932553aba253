//! Parser for flexible-function expressions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' exponent)?
//! atom  := number | eps | x | y | oslash | pounds | Meps | mueps | R
//!        | (exp | ln | sin | cos | sqrt | saw) '(' expr ')' | '(' expr ')'
//! ```
//! Only `eps` takes a rational exponent. Constant subexpressions are folded
//! into a single external number while parsing.

use super::eval::apply_prim;
use super::expr::{Expr, Prim, Var};
use crate::error::{Error, Result};
use crate::lex::{parse_f64, tokenize, Cursor, Tok};
use crate::scale::{ExternalNumber, Neutrix};

pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut cur = Cursor::new(&toks, src.len());
    if cur.at_end() {
        return Err(cur.error("empty expression"));
    }
    let e = expr(&mut cur, 0)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input"));
    }
    Ok(e)
}

const MAX_DEPTH: usize = 200;

fn expr(cur: &mut Cursor, depth: usize) -> Result<Expr> {
    if depth > MAX_DEPTH {
        return Err(cur.error("nesting too deep"));
    }
    let mut lhs = term(cur, depth)?;
    loop {
        if cur.eat('+') {
            let rhs = term(cur, depth)?;
            lhs = fold(Expr::add(lhs, rhs));
        } else if cur.eat('-') {
            let rhs = term(cur, depth)?;
            lhs = fold(Expr::sub(lhs, rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn term(cur: &mut Cursor, depth: usize) -> Result<Expr> {
    let mut lhs = unary(cur, depth)?;
    loop {
        if cur.eat('*') {
            let rhs = unary(cur, depth)?;
            lhs = fold(Expr::mul(lhs, rhs));
        } else if cur.eat('/') {
            let rhs = unary(cur, depth)?;
            lhs = fold(Expr::div(lhs, rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn unary(cur: &mut Cursor, depth: usize) -> Result<Expr> {
    if depth > MAX_DEPTH {
        return Err(cur.error("nesting too deep"));
    }
    if cur.eat('-') {
        let e = unary(cur, depth + 1)?;
        return Ok(fold(Expr::neg(e)));
    }
    if cur.eat('+') {
        return unary(cur, depth + 1);
    }
    power(cur, depth)
}

fn power(cur: &mut Cursor, depth: usize) -> Result<Expr> {
    let is_eps = cur.peek() == Some(&Tok::Ident("eps".into()));
    let base = atom(cur, depth)?;
    if !cur.eat('^') {
        return Ok(base);
    }
    let pos = cur.pos();
    let q = cur.exponent()?;
    if is_eps {
        return Ok(Expr::Const(ExternalNumber::monomial(1.0, q)));
    }
    if !q.is_integer() || q.to_integer().abs() > 64 {
        return Err(Error::Parse {
            pos,
            msg: "power must be an integer between -64 and 64".into(),
        });
    }
    Ok(fold(Expr::pow(base, q.to_integer() as i32)))
}

fn atom(cur: &mut Cursor, depth: usize) -> Result<Expr> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Num(s)) => Ok(Expr::c(parse_f64(&s, pos)?)),
        Some(Tok::Sym('(')) => {
            let e = expr(cur, depth + 1)?;
            cur.expect(')')?;
            Ok(e)
        }
        Some(Tok::Ident(w)) => match w.as_str() {
            "eps" => Ok(Expr::Const(ExternalNumber::monomial(1.0, 1.into()))),
            "x" => Ok(Expr::Var(Var::X)),
            "y" => Ok(Expr::Var(Var::Y)),
            "oslash" => Ok(Expr::neutrix(Neutrix::OSLASH)),
            "pounds" => Ok(Expr::neutrix(Neutrix::POUNDS)),
            "Meps" => Ok(Expr::neutrix(Neutrix::Meps)),
            "mueps" => Ok(Expr::neutrix(Neutrix::Mueps)),
            "R" => Ok(Expr::neutrix(Neutrix::Full)),
            "saw" => {
                cur.expect('(')?;
                let e = expr(cur, depth + 1)?;
                cur.expect(')')?;
                Ok(fold(Expr::saw(e)))
            }
            name => match Prim::from_name(name) {
                Some(p) => {
                    cur.expect('(')?;
                    let e = expr(cur, depth + 1)?;
                    cur.expect(')')?;
                    Ok(fold(Expr::smooth(p, e)))
                }
                None => Err(Error::Parse {
                    pos,
                    msg: format!("unknown name {name:?}"),
                }),
            },
        },
        _ => Err(Error::Parse {
            pos,
            msg: "expected an operand".into(),
        }),
    }
}

fn as_const(e: &Expr) -> Option<&ExternalNumber> {
    match e {
        Expr::Const(c) => Some(c),
        _ => None,
    }
}

/// Fold a node whose children are all constants. Nodes whose constant
/// evaluation fails are kept as they are.
pub fn fold(e: Expr) -> Expr {
    let folded = match &e {
        Expr::Add(a, b) => as_const(a).zip(as_const(b)).map(|(a, b)| Ok(a.add(b))),
        Expr::Sub(a, b) => as_const(a).zip(as_const(b)).map(|(a, b)| Ok(a.sub(b))),
        Expr::Mul(a, b) => as_const(a).zip(as_const(b)).map(|(a, b)| Ok(a.mul(b))),
        Expr::Div(a, b) => as_const(a).zip(as_const(b)).map(|(a, b)| a.div(b)),
        Expr::Neg(a) => as_const(a).map(|a| Ok(a.neg())),
        Expr::Pow(a, k) => as_const(a).map(|a| a.powi(*k)),
        Expr::Smooth(p, a) => as_const(a).map(|a| apply_prim(*p, a)),
        Expr::Saw(a) => as_const(a).map(|a| Ok(a.saw())),
        _ => None,
    };
    match folded {
        Some(Ok(c)) => Expr::Const(c),
        _ => e,
    }
}

/// Fold every constant subtree of an expression built programmatically.
pub fn fold_all(e: &Expr) -> Expr {
    fold(e.map_children(fold_all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("-x^2 + 3*x*y - y/2").unwrap();
        assert_eq!(e.to_string(), "-x^2 + 3*x*y - y/2");
        let e = parse_expr("(x + 1)^-2").unwrap();
        assert_eq!(e.to_string(), "(x + 1)^-2");
    }

    #[test]
    fn constants_fold() {
        let e = parse_expr("x^2 + eps*oslash + 2*eps^(1/2)").unwrap();
        assert_eq!(e.to_string(), "x^2 + eps*oslash + 2*eps^(1/2)");
        let e = parse_expr("sqrt(3)/2").unwrap();
        assert!(matches!(e, Expr::Const(_)));
    }

    #[test]
    fn errors_have_positions() {
        match parse_expr("x + * 2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("x^(1/2)").is_err());
        assert!(parse_expr("foo(x)").is_err());
        assert!(parse_expr("(x").is_err());
    }

    #[test]
    fn round_trip() {
        for s in [
            "x^2 + oslash",
            "x + x*oslash",
            "exp(x) - 1",
            "saw(x)/x",
            "-(1 + eps*oslash)*x - (1 + eps*pounds)*y^2 + oslash",
            "1 - x^2 - y^2",
            "x/(y - 2)^2 - -x",
        ] {
            let e = parse_expr(s).unwrap();
            let back = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, back, "{s} -> {e}");
        }
    }
}
