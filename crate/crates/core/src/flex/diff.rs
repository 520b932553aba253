//! Symbolic differentiation with light simplification.

use super::expr::{Expr, Prim, Var};
use super::parse::fold;
use crate::error::{Error, Result};

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_neutricial() && c.is_precise())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.as_standard() == Some(1.0))
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        fold(Expr::add(a, b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        fold(Expr::sub(a, b))
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Neg(inner) => *inner,
        other => fold(Expr::neg(other)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        Expr::c(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        fold(Expr::mul(a, b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        Expr::c(0.0)
    } else if is_one(&b) {
        a
    } else {
        fold(Expr::div(a, b))
    }
}

/// Partial derivative with respect to `v`. Constants, including neutrix
/// constants, differentiate to 0.
pub fn diff(e: &Expr, v: Var) -> Result<Expr> {
    if !e.uses(v) {
        return Ok(Expr::c(0.0));
    }
    Ok(match e {
        Expr::Const(_) => Expr::c(0.0),
        Expr::Var(w) => Expr::c(if *w == v { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => add(diff(a, v)?, diff(b, v)?),
        Expr::Sub(a, b) => sub(diff(a, v)?, diff(b, v)?),
        Expr::Mul(a, b) => add(
            mul(diff(a, v)?, (**b).clone()),
            mul((**a).clone(), diff(b, v)?),
        ),
        Expr::Div(a, b) => {
            let num = sub(
                mul(diff(a, v)?, (**b).clone()),
                mul((**a).clone(), diff(b, v)?),
            );
            div(num, fold(Expr::pow((**b).clone(), 2)))
        }
        Expr::Neg(a) => neg(diff(a, v)?),
        Expr::Pow(a, k) => {
            let inner = diff(a, v)?;
            let outer = match k {
                0 => return Ok(Expr::c(0.0)),
                1 => Expr::c(1.0),
                2 => mul(Expr::c(2.0), (**a).clone()),
                _ => mul(Expr::c(*k as f64), fold(Expr::pow((**a).clone(), k - 1))),
            };
            mul(outer, inner)
        }
        Expr::Smooth(p, a) => {
            let inner = diff(a, v)?;
            let u = (**a).clone();
            let outer = match p {
                Prim::Exp => e.clone(),
                Prim::Ln => div(Expr::c(1.0), u),
                Prim::Sin => Expr::smooth(Prim::Cos, u),
                Prim::Cos => neg(Expr::smooth(Prim::Sin, u)),
                Prim::Sqrt => div(Expr::c(0.5), e.clone()),
            };
            mul(outer, inner)
        }
        Expr::Saw(_) => return Err(Error::Unsupported("saw is not differentiable".into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::eval::eval_f64;
    use crate::flex::parse::parse_expr;

    fn check(src: &str, v: Var, at: [f64; 2], want: f64) {
        let d = diff(&parse_expr(src).unwrap(), v).unwrap();
        let got = eval_f64(&d, at, 1e-12);
        assert!((got - want).abs() < 1e-12, "{src}: {d} = {got}");
    }

    #[test]
    fn rules() {
        check("x^3 - 2*x", Var::X, [2.0, 0.0], 10.0);
        check("1 - x^2 - y^2", Var::Y, [0.5, 0.75f64.sqrt()], -(3f64.sqrt()));
        check("exp(x)*sin(x)", Var::X, [0.0, 0.0], 1.0);
        check("x/(1 + y)", Var::Y, [2.0, 1.0], -0.5);
        check("sqrt(1 - x^2)", Var::X, [0.0, 0.0], 0.0);
        check("ln(x)", Var::X, [4.0, 0.0], 0.25);
    }

    #[test]
    fn saw_is_rejected() {
        assert!(diff(&parse_expr("saw(x)").unwrap(), Var::X).is_err());
    }

    #[test]
    fn simplified_output() {
        let d = diff(&parse_expr("x^2 + oslash").unwrap(), Var::X).unwrap();
        assert_eq!(d.to_string(), "2*x");
    }
}
