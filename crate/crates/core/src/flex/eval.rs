//! Evaluation of expressions at external points.

use super::expr::{Expr, Prim, Var};
use super::jet::Jet;
use crate::error::{Error, Result};
use crate::scale::{exp, AsymptoticReal, Exp, ExternalNumber, Neutrix};
use num_traits::{ToPrimitive, Zero};

/// Exponent beyond which series terms are folded into a remainder neutrix.
pub const TAYLOR_SPAN: i64 = 8;
/// Extra Taylor orders used to propagate an argument's neutrix.
const PROPAGATION_ORDERS: usize = 4;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Generalized binomial coefficient `C(1/2, k)`.
fn half_binom(k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (0.5 - i as f64) / (i + 1) as f64)
}

/// `sum_i c_i u^i` for an infinitesimal `u`, truncated once powers of `u`
/// pass `TAYLOR_SPAN`; the tail becomes a `pounds`-class remainder.
fn compose_infinitesimal(coef: &dyn Fn(usize) -> f64, u: &AsymptoticReal) -> ExternalNumber {
    let r = match u.order() {
        None => return ExternalNumber::real(coef(0)),
        Some(r) => r,
    };
    debug_assert!(r > Exp::zero());
    let span = exp(TAYLOR_SPAN);
    let mut terms = 1usize;
    while r * Exp::from_integer(terms as i64) <= span {
        terms += 1;
    }
    let tail = r * Exp::from_integer(terms as i64);
    let mut acc = AsymptoticReal::constant(coef(0));
    let mut power = AsymptoticReal::constant(1.0);
    for i in 1..terms {
        power = power.mul(u).truncate_above(tail);
        acc = acc.add(&power.scale(coef(i)));
    }
    ExternalNumber::new(acc, Neutrix::pounds(tail))
}

/// Taylor coefficients `f^(j)(a)/j!` of a primitive at a precise point,
/// `j = 0..=n`.
fn taylor_precise(p: Prim, a: &AsymptoticReal, n: usize) -> Result<Vec<ExternalNumber>> {
    if p == Prim::Sqrt {
        return sqrt_taylor(a, n);
    }
    let a0 = match a.standard_part() {
        Some(v) => v,
        None => return Err(Error::Domain(format!("{}: unlimited argument", p.name()))),
    };
    let delta = a.sub(&AsymptoticReal::constant(a0));
    // Enough base orders to cover the delta expansion.
    let extra = match delta.order() {
        None => 0,
        Some(r) => (exp(TAYLOR_SPAN) / r).ceil().to_integer() as usize + 1,
    };
    let total = n + extra;
    let x = Jet::variable(a0, total);
    let t = match p {
        Prim::Exp => x.exp(),
        Prim::Ln => x
            .ln()
            .ok_or_else(|| Error::Domain(format!("ln of non-positive value {a0}")))?,
        Prim::Sin => x.sin_cos().0,
        Prim::Cos => x.sin_cos().1,
        Prim::Sqrt => unreachable!(),
    };
    Ok((0..=n)
        .map(|j| compose_infinitesimal(&|i| t.c.get(i + j).copied().unwrap_or(0.0) * binom(i + j, j), &delta))
        .collect())
}

fn sqrt_taylor(a: &AsymptoticReal, n: usize) -> Result<Vec<ExternalNumber>> {
    let lead = match a.leading() {
        None if n == 0 => return Ok(vec![ExternalNumber::zero()]),
        None => return Err(Error::Domain("sqrt is not differentiable at 0".into())),
        Some(t) => t,
    };
    if lead.coef < 0.0 {
        return Err(Error::Domain("sqrt of a negative value".into()));
    }
    let u = a.scale(1.0 / lead.coef).shift(-lead.exp).sub(&AsymptoticReal::constant(1.0));
    let root = compose_infinitesimal(&half_binom, &u)
        .scale(lead.coef.sqrt())
        .shift(lead.exp / Exp::from_integer(2));
    let inv = ExternalNumber::precise(a.clone()).inv()?;
    let mut out = Vec::with_capacity(n + 1);
    let mut pw = ExternalNumber::real(1.0);
    for j in 0..=n {
        out.push(root.mul(&pw).scale(half_binom(j)));
        pw = pw.mul(&inv);
    }
    Ok(out)
}

/// Taylor coefficients of a primitive at an external point, with the
/// argument's neutrix pushed through.
pub fn taylor_at(p: Prim, a: &ExternalNumber, n: usize) -> Result<Vec<ExternalNumber>> {
    let spread = a.neutrix();
    if !spread.is_subset_of(&Neutrix::OSLASH) {
        return match p {
            Prim::Sin | Prim::Cos => Ok(vec![ExternalNumber::from_neutrix(Neutrix::POUNDS); n + 1]),
            _ => Err(Error::Domain(format!("{}: argument spread {spread} too wide", p.name()))),
        };
    }
    let k = if spread.is_zero() { 0 } else { PROPAGATION_ORDERS };
    let d = taylor_precise(p, a.rep(), n + k)?;
    if spread.is_zero() {
        return Ok(d);
    }
    let mut power = Neutrix::Zero;
    let powers: Vec<Neutrix> = (1..=k)
        .map(|_| {
            power = if power.is_zero() { spread } else { power.mul(&spread) };
            power
        })
        .collect();
    Ok((0..=n)
        .map(|j| {
            let mut extra = Neutrix::Zero;
            let mut any = false;
            for (i, pk) in powers.iter().enumerate() {
                let c = &d[j + i + 1];
                if c.is_zeroless() || !c.neutrix().is_zero() {
                    any = true;
                    let cn = ExternalNumber::from_neutrix(*pk);
                    extra = extra.add(&c.product_neutrix(&cn));
                }
            }
            if !any {
                extra = powers[k - 1].mul(&spread);
            }
            d[j].with_neutrix(extra)
        })
        .collect())
}

pub fn apply_prim(p: Prim, a: &ExternalNumber) -> Result<ExternalNumber> {
    Ok(taylor_at(p, a, 0)?.swap_remove(0))
}

/// Evaluate at a point given per variable.
pub fn eval(e: &Expr, point: &[ExternalNumber]) -> Result<ExternalNumber> {
    match e {
        Expr::Const(c) => Ok(c.clone()),
        Expr::Var(v) => point
            .get(v.index())
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("no value for {}", v.name()))),
        Expr::Add(a, b) => Ok(eval(a, point)?.add(&eval(b, point)?)),
        Expr::Sub(a, b) => Ok(eval(a, point)?.sub(&eval(b, point)?)),
        Expr::Mul(a, b) => Ok(eval(a, point)?.mul(&eval(b, point)?)),
        Expr::Div(a, b) => eval(a, point)?.div(&eval(b, point)?),
        Expr::Neg(a) => Ok(eval(a, point)?.neg()),
        Expr::Pow(a, k) => eval(a, point)?.powi(*k),
        Expr::Smooth(p, a) => apply_prim(*p, &eval(a, point)?),
        Expr::Saw(a) => Ok(eval(a, point)?.saw()),
    }
}

/// Plain floating-point evaluation of the representative at a concrete
/// `eps`.
pub fn eval_f64(e: &Expr, point: [f64; 2], eps: f64) -> f64 {
    let r = |a: &Expr| eval_f64(a, point, eps);
    match e {
        Expr::Const(c) => c.rep().eval_f64(eps),
        Expr::Var(v) => point[v.index()],
        Expr::Add(a, b) => r(a) + r(b),
        Expr::Sub(a, b) => r(a) - r(b),
        Expr::Mul(a, b) => r(a) * r(b),
        Expr::Div(a, b) => r(a) / r(b),
        Expr::Neg(a) => -r(a),
        Expr::Pow(a, k) => r(a).powi(*k),
        Expr::Smooth(p, a) => {
            let v = r(a);
            match p {
                Prim::Exp => v.exp(),
                Prim::Ln => v.ln(),
                Prim::Sin => v.sin(),
                Prim::Cos => v.cos(),
                Prim::Sqrt => v.sqrt(),
            }
        }
        Expr::Saw(a) => {
            let u = r(a);
            eps * (u / eps).floor() - u
        }
    }
}

/// Evaluation on truncated power series; the representative is used and
/// `eps`-dependent constants are read at the given `eps`.
pub fn eval_jet(e: &Expr, vars: [&Jet; 2], eps: f64) -> Option<Jet> {
    let n = vars[0].degree();
    let r = |a: &Expr| eval_jet(a, vars, eps);
    Some(match e {
        Expr::Const(c) => Jet::constant(c.rep().eval_f64(eps), n),
        Expr::Var(Var::X) => vars[0].clone(),
        Expr::Var(Var::Y) => vars[1].clone(),
        Expr::Add(a, b) => r(a)?.add(&r(b)?),
        Expr::Sub(a, b) => r(a)?.sub(&r(b)?),
        Expr::Mul(a, b) => r(a)?.mul(&r(b)?),
        Expr::Div(a, b) => r(a)?.div(&r(b)?)?,
        Expr::Neg(a) => r(a)?.neg(),
        Expr::Pow(a, k) => r(a)?.powi(*k)?,
        Expr::Smooth(p, a) => {
            let v = r(a)?;
            match p {
                Prim::Exp => v.exp(),
                Prim::Ln => v.ln()?,
                Prim::Sin => v.sin_cos().0,
                Prim::Cos => v.sin_cos().1,
                Prim::Sqrt => v.sqrt()?,
            }
        }
        Expr::Saw(_) => return None,
    })
}

pub fn to_f64(q: Exp) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse::parse_expr;

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    #[test]
    fn smooth_at_external_points() {
        assert_eq!(apply_prim(Prim::Exp, &en("oslash")).unwrap(), en("1 + oslash"));
        assert_eq!(apply_prim(Prim::Cos, &en("eps*oslash")).unwrap(), en("1 + eps^2*oslash"));
        assert_eq!(apply_prim(Prim::Sin, &en("pounds")).unwrap(), en("pounds"));
        assert!(apply_prim(Prim::Ln, &en("eps")).is_err());
        assert!(apply_prim(Prim::Exp, &en("eps^-1")).is_err());
    }

    #[test]
    fn sqrt_of_infinitesimal() {
        let r = apply_prim(Prim::Sqrt, &en("4*eps^2")).unwrap();
        assert_eq!(r, en("2*eps"));
        let r = apply_prim(Prim::Sqrt, &en("1 + eps")).unwrap();
        assert!((r.rep().coef_at(exp(1)) - 0.5).abs() < 1e-15);
        assert!(!r.neutrix().is_zero());
    }

    #[test]
    fn eval_flexible() {
        let f = parse_expr("x^2 + oslash").unwrap();
        assert_eq!(eval(&f, &[en("3")]).unwrap(), en("9 + oslash"));
        let g = parse_expr("1/x").unwrap();
        assert!(eval(&g, &[en("oslash")]).is_err());
        let s = parse_expr("saw(x)").unwrap();
        assert_eq!(eval(&s, &[en("0")]).unwrap(), en("0"));
    }

    #[test]
    fn float_and_jet_agree() {
        let f = parse_expr("exp(x)*sin(x) + 1/(2 + x)").unwrap();
        let j = eval_jet(&f, [&Jet::variable(0.4, 4), &Jet::constant(0.0, 4)], 1e-12).unwrap();
        assert!((j.c[0] - eval_f64(&f, [0.4, 0.0], 1e-12)).abs() < 1e-15);
    }
}
