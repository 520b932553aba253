//! Lagrange multipliers for an imprecise objective under one precise
//! constraint `g(x, y) = 0`.

use super::implicit::{implicit_jet, implicit_solve, ImplicitResult};
use super::near::{sides, verdict_from_series};
use super::scales::Verdict;
use crate::calc::{expand, partial_derivative, strong_diff_witness, Context, Regime, Series};
use crate::error::{Error, Result};
use crate::flex::{diff, eval, Expr, Var};
use crate::scale::{AsymptoticReal, Exp, ExternalNumber, Neutrix};

/// Degree of the implicit-function jet used for the constrained check.
const JET_DEGREE: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeResult {
    pub lambda: f64,
    pub l: Neutrix,
    pub residual_x: ExternalNumber,
    pub residual_y: ExternalNumber,
    /// `residual_x` lies in `L` and `residual_y` equals `N(dF/d_N y)`.
    pub certified: bool,
    /// `dF/d_M x` and `dF/d_N y` at the point.
    pub partials: [ExternalNumber; 2],
    /// Ordinary partial derivatives of the constraint.
    pub constraint_partials: [f64; 2],
    pub implicit: ImplicitResult,
    pub hypotheses: Vec<(String, Verdict)>,
    pub notes: Vec<String>,
}

impl LagrangeResult {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.1 == Verdict::Holds)
    }
}

fn has_standard_constants(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => c.as_standard().is_some() || c.rep().is_zero() && c.is_precise(),
        other => other.children().into_iter().all(has_standard_constants),
    }
}

/// `F(x, f(x))` along the constraint curve, with `f` given by its jet at `a`.
fn constrained_series(f: &Expr, g: &Expr, a: f64, b: f64) -> Result<Option<Series>> {
    if !has_standard_constants(g) {
        return Ok(None);
    }
    let Some(jet) = implicit_jet(g, a, b, JET_DEGREE) else {
        return Ok(None);
    };
    let mut y = Series::zero();
    for (k, c) in jet.c.iter().enumerate() {
        if *c != 0.0 {
            y = y.add(&Series::monomial(ExternalNumber::real(*c), [k as i32, 0]));
        }
    }
    y.bounded.insert([JET_DEGREE as i32 + 1, 0], Exp::from_integer(0));
    let x = Series::shifted(ExternalNumber::real(a), 0);
    let ctx = Context::new([Regime::inner(Neutrix::OSLASH)?, Regime::Frozen]);
    match expand(f, &[x, y], &ctx) {
        Ok(s) => Ok(Some(s)),
        Err(Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// A multiplier `lambda` with `dF/d_M x - lambda dg/dx` inside `L` and
/// `dF/d_N y - lambda dg/dy = N(dF/d_N y)`, together with a report on the
/// hypotheses that make `(a, b)` a constrained near-minimizer.
pub fn lagrange_solve(
    f: &Expr,
    g: &Expr,
    point: (&AsymptoticReal, &AsymptoticReal),
    m: Neutrix,
    n: Neutrix,
) -> Result<LagrangeResult> {
    let implicit = implicit_solve(g, point, m, n)?;
    let fx = partial_derivative(f, point, Var::X, m)?.value;
    let fy = partial_derivative(f, point, Var::Y, n)?.value;
    let at = [ExternalNumber::precise(point.0.clone()), ExternalNumber::precise(point.1.clone())];
    let gx = eval(&diff(g, Var::X)?, &at)?;
    let gy = eval(&diff(g, Var::Y)?, &at)?;
    let (Some(gxv), Some(gyv)) = (gx.rep().standard_part(), gy.rep().standard_part()) else {
        return Err(Error::Unsupported("constraint partials must be standard reals".into()));
    };
    if gyv == 0.0 {
        return Err(Error::HypothesisFailed("dg/dy(a, b) is nonzero".into()));
    }
    let quotient = fy.div(&gy)?;
    let lambda = quotient.rep().standard_part().unwrap_or(0.0);
    let mut notes = Vec::new();
    if !quotient.rep().is_standard() {
        notes.push(format!("the quotient {quotient} has no standard representative; lambda is its standard part"));
    }
    let ratio = implicit.gamma_x.div(&implicit.gamma_y)?;
    if implicit.gamma_x.is_neutricial() {
        notes.push("gamma_x is neutricial; the L-formula uses the neutricial product".into());
    }
    let l = fx.neutrix().add(&ratio.mul(&fy).neutrix());
    let residual_x = fx.sub(&ExternalNumber::real(lambda * gxv));
    let residual_y = fy.sub(&ExternalNumber::real(lambda * gyv));
    let certified = ExternalNumber::from_neutrix(l).contains(&residual_x)
        && residual_y == ExternalNumber::from_neutrix(fy.neutrix());

    let mut hypotheses = Vec::new();
    let witness = match strong_diff_witness(f, point, (m, n), Var::X) {
        Ok(w) if w.verified => Verdict::Holds,
        Ok(_) => Verdict::Fails,
        Err(_) => Verdict::Undecided,
    };
    hypotheses.push(("F is strongly (M,N)-differentiable w.r.t. x".to_string(), witness));
    for (name, ok) in &implicit.hypotheses {
        hypotheses.push((name.clone(), if *ok { Verdict::Holds } else { Verdict::Fails }));
    }
    let fab = eval(f, &at)?;
    let yes = |b: bool| if b { Verdict::Holds } else { Verdict::Fails };
    hypotheses.push((format!("L = {l} is stable for M = {m}"), yes(l.is_stable_for(&m))));
    hypotheses.push((format!("L contains N(F(a, b)) = {}", fab.neutrix()), yes(fab.neutrix().is_subset_of(&l))));
    let minimal = match (point.0.standard_part(), point.1.standard_part()) {
        (Some(a0), Some(b0)) if point.0.is_standard() && point.1.is_standard() => {
            match constrained_series(f, g, a0, b0)? {
                Some(s) => {
                    let sd = sides(point.0, [f64::NEG_INFINITY, f64::INFINITY], Some(m))?;
                    verdict_from_series(&s, fab.neutrix(), l, &sd).unwrap_or(Verdict::Undecided)
                }
                None => Verdict::Undecided,
            }
        }
        _ => Verdict::Undecided,
    };
    hypotheses.push(("(a, b) is an (M,N)-local L-minimizer on the constraint".into(), minimal));
    Ok(LagrangeResult {
        lambda,
        l,
        residual_x,
        residual_y,
        certified,
        partials: [fx, fy],
        constraint_partials: [gxv, gyv],
        implicit,
        hypotheses,
        notes,
    })
}
