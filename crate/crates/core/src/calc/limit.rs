//! Outer, inner and mixed limits at external points.

use super::rules::{Mode, Regime};
use super::series::{expand, Context, Series};
use crate::error::{Error, Result};
use crate::flex::{eval, eval_f64, Expr, ExternalInterval, Var};
use crate::scale::{exp, exp_frac, AsymptoticReal, Exp, ExternalNumber, Idem, Neutrix};
use std::fmt;

/// A point `a_i + M_i` in one or two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalPoint {
    pub centers: Vec<AsymptoticReal>,
    pub neutrices: Vec<Neutrix>,
}

impl ExternalPoint {
    pub fn one(a: AsymptoticReal, m: Neutrix) -> Self {
        ExternalPoint {
            centers: vec![a],
            neutrices: vec![m],
        }
    }

    pub fn two(a: AsymptoticReal, b: AsymptoticReal, m1: Neutrix, m2: Neutrix) -> Self {
        ExternalPoint {
            centers: vec![a, b],
            neutrices: vec![m1, m2],
        }
    }

    pub fn real(a: f64, m: Neutrix) -> Self {
        ExternalPoint::one(AsymptoticReal::constant(a), m)
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    pub fn center_values(&self) -> Vec<ExternalNumber> {
        self.centers.iter().map(|a| ExternalNumber::precise(a.clone())).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.dim() == 0 || self.dim() > 2 || self.neutrices.len() != self.dim() {
            return Err(Error::Invalid("a point has one or two coordinates".into()));
        }
        if self.neutrices.contains(&Neutrix::Full) {
            return Err(Error::Invalid("the neutrix of a point cannot be R".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Outer,
    Inner,
    /// `x` outer, `y` inner.
    MixedXOuterYInner,
    /// `x` inner, `y` outer.
    MixedXInnerYOuter,
}

impl LimitKind {
    pub fn modes(self) -> [Mode; 2] {
        match self {
            LimitKind::Outer => [Mode::Outer, Mode::Outer],
            LimitKind::Inner => [Mode::Inner, Mode::Inner],
            LimitKind::MixedXOuterYInner => [Mode::Outer, Mode::Inner],
            LimitKind::MixedXInnerYOuter => [Mode::Inner, Mode::Outer],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimitKind::Outer => "outer",
            LimitKind::Inner => "inner",
            LimitKind::MixedXOuterYInner => "mixed-xo-yi",
            LimitKind::MixedXInnerYOuter => "mixed-xi-yo",
        }
    }
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitResult {
    pub value: ExternalNumber,
    pub kind: LimitKind,
    /// The neutrix is the least representable one admitting the limit.
    pub minimal: bool,
    /// Found by numeric extrapolation rather than term rules.
    pub numeric: bool,
}

pub fn regimes(p: &ExternalPoint, kind: LimitKind) -> Result<[Regime; 2]> {
    let modes = kind.modes();
    let mut r = [Regime::Frozen; 2];
    for i in 0..p.dim() {
        r[i] = Regime::new(p.neutrices[i], modes[i])?;
    }
    Ok(r)
}

/// Series of `f` at `a + h`.
pub fn expand_at(f: &Expr, p: &ExternalPoint, ctx: &Context) -> Result<Series> {
    p.validate()?;
    if p.dim() == 1 && f.uses(Var::Y) {
        return Err(Error::Invalid("expression uses y at a one-dimensional point".into()));
    }
    let mut bind = [Series::zero(), Series::zero()];
    for (i, a) in p.centers.iter().enumerate() {
        bind[i] = Series::shifted(ExternalNumber::precise(a.clone()), i);
    }
    expand(f, &bind, ctx)
}

pub fn limit(f: &Expr, p: &ExternalPoint, kind: LimitKind) -> Result<LimitResult> {
    p.validate()?;
    let r = regimes(p, kind)?;
    if r.iter().any(Regime::is_tiny) && !f.is_polynomial() {
        return Err(Error::Unsupported(
            "limits at Meps or mueps scale need a polynomial expression".into(),
        ));
    }
    let ctx = Context::new(r);
    match expand_at(f, p, &ctx).and_then(|s| s.limit(&r)) {
        Ok((value, minimal)) => Ok(LimitResult {
            value,
            kind,
            minimal,
            numeric: false,
        }),
        Err(Error::Unsupported(why)) => {
            if p.dim() == 1 && p.neutrices[0].is_zero() && f.is_internal() {
                numeric_limit(f, &p.centers[0]).map(|v| LimitResult {
                    value: ExternalNumber::real(v),
                    kind,
                    minimal: true,
                    numeric: true,
                })
            } else {
                Err(Error::Unsupported(why))
            }
        }
        Err(e) => Err(e),
    }
}

pub fn outer_limit(f: &Expr, p: &ExternalPoint) -> Result<LimitResult> {
    limit(f, p, LimitKind::Outer)
}

pub fn inner_limit(f: &Expr, p: &ExternalPoint) -> Result<LimitResult> {
    limit(f, p, LimitKind::Inner)
}

pub fn mixed_limit(f: &Expr, p: &ExternalPoint, kind: LimitKind) -> Result<LimitResult> {
    if p.dim() != 2 || matches!(kind, LimitKind::Outer | LimitKind::Inner) {
        return Err(Error::Invalid("mixed limits need two coordinates and a mixed mode".into()));
    }
    limit(f, p, kind)
}

/// Ordinary limit of an internal function of one variable at a standard
/// point by Richardson extrapolation on `h = 2^-k / 10` from both sides.
pub fn numeric_limit(f: &Expr, a: &AsymptoticReal) -> Result<f64> {
    let a = a
        .standard_part()
        .filter(|_| a.is_standard())
        .ok_or_else(|| Error::Unsupported("numeric limits need a standard point".into()))?;
    let side = |s: f64| -> Result<f64> {
        const ROWS: usize = 14;
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(ROWS);
        for k in 0..ROWS {
            let h = s * 0.1 * 0.5f64.powi(k as i32);
            let mut row = vec![eval_f64(f, [a + h, 0.0], 0.0)];
            for j in 1..=k {
                let prev = &table[k - 1];
                let p = 2f64.powi(j as i32);
                row.push((p * row[j - 1] - prev[j - 1]) / (p - 1.0));
            }
            if k >= 2 {
                let now = row[k];
                let before = table[k - 1][k - 1];
                if now.is_finite() && (now - before).abs() <= 1e-9 * now.abs().max(1.0) {
                    return Ok(now);
                }
            }
            table.push(row);
        }
        Err(Error::NonStabilizing("extrapolation did not settle".into()))
    };
    let right = side(1.0)?;
    let left = side(-1.0)?;
    if (right - left).abs() > 1e-7 * right.abs().max(1.0) {
        return Err(Error::Divergent(format!("one-sided limits {left} and {right} differ")));
    }
    Ok(0.5 * (left + right))
}

/// Whether the limit equals the value at the center, each widened by `tol`.
pub fn continuity_check(f: &Expr, p: &ExternalPoint, kind: LimitKind, tol: Neutrix) -> Result<bool> {
    let lim = limit(f, p, kind)?.value;
    let val = eval(f, &p.center_values())?;
    let widen = |v: &ExternalNumber| v.with_neutrix(v.neutrix().add(&tol));
    Ok(widen(&lim) == widen(&val))
}

/// Displacement just outside `M`: every box with radius above `M` reaches it.
fn outside_step(m: Neutrix) -> Exp {
    match m {
        Neutrix::Scaled(q, Idem::Oslash) => q,
        Neutrix::Scaled(q, Idem::Pounds) => q - exp_frac(1, 64),
        _ => exp(16),
    }
}

/// Whether every box with radii just above the `M_i` meets the domain
/// outside the external point.
pub fn is_m_accumulation(domain: &[ExternalInterval], p: &ExternalPoint) -> bool {
    if domain.len() != p.dim() || p.validate().is_err() {
        return false;
    }
    let scale = 1e-6;
    let outside: Vec<Vec<AsymptoticReal>> = (0..p.dim())
        .map(|i| {
            let t = AsymptoticReal::monomial(scale, outside_step(p.neutrices[i]));
            vec![p.centers[i].add(&t), p.centers[i].sub(&t)]
        })
        .collect();
    let hits = |i: usize, pts: &[AsymptoticReal]| pts.iter().any(|x| domain[i].contains(x));
    (0..p.dim()).any(|i| {
        hits(i, &outside[i])
            && (0..p.dim()).filter(|j| *j != i).all(|j| {
                let mut near = outside[j].clone();
                near.push(p.centers[j].clone());
                hits(j, &near)
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse_expr;

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    fn lim1(src: &str, a: f64, m: &str, kind: LimitKind) -> ExternalNumber {
        let f = parse_expr(src).unwrap();
        limit(&f, &ExternalPoint::real(a, m.parse().unwrap()), kind).unwrap().value
    }

    #[test]
    fn outer_examples() {
        assert_eq!(lim1("oslash/x", 0.0, "oslash", LimitKind::Outer), en("oslash"));
        assert_eq!(lim1("x^2 + oslash", 1.0, "oslash", LimitKind::Outer), en("1 + oslash"));
        assert_eq!(lim1("saw(x)/x", 0.0, "eps*pounds", LimitKind::Outer), en("oslash"));
    }

    #[test]
    fn inner_examples() {
        assert_eq!(lim1("x^2", 0.0, "oslash", LimitKind::Inner), en("oslash"));
        assert_eq!(lim1("x^2 + oslash", 1.0, "oslash", LimitKind::Inner), en("1 + oslash"));
        let f = parse_expr("oslash/x").unwrap();
        assert!(inner_limit(&f, &ExternalPoint::real(0.0, Neutrix::OSLASH)).is_err());
    }

    #[test]
    fn mixed_examples() {
        let p = ExternalPoint::two(
            AsymptoticReal::zero(),
            AsymptoticReal::zero(),
            Neutrix::OSLASH,
            Neutrix::OSLASH,
        );
        let m = |s: &str, k| mixed_limit(&parse_expr(s).unwrap(), &p, k).unwrap().value;
        assert_eq!(m("oslash + oslash/x", LimitKind::MixedXOuterYInner), en("oslash"));
        assert_eq!(m("y + oslash", LimitKind::MixedXOuterYInner), en("oslash"));
        assert_eq!(m("y + oslash + oslash/y", LimitKind::MixedXInnerYOuter), en("oslash"));
    }

    #[test]
    fn numeric_fallback() {
        let f = parse_expr("(sqrt(1 + x) - 1)/x").unwrap();
        let r = limit(&f, &ExternalPoint::real(0.0, Neutrix::Zero), LimitKind::Outer).unwrap();
        assert!(!r.numeric);
        assert!((r.value.rep().standard_part().unwrap() - 0.5).abs() < 1e-12);
        let g = parse_expr("x*ln(x^2)").unwrap();
        let r = limit(&g, &ExternalPoint::real(0.0, Neutrix::Zero), LimitKind::Outer);
        assert!(r.is_err() || r.unwrap().numeric);
    }

    #[test]
    fn continuity() {
        let f = parse_expr("x^2 + oslash").unwrap();
        assert!(continuity_check(&f, &ExternalPoint::real(1.0, Neutrix::OSLASH), LimitKind::Outer, Neutrix::Zero).unwrap());
        let s = parse_expr("saw(x)").unwrap();
        let at0 = ExternalPoint::real(0.0, Neutrix::Zero);
        assert!(continuity_check(&s, &at0, LimitKind::Outer, Neutrix::OSLASH).unwrap());
        let at0 = ExternalPoint::real(0.0, Neutrix::OSLASH);
        assert!(!continuity_check(&s, &at0, LimitKind::Outer, Neutrix::Zero).unwrap());
    }

    #[test]
    fn accumulation() {
        let p = ExternalPoint::real(0.0, Neutrix::OSLASH);
        assert!(is_m_accumulation(&[ExternalInterval::reals(-1.0, 1.0)], &p));
        assert!(!is_m_accumulation(&[ExternalInterval::neutrix(Neutrix::OSLASH)], &p));
        let q = ExternalPoint::two(AsymptoticReal::zero(), AsymptoticReal::zero(), Neutrix::OSLASH, Neutrix::OSLASH);
        let unit = ExternalInterval::reals(0.0, 1.0);
        assert!(is_m_accumulation(&[unit.clone(), unit], &q));
    }
}
