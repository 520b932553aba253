//! Neutrix derivatives, partial derivatives, strong differentiability and
//! the chain rule.

use super::limit::{limit, ExternalPoint, LimitKind};
use super::rules::{classify, Coef, Regime};
use super::series::{expand, Context, Mono, Series, ORIGIN};
use crate::error::{Error, Result};
use crate::flex::{diff, eval, Expr, Var};
use crate::scale::{AsymptoticReal, ExternalNumber, Neutrix};

#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeResult {
    pub value: ExternalNumber,
    pub m: Neutrix,
    /// Derivative of the representative, including any neutrix it carries.
    pub ordinary: ExternalNumber,
    /// Limits of `N(F(a))/h` and of the neutrix part of `F(a+h)/h`.
    pub singular: [Neutrix; 2],
    pub minimal: bool,
    /// The value equals the sum of the decomposition.
    pub consistent: bool,
    pub warnings: Vec<String>,
}

fn unit(axis: usize) -> Mono {
    let mut m = ORIGIN;
    m[axis] = 1;
    m
}

fn neg_unit(axis: usize) -> Mono {
    let mut m = ORIGIN;
    m[axis] = -1;
    m
}

struct Quotient {
    series: Series,
    at: ExternalNumber,
    regimes: [Regime; 2],
}

fn quotient(f: &Expr, point: &[AsymptoticReal], axis: usize, m: Neutrix) -> Result<Quotient> {
    if point.is_empty() || point.len() > 2 || axis >= point.len() {
        return Err(Error::Invalid("bad point for a derivative".into()));
    }
    if point.len() == 1 && f.uses(Var::Y) {
        return Err(Error::Invalid("expression uses y at a one-dimensional point".into()));
    }
    let mut regimes = [Regime::Frozen; 2];
    regimes[axis] = Regime::outer(m)?;
    if regimes[axis].is_tiny() && !f.is_polynomial() {
        return Err(Error::Unsupported(
            "derivatives at Meps or mueps scale need a polynomial expression".into(),
        ));
    }
    let values: Vec<ExternalNumber> = point.iter().map(|a| ExternalNumber::precise(a.clone())).collect();
    let mut bind = [Series::zero(), Series::zero()];
    for (i, v) in values.iter().enumerate() {
        bind[i] = if i == axis {
            Series::shifted(v.clone(), i)
        } else {
            Series::constant(v.clone())
        };
    }
    let ctx = Context::new(regimes);
    let series = expand(f, &bind, &ctx)?;
    let at = eval(f, &values)?;
    Ok(Quotient { series, at, regimes })
}

/// Derivative along one coordinate with the others frozen.
pub fn derivative_along(f: &Expr, point: &[AsymptoticReal], axis: usize, m: Neutrix) -> Result<DerivativeResult> {
    let q = quotient(f, point, axis, m)?;
    let quot = q.series.sub(&Series::constant(q.at.clone())).shift_mono(neg_unit(axis));
    let (value, minimal) = quot.limit(&q.regimes)?;

    let rep = quotient(&f.representative(), point, axis, m)?;
    let rep_quot = rep.series.sub(&Series::constant(rep.at.clone())).shift_mono(neg_unit(axis));
    let (ordinary, _) = rep_quot.limit(&q.regimes)?;

    let s1 = classify(Coef::Set(q.at.neutrix()), neg_unit(axis), &q.regimes);
    let mut s2 = Neutrix::Zero;
    for (mono, c) in &q.series.exact {
        let own = c.neutrix();
        let from_rep = rep.series.exact.get(mono).map_or(Neutrix::Zero, |r| r.neutrix());
        if own > from_rep {
            let shifted = [mono[0] - unit(axis)[0], mono[1] - unit(axis)[1]];
            s2 = s2.add(&classify(Coef::Set(own), shifted, &q.regimes));
        }
    }
    let sum = ordinary.with_neutrix(ordinary.neutrix().add(&s1).add(&s2));
    let consistent = sum == value;
    let mut warnings = Vec::new();
    let nf = q.at.neutrix();
    if !nf.is_zero() && !nf.is_stable_for(&m) {
        warnings.push(format!("neutrix {nf} of F(a) is not stable for M = {m}"));
    }
    if !minimal {
        warnings.push("remainder terms set the neutrix; it may not be minimal".into());
    }
    Ok(DerivativeResult {
        value,
        m,
        ordinary,
        singular: [s1, s2],
        minimal,
        consistent,
        warnings,
    })
}

/// `D_M F(a)` for a function of `x`.
pub fn neutrix_derivative(f: &Expr, a: &AsymptoticReal, m: Neutrix) -> Result<DerivativeResult> {
    derivative_along(f, std::slice::from_ref(a), 0, m)
}

pub fn partial_derivative(f: &Expr, point: (&AsymptoticReal, &AsymptoticReal), axis: Var, m: Neutrix) -> Result<DerivativeResult> {
    derivative_along(f, &[point.0.clone(), point.1.clone()], axis.index(), m)
}

/// Threshold on `|f''(a)|` for the second-order rule.
pub const C2_THRESHOLD: f64 = 1e-9;

/// `D_M f(a) = f'(a) + (neutrix of f''(a) h)` for an internal `f` with
/// `f''(a)` appreciable enough; at `M = oslash` this is `f'(a) + oslash`.
pub fn c2_rule_derivative(f: &Expr, a: &AsymptoticReal, m: Neutrix) -> Result<DerivativeResult> {
    if !f.is_internal() {
        return Err(Error::Invalid("the second-order rule needs an internal function".into()));
    }
    let d1 = diff(f, Var::X)?;
    let d2 = diff(&d1, Var::X)?;
    let at = [ExternalNumber::precise(a.clone())];
    let f1 = eval(&d1, &at)?;
    let f2 = eval(&d2, &at)?;
    let size = f2.rep().leading().map(|t| (t.coef.abs(), t.exp));
    let q = match size {
        Some((c, q)) if q > 0.into() || c >= C2_THRESHOLD => q,
        _ => return Err(Error::DegenerateSecondDerivative),
    };
    let regimes = [Regime::outer(m)?, Regime::Frozen];
    let n = classify(Coef::Zeroless(q), [1, 0], &regimes);
    let value = f1.with_neutrix(f1.neutrix().add(&n));
    Ok(DerivativeResult {
        value,
        m,
        ordinary: f1,
        singular: [Neutrix::Zero, Neutrix::Zero],
        minimal: true,
        consistent: true,
        warnings: Vec::new(),
    })
}

/// The second-order rule, or the general derivative when `f''(a)` vanishes.
pub fn c2_or_fallback(f: &Expr, a: &AsymptoticReal, m: Neutrix) -> Result<(DerivativeResult, bool)> {
    match c2_rule_derivative(f, a, m) {
        Ok(d) => Ok((d, false)),
        Err(Error::DegenerateSecondDerivative) => Ok((neutrix_derivative(f, a, m)?, true)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongDiffWitness {
    pub partials: [ExternalNumber; 2],
    /// Witnesses in the displacements, written with `x` for `h1` and `y` for `h2`.
    pub alpha: [Expr; 2],
    pub direction: Var,
    pub limits: [ExternalNumber; 2],
    pub verified: bool,
}

fn series_to_expr(s: &Series) -> Result<Expr> {
    if !s.is_exact() {
        return Err(Error::WitnessNotFound("defect has remainder terms".into()));
    }
    let mut out: Option<Expr> = None;
    for (m, c) in &s.exact {
        let mut t: Option<Expr> = None;
        for (i, k) in m.iter().enumerate() {
            let v = if i == 0 { Expr::x() } else { Expr::y() };
            if *k != 0 {
                let p = if *k == 1 { v } else { Expr::pow(v, *k) };
                t = Some(match t {
                    None => p,
                    Some(acc) => Expr::mul(acc, p),
                });
            }
        }
        let t = match (t, c.as_standard()) {
            (None, _) => Expr::Const(c.clone()),
            (Some(p), Some(v)) if v == 1.0 && c.is_precise() => p,
            (Some(p), Some(v)) if v == -1.0 && c.is_precise() => Expr::neg(p),
            (Some(p), _) => Expr::mul(Expr::Const(c.clone()), p),
        };
        out = Some(match out {
            None => t,
            Some(acc) => Expr::add(acc, t),
        });
    }
    Ok(out.unwrap_or_else(|| Expr::c(0.0)))
}

/// Split the defect `F(a+h) - F(a) - d1 h1 - d2 h2` as `alpha1 h1 + alpha2 h2`
/// and check the mixed limits of the witnesses.
pub fn strong_diff_witness(
    f: &Expr,
    point: (&AsymptoticReal, &AsymptoticReal),
    m: (Neutrix, Neutrix),
    direction: Var,
) -> Result<StrongDiffWitness> {
    let d1 = partial_derivative(f, point, Var::X, m.0)?.value;
    let d2 = partial_derivative(f, point, Var::Y, m.1)?.value;
    let kind = match direction {
        Var::X => LimitKind::MixedXOuterYInner,
        Var::Y => LimitKind::MixedXInnerYOuter,
    };
    let p = ExternalPoint::two(point.0.clone(), point.1.clone(), m.0, m.1);
    let regimes = super::limit::regimes(&p, kind)?;
    let ctx = Context::new(regimes);
    let values = p.center_values();
    let bind = [Series::shifted(values[0].clone(), 0), Series::shifted(values[1].clone(), 1)];
    let at = eval(f, &values)?;
    let defect = expand(f, &bind, &ctx)?
        .sub(&Series::constant(at))
        .sub(&Series::monomial(d1.clone(), [1, 0]))
        .sub(&Series::monomial(d2.clone(), [0, 1]));
    if !defect.is_exact() {
        return Err(Error::WitnessNotFound("defect has remainder terms".into()));
    }
    let mut parts = [Series::zero(), Series::zero()];
    for (mono, c) in &defect.exact {
        let axis = if mono[0] >= 1 {
            0
        } else if mono[1] >= 1 {
            1
        } else {
            direction.index()
        };
        let mut down = *mono;
        down[axis] -= 1;
        parts[axis] = parts[axis].add(&Series::monomial(c.clone(), down));
    }
    let rebuilt = parts[0].shift_mono([1, 0]).add(&parts[1].shift_mono([0, 1]));
    let identity = rebuilt.exact.len() == defect.exact.len()
        && rebuilt.exact.iter().all(|(k, v)| defect.exact.get(k) == Some(v));
    let alpha = [series_to_expr(&parts[0])?, series_to_expr(&parts[1])?];
    let mut limits = [ExternalNumber::zero(), ExternalNumber::zero()];
    let mut verified = identity;
    for i in 0..2 {
        let target = ExternalNumber::from_neutrix([&d1, &d2][i].neutrix());
        match limit(&alpha[i], &ExternalPoint::two(AsymptoticReal::zero(), AsymptoticReal::zero(), m.0, m.1), kind) {
            Ok(r) => {
                verified &= r.value == target;
                limits[i] = r.value;
            }
            Err(_) => {
                verified = false;
                limits[i] = ExternalNumber::from_neutrix(Neutrix::Full);
            }
        }
    }
    Ok(StrongDiffWitness {
        partials: [d1, d2],
        alpha,
        direction,
        limits,
        verified,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InclusionReport {
    pub name: String,
    pub lhs: ExternalNumber,
    pub rhs: ExternalNumber,
    /// `lhs ⊆ rhs` (or equality for laws stated as equalities).
    pub holds: bool,
    pub hypotheses: Vec<(String, bool)>,
}

fn outer_continuous(g: &Expr, a: &AsymptoticReal, m: Neutrix) -> Result<bool> {
    let p = ExternalPoint::one(a.clone(), m);
    super::limit::continuity_check(g, &p, LimitKind::Outer, Neutrix::Zero)
}

/// Sum, scalar, product and reciprocal laws for `D_M` at `a`.
pub fn derivative_op_laws(f: &Expr, g: &Expr, c: f64, a: &AsymptoticReal, m: Neutrix) -> Result<Vec<InclusionReport>> {
    let at = [ExternalNumber::precise(a.clone())];
    let df = neutrix_derivative(f, a, m)?.value;
    let dg = neutrix_derivative(g, a, m)?.value;
    let fa = eval(f, &at)?;
    let ga = eval(g, &at)?;
    let mut out = Vec::new();

    let lhs = neutrix_derivative(&Expr::add(f.clone(), g.clone()), a, m)?.value;
    let rhs = df.add(&dg);
    out.push(InclusionReport {
        name: "sum".into(),
        holds: rhs.contains(&lhs),
        lhs,
        rhs,
        hypotheses: vec![],
    });

    let lhs = neutrix_derivative(&Expr::mul(Expr::c(c), f.clone()), a, m)?.value;
    let rhs = df.scale(c);
    out.push(InclusionReport {
        name: "scalar".into(),
        holds: lhs == rhs,
        lhs,
        rhs,
        hypotheses: vec![],
    });

    let f_cont = outer_continuous(f, a, m)?;
    let g_cont = outer_continuous(g, a, m)?;
    if !fa.is_zeroless() || !ga.is_zeroless() {
        return Err(Error::SideCondition("F(a) and G(a) zeroless".into()));
    }
    let lhs = neutrix_derivative(&Expr::mul(f.clone(), g.clone()), a, m)?.value;
    let rhs = df.mul(&ga).add(&fa.mul(&dg));
    out.push(InclusionReport {
        name: "product".into(),
        holds: rhs.contains(&lhs),
        lhs,
        rhs,
        hypotheses: vec![
            ("F outer continuous at a".into(), f_cont),
            ("G outer continuous at a".into(), g_cont),
            ("F(a), G(a) zeroless".into(), true),
        ],
    });

    let lhs = neutrix_derivative(&Expr::div(Expr::c(1.0), g.clone()), a, m)?.value;
    let rhs = dg.neg().div(&ga.mul(&ga))?;
    out.push(InclusionReport {
        name: "reciprocal".into(),
        holds: rhs.contains(&lhs),
        lhs,
        rhs,
        hypotheses: vec![("G outer continuous at a".into(), g_cont), ("G(a) zeroless".into(), true)],
    });
    Ok(out)
}

/// Check `D_M(F∘φ)(a) ⊆ D_N F(φ(a)) · D_M φ(a)`.
pub fn chain_rule_verify(f: &Expr, phi: &Expr, a: &AsymptoticReal, m: Neutrix, n: Neutrix) -> Result<InclusionReport> {
    if !phi.is_internal() {
        return Err(Error::SideCondition("phi must be real-valued".into()));
    }
    let at = [ExternalNumber::precise(a.clone())];
    let b = eval(phi, &at)?;
    let dphi = neutrix_derivative(phi, a, m)?.value;
    let mut hyps = Vec::new();
    let lim = limit(phi, &ExternalPoint::one(a.clone(), m), LimitKind::Outer)?.value;
    let lim_ok = lim == b.with_neutrix(n);
    hyps.push((format!("lim phi = phi(a) + {n}"), lim_ok));
    let zeroless = dphi.is_zeroless();
    hyps.push(("D_M phi(a) zeroless".into(), zeroless));
    let outside = zeroless && dphi.order().is_some_and(|q| n.is_subset_of(&m.scale(q)));
    hyps.push((format!("phi(x) outside phi(a) + {n} near a + {m}"), outside));
    if let Some((name, _)) = hyps.iter().find(|(_, ok)| !ok) {
        return Err(Error::SideCondition(name.clone()));
    }
    let comp = f.substitute(Var::X, phi);
    let lhs = neutrix_derivative(&comp, a, m)?.value;
    let df = neutrix_derivative(f, b.rep(), n)?.value;
    let rhs = df.mul(&dphi);
    Ok(InclusionReport {
        name: "chain rule".into(),
        holds: rhs.contains(&lhs),
        lhs,
        rhs,
        hypotheses: hyps,
    })
}

/// Two-variable chain rule for `F(φ1(x), φ2(x))` at `a`, with `F` strongly
/// differentiable at `b = (φ1(a), φ2(a))`.
pub fn chain_rule_verify_2d(
    f: &Expr,
    phi: (&Expr, &Expr),
    a: &AsymptoticReal,
    m: Neutrix,
    n: (Neutrix, Neutrix),
) -> Result<InclusionReport> {
    let at = [ExternalNumber::precise(a.clone())];
    let b1 = eval(phi.0, &at)?;
    let b2 = eval(phi.1, &at)?;
    let dphi1 = neutrix_derivative(phi.0, a, m)?.value;
    let dphi2 = neutrix_derivative(phi.1, a, m)?.value;
    let mut hyps = Vec::new();
    let strong = strong_diff_witness(f, (b1.rep(), b2.rep()), n, Var::X)?;
    hyps.push(("F strongly differentiable w.r.t. x".into(), strong.verified));
    hyps.push(("D_M phi1(a) zeroless".into(), dphi1.is_zeroless()));
    for (name, phi_i, b_i, n_i) in [("phi1", phi.0, &b1, n.0), ("phi2", phi.1, &b2, n.1)] {
        let lim = limit(phi_i, &ExternalPoint::one(a.clone(), m), LimitKind::Outer)?.value;
        hyps.push((format!("lim {name} inside {name}(a) + {n_i}"), b_i.with_neutrix(n_i).contains(&lim)));
    }
    if let Some((name, _)) = hyps.iter().find(|(_, ok)| !ok) {
        return Err(Error::SideCondition(name.clone()));
    }
    let comp = f.map_vars(&|v| Some(if v == Var::X { phi.0.clone() } else { phi.1.clone() }));
    let lhs = neutrix_derivative(&comp, a, m)?.value;
    let rhs = strong.partials[0].mul(&dphi1).add(&strong.partials[1].mul(&dphi2));
    Ok(InclusionReport {
        name: "two-variable chain rule".into(),
        holds: rhs.contains(&lhs),
        lhs,
        rhs,
        hypotheses: hyps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse_expr;

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    fn d(src: &str, a: f64, m: &str) -> DerivativeResult {
        neutrix_derivative(&parse_expr(src).unwrap(), &AsymptoticReal::constant(a), m.parse().unwrap()).unwrap()
    }

    #[test]
    fn anchors() {
        for c in [0.0, 1.0, -3.0] {
            let r = d("x^2 + oslash", c, "oslash");
            assert_eq!(r.value, ExternalNumber::real(2.0 * c).with_neutrix(Neutrix::OSLASH));
            assert!(r.consistent);
        }
        assert_eq!(d("x + x*oslash", 0.0, "oslash").value, en("1 + oslash"));
        assert_eq!(d("saw(x)", 0.0, "oslash").value, en("eps*pounds"));
        assert_eq!(d("saw(x)", 0.0, "eps*pounds").value, en("oslash"));
        assert_eq!(d("exp(x)", 0.0, "oslash").value, en("1 + oslash"));
    }

    #[test]
    fn decomposition_parts() {
        let r = d("x + x*oslash", 0.0, "oslash");
        assert_eq!(r.ordinary, en("1"));
        assert_eq!(r.singular, [Neutrix::Zero, Neutrix::OSLASH]);
        let r = d("x^2 + oslash", 1.0, "oslash");
        assert_eq!(r.singular[0], Neutrix::OSLASH);
    }

    #[test]
    fn second_order_rule() {
        let a = AsymptoticReal::constant(1.0);
        let r = c2_rule_derivative(&parse_expr("x^2").unwrap(), &a, Neutrix::OSLASH).unwrap();
        assert_eq!(r.value, en("2 + oslash"));
        let lin = parse_expr("x").unwrap();
        assert_eq!(c2_rule_derivative(&lin, &a, Neutrix::OSLASH), Err(Error::DegenerateSecondDerivative));
        let (r, fell_back) = c2_or_fallback(&lin, &a, Neutrix::OSLASH).unwrap();
        assert!(fell_back);
        assert_eq!(r.value, en("1"));
    }

    #[test]
    fn partials_and_witness() {
        let f = parse_expr("x + y^2 + oslash").unwrap();
        let one = AsymptoticReal::constant(1.0);
        let p = (&one, &one);
        assert_eq!(partial_derivative(&f, p, Var::X, Neutrix::OSLASH).unwrap().value, en("1 + oslash"));
        assert_eq!(partial_derivative(&f, p, Var::Y, Neutrix::OSLASH).unwrap().value, en("2 + oslash"));
        let w = strong_diff_witness(&f, p, (Neutrix::OSLASH, Neutrix::OSLASH), Var::X).unwrap();
        assert!(w.verified);
        assert_eq!(w.alpha[0].to_string(), "oslash*x^-1 + oslash");
        assert_eq!(w.alpha[1].to_string(), "oslash + y");
        let w = strong_diff_witness(&f, p, (Neutrix::OSLASH, Neutrix::OSLASH), Var::Y).unwrap();
        assert!(w.verified);
        assert_eq!(w.alpha[0].to_string(), "oslash");
        assert_eq!(w.alpha[1].to_string(), "oslash*y^-1 + oslash + y");
    }

    #[test]
    fn chain_rule() {
        let f = parse_expr("x + oslash").unwrap();
        let phi = parse_expr("2*x").unwrap();
        let r = chain_rule_verify(&f, &phi, &AsymptoticReal::constant(1.0), Neutrix::OSLASH, Neutrix::OSLASH).unwrap();
        assert!(r.holds);
        assert_eq!(r.lhs, en("2 + oslash"));
        let sq = parse_expr("x^2").unwrap();
        assert!(matches!(
            chain_rule_verify(&f, &sq, &AsymptoticReal::zero(), Neutrix::OSLASH, Neutrix::OSLASH),
            Err(Error::SideCondition(_))
        ));
    }

    #[test]
    fn laws() {
        let f = parse_expr("x + oslash").unwrap();
        let g = parse_expr("x^2").unwrap();
        let r = derivative_op_laws(&f, &g, 3.0, &AsymptoticReal::constant(1.0), Neutrix::OSLASH).unwrap();
        assert!(r.iter().all(|l| l.holds), "{r:?}");
    }
}
