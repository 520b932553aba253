//! Implicit functions `g(x, f(x)) = 0` near a point with an imprecise
//! nonsingularity condition.

use crate::calc::{continuity_check, inner_limit, partial_derivative, ExternalPoint, LimitKind};
use crate::error::{Error, Result};
use crate::flex::{diff, eval, eval_f64, eval_jet, Expr, Jet, Var};
use crate::scale::{AsymptoticReal, ExternalNumber, Neutrix};

/// Points on each side of the witness grid.
const HALF_GRID: usize = 20;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitResult {
    pub gamma_x: ExternalNumber,
    pub gamma_y: ExternalNumber,
    /// Half-width of the interval where the witness was solved.
    pub delta: f64,
    pub derivative_bound: ExternalNumber,
    pub inner_continuity: bool,
    pub hypotheses: Vec<(String, bool)>,
    /// `(x, f(x))` on a grid over `[a - delta, a + delta]`.
    pub witness: Vec<(f64, f64)>,
    pub max_residual: f64,
    /// Central difference of the witness at `a`.
    pub slope: f64,
}

fn standard(v: &AsymptoticReal) -> Result<f64> {
    v.standard_part()
        .ok_or_else(|| Error::Unsupported("the numeric witness needs a limited point".into()))
}

fn bisect(g: &Expr, x: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let f = |y: f64| eval_f64(g, [x, y], 0.0);
    let (mut flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() < 1e-15 * (1.0 + mid.abs()) {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Distance from `(a, b)` to the nearest sign change of `gy`, probed on
/// squares of doubling radius.
fn singular_distance(gy: &Expr, a: f64, b: f64) -> f64 {
    let s0 = eval_f64(gy, [a, b], 0.0).signum();
    let mut r = 1.0 / 1024.0;
    while r <= 8.0 {
        for i in 0..256 {
            let u = -1.0 + 2.0 * i as f64 / 255.0;
            for (dx, dy) in [(u, -1.0), (u, 1.0), (-1.0, u), (1.0, u)] {
                let v = eval_f64(gy, [a + r * dx, b + r * dy], 0.0);
                if !v.is_finite() || v * s0 <= 0.0 {
                    return r;
                }
            }
        }
        r *= 2.0;
    }
    8.0
}

type Witness = (Vec<(f64, f64)>, f64);

fn solve_grid(g: &Expr, a: f64, b: f64, delta: f64, d: f64) -> Option<Witness> {
    let mut pts = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..=2 * HALF_GRID {
        let x = a - delta + delta * i as f64 / HALF_GRID as f64;
        let y = bisect(g, x, b - d, b + d)?;
        let r = eval_f64(g, [x, y], 0.0).abs();
        if r >= RESIDUAL_TOL {
            return None;
        }
        worst = worst.max(r);
        pts.push((x, y));
    }
    Some((pts, worst))
}

/// Taylor coefficients of the implicit function at a standard `a`, by Newton
/// steps on truncated series. `g` must have standard constants.
pub fn implicit_jet(g: &Expr, a: f64, b: f64, degree: usize) -> Option<Jet> {
    let gy = diff(g, Var::Y).ok()?;
    let x = Jet::variable(a, degree);
    let mut y = Jet::constant(b, degree);
    let mut steps = 2;
    let mut n = 1;
    while n <= degree {
        n *= 2;
        steps += 1;
    }
    for _ in 0..steps {
        let gv = eval_jet(g, [&x, &y], 0.0)?;
        let gyv = eval_jet(&gy, [&x, &y], 0.0)?;
        y = y.sub(&gv.div(&gyv)?);
    }
    Some(y)
}

/// Hypotheses of the implicit function theorem at `(a, b)` for the box
/// `(a + M) x (b + N)`, the bound `-gamma_x/gamma_y` on `D_M f(a)`, and a
/// numeric witness of `f`.
pub fn implicit_solve(g: &Expr, point: (&AsymptoticReal, &AsymptoticReal), m: Neutrix, n: Neutrix) -> Result<ImplicitResult> {
    if !g.is_internal() {
        return Err(Error::Invalid("the constraint must be an internal function".into()));
    }
    let at = [ExternalNumber::precise(point.0.clone()), ExternalNumber::precise(point.1.clone())];
    let g0 = eval(g, &at)?;
    if g0.rep().terms().iter().any(|t| t.coef.abs() > RESIDUAL_TOL) {
        return Err(Error::HypothesisFailed(format!("g(a, b) = 0 (found {g0})")));
    }
    let dgy = partial_derivative(g, point, Var::Y, n)?.value;
    if !dgy.is_zeroless() {
        return Err(Error::HypothesisFailed(format!("dg/d_N y(a, b) is zeroless (found {dgy})")));
    }
    let big_a = dgy.neutrix();
    let mut hypotheses = Vec::new();
    let stable = n.is_stable_for(&big_a);
    hypotheses.push((format!("N = {n} is stable for A = {big_a}"), stable));
    if !stable {
        return Err(Error::HypothesisFailed(format!("N = {n} is stable for A = {big_a}")));
    }
    let gx = diff(g, Var::X)?;
    let gy = diff(g, Var::Y)?;
    let boxp = ExternalPoint::two(point.0.clone(), point.1.clone(), m, n);
    let gamma_x = inner_limit(&gx, &boxp)?.value;
    let gamma_y = inner_limit(&gy, &boxp)?.value;
    let cont_g = continuity_check(g, &boxp, LimitKind::Inner, big_a)?;
    let cont_gy = continuity_check(&gy, &boxp, LimitKind::Inner, big_a)?;
    hypotheses.push(("g is (M,N)xA-inner continuous".into(), cont_g));
    hypotheses.push(("dg/dy is (M,N)xA-inner continuous".into(), cont_gy));
    hypotheses.push((format!("gamma_y = {gamma_y} is zeroless"), gamma_y.is_zeroless()));
    if !gamma_y.is_zeroless() {
        return Err(Error::HypothesisFailed(format!("gamma_y is zeroless (found {gamma_y})")));
    }
    let ratio = gamma_x.div(&gamma_y)?;
    let derivative_bound = ratio.neg();
    let inner_continuity =
        gamma_x.is_zeroless() && ratio.mul(&ExternalNumber::from_neutrix(m)).neutrix().is_subset_of(&n);

    let (a0, b0) = (standard(point.0)?, standard(point.1)?);
    let reach = 0.25 * singular_distance(&gy, a0, b0);
    let mut delta = 1.0 / 1024.0;
    let mut best: Option<(f64, Witness)> = None;
    while delta <= reach {
        match solve_grid(g, a0, b0, delta, reach) {
            Some(w) => best = Some((delta, w)),
            None => break,
        }
        delta *= 2.0;
    }
    let Some((delta, (witness, max_residual))) = best else {
        return Err(Error::NoSignChange(format!(
            "g(x, b - d) and g(x, b + d) do not bracket a root for d = {reach}"
        )));
    };
    let h = 1e-5_f64.min(delta / 4.0);
    let y_plus = bisect(g, a0 + h, b0 - reach, b0 + reach);
    let y_minus = bisect(g, a0 - h, b0 - reach, b0 + reach);
    let slope = match (y_plus, y_minus) {
        (Some(p), Some(q)) => (p - q) / (2.0 * h),
        _ => f64::NAN,
    };
    Ok(ImplicitResult {
        gamma_x,
        gamma_y,
        delta,
        derivative_bound,
        inner_continuity,
        hypotheses,
        witness,
        max_residual,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse_expr;

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    #[test]
    fn circle_at_top() {
        let g = parse_expr("1 - x^2 - y^2").unwrap();
        let r = implicit_solve(&g, (&AsymptoticReal::zero(), &AsymptoticReal::constant(1.0)), Neutrix::OSLASH, Neutrix::OSLASH)
            .unwrap();
        assert_eq!(r.gamma_x, en("oslash"));
        assert_eq!(r.gamma_y, en("-2 + oslash"));
        assert_eq!(r.derivative_bound, en("oslash"));
        assert!(!r.inner_continuity);
        assert!(r.max_residual < 1e-9);
        assert!(r.delta > 0.1 && r.delta <= 0.25, "{}", r.delta);
        assert!(r.slope.abs() < 1e-6);
        assert!(r.hypotheses.iter().all(|h| h.1));
    }

    #[test]
    fn circle_at_sixty_degrees() {
        let g = parse_expr("1 - x^2 - y^2").unwrap();
        let b = AsymptoticReal::constant(3f64.sqrt() / 2.0);
        let r = implicit_solve(&g, (&AsymptoticReal::constant(0.5), &b), Neutrix::OSLASH, Neutrix::OSLASH).unwrap();
        assert_eq!(r.gamma_x, en("-1 + oslash"));
        assert_eq!(r.gamma_y, ExternalNumber::new(AsymptoticReal::constant(-(3f64.sqrt())), Neutrix::OSLASH));
        let bound = ExternalNumber::new(AsymptoticReal::constant(-1.0 / 3f64.sqrt()), Neutrix::OSLASH);
        assert_eq!(r.derivative_bound, bound);
        assert!(r.inner_continuity);
        assert!((r.slope + 1.0 / 3f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn singular_point() {
        let g = parse_expr("1 - x^2 - y^2").unwrap();
        let e = implicit_solve(&g, (&AsymptoticReal::constant(1.0), &AsymptoticReal::zero()), Neutrix::OSLASH, Neutrix::OSLASH);
        assert!(matches!(e, Err(Error::HypothesisFailed(_))), "{e:?}");
    }

    #[test]
    fn jet_of_circle() {
        let g = parse_expr("1 - x^2 - y^2").unwrap();
        let j = implicit_jet(&g, 0.0, 1.0, 6).unwrap();
        // sqrt(1 - x^2) = 1 - x^2/2 - x^4/8 - x^6/16
        for (k, c) in [(0, 1.0), (1, 0.0), (2, -0.5), (3, 0.0), (4, -0.125), (6, -0.0625)] {
            assert!((j.c[k] - c).abs() < 1e-12, "coefficient {k}: {}", j.c[k]);
        }
    }
}
