//! Expansions of flexible functions around an external point in powers of
//! the displacements `h1`, `h2`.
//!
//! A series carries exact coefficients (external numbers) and bounded
//! remainder terms. A bounded entry `(k, q)` stands for some term whose size
//! is at most `C * eps^q * |h1|^k1 * |h2|^k2` with `C` standard.

use super::rules::{classify, Coef, Regime};
use crate::error::{Error, Result};
use crate::flex::{taylor_at, Expr, Prim};
use crate::scale::{AsymptoticReal, Exp, ExternalNumber, Neutrix};
use num_traits::Zero;
use std::collections::BTreeMap;

pub type Mono = [i32; 2];

pub const ORIGIN: Mono = [0, 0];
/// Degree of geometric and Taylor expansions.
pub const DEFAULT_DEGREE: usize = 6;
const MAX_TERMS: usize = 4000;

fn madd(a: Mono, b: Mono) -> Mono {
    [a[0] + b[0], a[1] + b[1]]
}

fn is_nothing(c: &ExternalNumber) -> bool {
    c.is_neutricial() && c.neutrix().is_zero()
}

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub exact: BTreeMap<Mono, ExternalNumber>,
    pub bounded: BTreeMap<Mono, Exp>,
}

/// How far the axes move and how deep expansions go.
#[derive(Clone, Debug)]
pub struct Context {
    pub regimes: [Regime; 2],
    pub degree: usize,
}

impl Context {
    pub fn new(regimes: [Regime; 2]) -> Self {
        Context {
            regimes,
            degree: DEFAULT_DEGREE,
        }
    }
}

impl Series {
    pub fn zero() -> Self {
        Series::default()
    }

    pub fn constant(c: ExternalNumber) -> Self {
        let mut s = Series::zero();
        s.put(ORIGIN, c);
        s
    }

    /// `center + h_axis`.
    pub fn shifted(center: ExternalNumber, axis: usize) -> Self {
        let mut s = Series::constant(center);
        let mut m = ORIGIN;
        m[axis] = 1;
        s.put(m, ExternalNumber::real(1.0));
        s
    }

    pub fn monomial(c: ExternalNumber, m: Mono) -> Self {
        let mut s = Series::zero();
        s.put(m, c);
        s
    }

    fn put(&mut self, m: Mono, c: ExternalNumber) {
        let merged = match self.exact.remove(&m) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !is_nothing(&merged) {
            self.exact.insert(m, merged);
        }
    }

    fn put_bounded(&mut self, m: Mono, q: Exp) {
        let e = self.bounded.entry(m).or_insert(q);
        if q < *e {
            *e = q;
        }
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.bounded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        self.bounded.is_empty()
    }

    /// Constant coefficient, if the series has no other terms.
    pub fn as_constant(&self) -> Option<ExternalNumber> {
        if !self.bounded.is_empty() || self.exact.keys().any(|m| *m != ORIGIN) {
            return None;
        }
        Some(self.exact.get(&ORIGIN).cloned().unwrap_or_default())
    }

    pub fn constant_term(&self) -> ExternalNumber {
        self.exact.get(&ORIGIN).cloned().unwrap_or_default()
    }

    pub fn without_constant(&self) -> Series {
        let mut s = self.clone();
        s.exact.remove(&ORIGIN);
        s
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut s = self.clone();
        for (m, c) in &o.exact {
            s.put(*m, c.clone());
        }
        for (m, q) in &o.bounded {
            s.put_bounded(*m, *q);
        }
        s
    }

    pub fn neg(&self) -> Series {
        Series {
            exact: self.exact.iter().map(|(m, c)| (*m, c.neg())).collect(),
            bounded: self.bounded.clone(),
        }
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Series) -> Result<Series> {
        let mut s = Series::zero();
        for (ma, a) in &self.exact {
            for (mb, b) in &o.exact {
                s.put(madd(*ma, *mb), a.mul(b));
            }
        }
        for (mb, q) in &self.bounded {
            s.absorb_bounded_times(*mb, *q, &o.exact);
        }
        for (mb, q) in &o.bounded {
            s.absorb_bounded_times(*mb, *q, &self.exact);
        }
        for (ma, qa) in &self.bounded {
            for (mb, qb) in &o.bounded {
                s.put_bounded(madd(*ma, *mb), *qa + *qb);
            }
        }
        if s.len() > MAX_TERMS {
            return Err(Error::Unsupported("expansion grew too large".into()));
        }
        Ok(s)
    }

    fn absorb_bounded_times(&mut self, mb: Mono, q: Exp, exact: &BTreeMap<Mono, ExternalNumber>) {
        for (me, c) in exact {
            let m = madd(mb, *me);
            if let Some(r) = c.rep().order() {
                self.put_bounded(m, q + r);
            }
            if !c.neutrix().is_zero() {
                self.put(m, ExternalNumber::from_neutrix(c.neutrix().scale(q)));
            }
        }
    }

    /// Multiply by an unknown standard-bounded multiple of `eps^q`.
    pub fn times_bounded(&self, q: Exp) -> Series {
        let mut s = Series::zero();
        s.absorb_bounded_times(ORIGIN, q, &self.exact);
        for (m, qb) in &self.bounded {
            s.put_bounded(*m, *qb + q);
        }
        s
    }

    /// Termwise size bound: representatives become bounded entries,
    /// neutrices stay.
    pub fn magnitude(&self) -> Series {
        let mut s = Series::zero();
        s.absorb_bounded_times(ORIGIN, Exp::zero(), &self.exact);
        for (m, q) in &self.bounded {
            s.put_bounded(*m, *q);
        }
        s
    }

    pub fn powi_nonneg(&self, k: u32) -> Result<Series> {
        let mut acc = Series::constant(ExternalNumber::real(1.0));
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiply every term by `c * eps^q * h^m`.
    fn scale_monomial(&self, c: f64, q: Exp, m: Mono) -> Series {
        Series {
            exact: self
                .exact
                .iter()
                .map(|(k, v)| (madd(*k, m), v.scale(c).shift(q)))
                .collect(),
            bounded: self.bounded.iter().map(|(k, b)| (madd(*k, m), *b + q)).collect(),
        }
    }

    /// Limit of the series under the regimes, together with whether the
    /// bounded remainders alone set the neutrix (then the value may not be
    /// minimal).
    pub fn limit(&self, regimes: &[Regime; 2]) -> Result<(ExternalNumber, bool)> {
        let mut value = self.constant_term();
        let mut from_exact = value.neutrix();
        let mut from_bounded = Neutrix::Zero;
        for (m, c) in &self.exact {
            if *m == ORIGIN {
                continue;
            }
            for t in c.rep().terms() {
                from_exact = from_exact.add(&classify(Coef::Zeroless(t.exp), *m, regimes));
            }
            if !c.neutrix().is_zero() {
                from_exact = from_exact.add(&classify(Coef::Set(c.neutrix()), *m, regimes));
            }
        }
        for (m, q) in &self.bounded {
            let n = if *m == ORIGIN {
                Neutrix::pounds(*q)
            } else {
                classify(Coef::Zeroless(*q), *m, regimes)
            };
            from_bounded = from_bounded.add(&n);
        }
        let total = from_exact.add(&from_bounded);
        if total == Neutrix::Full {
            return Err(Error::Divergent("the limit is the whole line".into()));
        }
        value = value.with_neutrix(total);
        let minimal = !(from_bounded > from_exact);
        Ok((value, minimal))
    }

    /// The series tends to something inside `oslash` (as a set).
    fn is_small(&self, regimes: &[Regime; 2]) -> bool {
        match self.limit(regimes) {
            Ok((v, _)) => {
                v.neutrix().is_subset_of(&Neutrix::OSLASH) && v.rep().in_neutrix(&Neutrix::OSLASH)
            }
            Err(_) => false,
        }
    }

    pub fn inv(&self, ctx: &Context) -> Result<Series> {
        if self.exact.len() == 1 && self.bounded.is_empty() {
            let (m, c) = self.exact.iter().next().unwrap();
            if c.rep().terms().len() == 1 {
                return Ok(Series::monomial(c.inv()?, [-m[0], -m[1]]));
            }
        }
        for (m, c) in &self.exact {
            let lead = match c.rep().leading() {
                Some(t) => t,
                None => continue,
            };
            let neg_m = [-m[0], -m[1]];
            let w = self
                .scale_monomial(1.0 / lead.coef, -lead.exp, neg_m)
                .sub(&Series::constant(ExternalNumber::real(1.0)));
            if !w.is_small(&ctx.regimes) {
                continue;
            }
            let front = ExternalNumber::monomial(1.0 / lead.coef, -lead.exp);
            let mw = w.neg();
            let mut sum = Series::constant(ExternalNumber::real(1.0));
            let mut power = Series::constant(ExternalNumber::real(1.0));
            for _ in 0..ctx.degree {
                power = power.mul(&mw)?;
                sum = sum.add(&power);
            }
            if !w.is_empty() {
                sum = sum.add(&w.magnitude().powi_nonneg(ctx.degree as u32 + 1)?);
            }
            return Ok(sum.mul(&Series::monomial(front, neg_m))?);
        }
        Err(Error::Unsupported("denominator has no dominant zeroless term".into()))
    }

    pub fn div(&self, o: &Series, ctx: &Context) -> Result<Series> {
        if let Some(q) = self.exact_quotient(o) {
            return Ok(q);
        }
        self.mul(&o.inv(ctx)?)
    }

    /// Real polynomials in one displacement, by axis, as dense coefficients.
    fn real_polynomial(&self) -> Option<(usize, Vec<f64>)> {
        if !self.is_exact() || self.exact.is_empty() {
            return None;
        }
        let axis = if self.exact.keys().all(|m| m[1] == 0) { 0 } else { 1 };
        let mut coefs = Vec::new();
        for (m, c) in &self.exact {
            if m[1 - axis] != 0 || m[axis] < 0 || !c.is_precise() || !c.rep().is_standard() {
                return None;
            }
            let k = m[axis] as usize;
            if coefs.len() <= k {
                coefs.resize(k + 1, 0.0);
            }
            coefs[k] = c.rep().standard_part()?;
        }
        Some((axis, coefs))
    }

    /// The quotient when `o` divides `self` as real polynomials, up to f64
    /// rounding of the remainder.
    fn exact_quotient(&self, o: &Series) -> Option<Series> {
        const ROUNDING: f64 = 1e-13;
        let (axis, mut num) = self.real_polynomial()?;
        let (other, den) = o.real_polynomial()?;
        if den.len() < 2 || (axis != other && num.len() > 1) || num.len() < den.len() {
            return None;
        }
        let size = num.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let lead = *den.last()?;
        let mut quot = vec![0.0; num.len() - den.len() + 1];
        for i in (0..quot.len()).rev() {
            let q = num[i + den.len() - 1] / lead;
            quot[i] = q;
            for (j, d) in den.iter().enumerate() {
                num[i + j] -= q * d;
            }
        }
        if num.iter().any(|r| r.abs() > ROUNDING * size) {
            return None;
        }
        let mut s = Series::zero();
        for (k, q) in quot.into_iter().enumerate() {
            let mut m = ORIGIN;
            m[other] = k as i32;
            s.put(m, ExternalNumber::real(q));
        }
        Some(s)
    }

    pub fn powi(&self, k: i32, ctx: &Context) -> Result<Series> {
        if k >= 0 {
            self.powi_nonneg(k as u32)
        } else {
            self.inv(ctx)?.powi_nonneg(k.unsigned_abs())
        }
    }

    pub fn smooth(&self, p: Prim, ctx: &Context) -> Result<Series> {
        if let Some(c) = self.as_constant() {
            return Ok(Series::constant(crate::flex::apply_prim(p, &c)?));
        }
        let s0 = self.constant_term();
        let u = self.without_constant();
        let scale = match p {
            Prim::Sqrt => match s0.order() {
                Some(q) if s0.is_positive() => q,
                _ => return Err(Error::Unsupported("sqrt near zero".into())),
            },
            _ => Exp::zero(),
        };
        if !u.scale_monomial(1.0, -scale, ORIGIN).is_small(&ctx.regimes) {
            return Err(Error::Unsupported(format!("{} argument does not stay close", p.name())));
        }
        let n = ctx.degree;
        let t = taylor_at(p, &s0, n + 2).map_err(|e| Error::Unsupported(e.to_string()))?;
        let mut sum = Series::constant(t[0].clone());
        let mut power = Series::constant(ExternalNumber::real(1.0));
        for tj in t.iter().take(n + 1).skip(1) {
            power = power.mul(&u)?;
            sum = sum.add(&power.mul(&Series::constant(tj.clone()))?);
        }
        let tail = u.magnitude().powi_nonneg(n as u32 + 1)?;
        let mut rem_coef: Option<Exp> = None;
        let mut rem_set = Neutrix::Zero;
        for c in &t[n + 1..] {
            if let Some(q) = c.order() {
                rem_coef = Some(rem_coef.map_or(q, |r: Exp| r.min(q)));
            }
            rem_set = rem_set.add(&c.neutrix());
        }
        if let Some(q) = rem_coef {
            sum = sum.add(&tail.times_bounded(q));
        }
        if !rem_set.is_zero() {
            sum = sum.add(&tail.mul(&Series::constant(ExternalNumber::from_neutrix(rem_set)))?);
        }
        Ok(sum)
    }

    /// `saw` of a non-constant series lies in `(-eps, 0]`.
    pub fn saw(&self) -> Series {
        match self.as_constant() {
            Some(c) => Series::constant(c.saw()),
            None => Series::constant(ExternalNumber::from_neutrix(Neutrix::pounds(1.into()))),
        }
    }

    /// Keep only the neutrix parts of exact coefficients.
    pub fn neutrix_part(&self) -> Series {
        Series {
            exact: self
                .exact
                .iter()
                .filter(|(_, c)| !c.neutrix().is_zero())
                .map(|(m, c)| (*m, ExternalNumber::from_neutrix(c.neutrix())))
                .collect(),
            bounded: BTreeMap::new(),
        }
    }

    /// Multiply by `h1^m0 * h2^m1`.
    pub fn shift_mono(&self, m: Mono) -> Series {
        self.scale_monomial(1.0, Exp::zero(), m)
    }

    /// One-variable view: coefficients along axis 0.
    pub fn axis0(&self) -> impl Iterator<Item = (i32, &ExternalNumber)> {
        self.exact.iter().map(|(m, c)| (m[0], c))
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .exact
            .iter()
            .map(|(m, c)| format!("({c})*{}", mono_name(*m)))
            .collect();
        parts.extend(
            self.bounded
                .iter()
                .map(|(m, q)| format!("O({})*{}", crate::scale::eps_power(*q), mono_name(*m))),
        );
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

fn mono_name(m: Mono) -> String {
    format!("h1^{}*h2^{}", m[0], m[1])
}

/// Expand an expression given series for `x` and `y`.
pub fn expand(e: &Expr, bind: &[Series; 2], ctx: &Context) -> Result<Series> {
    match e {
        Expr::Const(c) => Ok(Series::constant(c.clone())),
        Expr::Var(v) => Ok(bind[v.index()].clone()),
        Expr::Add(a, b) => Ok(expand(a, bind, ctx)?.add(&expand(b, bind, ctx)?)),
        Expr::Sub(a, b) => Ok(expand(a, bind, ctx)?.sub(&expand(b, bind, ctx)?)),
        Expr::Mul(a, b) => expand(a, bind, ctx)?.mul(&expand(b, bind, ctx)?),
        Expr::Div(a, b) => expand(a, bind, ctx)?.div(&expand(b, bind, ctx)?, ctx),
        Expr::Neg(a) => Ok(expand(a, bind, ctx)?.neg()),
        Expr::Pow(a, k) => expand(a, bind, ctx)?.powi(*k, ctx),
        Expr::Smooth(p, a) => expand(a, bind, ctx)?.smooth(*p, ctx),
        Expr::Saw(a) => Ok(expand(a, bind, ctx)?.saw()),
    }
}

/// Series of a precise generalized polynomial as a constant.
pub fn constant_of(a: &AsymptoticReal) -> Series {
    Series::constant(ExternalNumber::precise(a.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse_expr;
    use crate::scale::Idem;

    fn ctx_oslash() -> Context {
        Context::new([Regime::outer(Neutrix::OSLASH).unwrap(), Regime::Frozen])
    }

    fn at(src: &str, a: f64, ctx: &Context) -> Series {
        let e = parse_expr(src).unwrap();
        let bind = [Series::shifted(ExternalNumber::real(a), 0), Series::zero()];
        expand(&e, &bind, ctx).unwrap()
    }

    #[test]
    fn polynomial_is_exact() {
        let s = at("x^3 - x", 2.0, &ctx_oslash());
        assert!(s.is_exact());
        assert_eq!(s.exact[&[1, 0]], ExternalNumber::real(11.0));
        assert_eq!(s.exact[&[3, 0]], ExternalNumber::real(1.0));
    }

    #[test]
    fn reciprocal_gets_remainder() {
        let s = at("1/x", 1.0, &ctx_oslash());
        assert_eq!(s.exact[&[2, 0]], ExternalNumber::real(1.0));
        assert_eq!(s.bounded.get(&[7, 0]), Some(&Exp::zero()));
    }

    #[test]
    fn dominant_term_can_be_the_displacement() {
        let ctx = Context::new([
            Regime::Scaled {
                m: Exp::zero(),
                base: Idem::Pounds,
                inner: false,
            },
            Regime::Frozen,
        ]);
        let s = at("1/x", 1.0, &ctx);
        assert_eq!(s.exact[&[-1, 0]], ExternalNumber::real(1.0));
        assert!(at_err("1/(1 + x/eps)", 0.0, &ctx_inner()).is_err());
    }

    fn ctx_inner() -> Context {
        Context::new([Regime::inner(Neutrix::OSLASH).unwrap(), Regime::Frozen])
    }

    fn at_err(src: &str, a: f64, ctx: &Context) -> Result<Series> {
        let e = parse_expr(src).unwrap();
        let bind = [Series::shifted(ExternalNumber::real(a), 0), Series::zero()];
        expand(&e, &bind, ctx)
    }

    #[test]
    fn divisible_quotients_are_exact() {
        let s = at("(-2 - 2*x^2)/(1 + x^2)", 0.0, &ctx_oslash());
        assert_eq!(s.as_constant(), Some(ExternalNumber::real(-2.0)));
        let s = at("(x^3 - 1)/(x^2 + x + 1)", 2.0, &ctx_oslash());
        assert!(s.is_exact());
        assert_eq!(s.render(), at("1 + (x - 2)", 2.0, &ctx_oslash()).render());
    }

    #[test]
    fn exp_expansion_limit() {
        let ctx = ctx_oslash();
        let s = at("exp(x)", 0.0, &ctx);
        let (v, minimal) = s.limit(&ctx.regimes).unwrap();
        assert_eq!(v, "1 + oslash".parse().unwrap());
        assert!(minimal);
    }
}
