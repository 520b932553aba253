//! Scale analysis of `F(a+s)` for `s = sigma * eps^t`.
//!
//! The difference `d(s) = f(a+s) - f(a)` of the representatives is a sum of
//! terms `c * eps^q * s^k`; the neutrix of `F(a+s)` is the largest of
//! `N_k * s^k`. For fixed `t` only the terms of least exponent `q + k t`
//! matter, so the inequality `F(a+s) >= F(a) + N` is decided on finitely many
//! test slices between the breakpoints where two exponents cross.

use crate::calc::Series;
use crate::error::{Error, Result};
use crate::scale::{AsymptoticReal, Exp, Neutrix};
use num_traits::Zero;

/// Outcome of a certification attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

impl Verdict {
    /// `Fails` wins over `Undecided`, which wins over `Holds`.
    pub fn and(self, o: Verdict) -> Verdict {
        use Verdict::*;
        match (self, o) {
            (Fails, _) | (_, Fails) => Fails,
            (Undecided, _) | (_, Undecided) => Undecided,
            _ => Holds,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Undecided => "undecided",
        }
    }
}

/// Which standard multipliers `sigma` occur at a slice `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Sigmas {
    All,
    UpTo(f64),
    /// Only `sigma -> 0`.
    ToZero,
}

/// Range of displacements on one side of `a`, in terms of `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Reach {
    Empty,
    /// Every `t`.
    Unbounded,
    /// `t > t0`, and `t = t0` with `sigma <= c`.
    UpTo(Exp, f64),
    /// `t > t0`, and `t = t0` with small `sigma`.
    ToZero(Exp),
    /// Every `t` from slightly below `t0` on.
    Below(Exp),
    /// Only very large `t`.
    Far,
}

impl Reach {
    /// Whether every displacement is infinitesimal or tends to 0.
    pub fn is_small(&self) -> bool {
        match *self {
            Reach::Empty | Reach::Far => true,
            Reach::UpTo(t, _) => t > Exp::zero(),
            Reach::ToZero(t) => t >= Exp::zero(),
            Reach::Below(t) => t > Exp::zero(),
            Reach::Unbounded => false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Side {
    pub sign: f64,
    pub reach: Reach,
}

#[derive(Clone, Debug)]
pub(crate) struct Profile {
    /// `(k, q, c)` for `c * eps^q * s^k`, `k >= 1`.
    exact: Vec<(i32, Exp, f64)>,
    /// Terms of unknown sign bounded by `eps^q * |s|^k`.
    unknown: Vec<(i32, Exp)>,
    /// `N_k` multiplying `s^k`.
    spread: Vec<(i32, Neutrix)>,
    /// `N(F(a)) + N`.
    k: Neutrix,
}

impl Profile {
    /// Profile of a one-variable series in `s`; `fa` is `N(F(a))` and `n`
    /// the tolerance.
    pub fn new(series: &Series, fa: Neutrix, n: Neutrix) -> Result<Profile> {
        let mut p = Profile {
            exact: Vec::new(),
            unknown: Vec::new(),
            spread: Vec::new(),
            k: fa.add(&n),
        };
        for (m, c) in &series.exact {
            if m[1] != 0 || m[0] < 0 {
                return Err(Error::Unsupported("expansion is not a power series in one variable".into()));
            }
            if !c.neutrix().is_zero() {
                p.spread.push((m[0], c.neutrix()));
            }
            if m[0] > 0 {
                for t in c.rep().terms() {
                    p.exact.push((m[0], t.exp, t.coef));
                }
            }
        }
        for (m, q) in &series.bounded {
            if m[1] != 0 || m[0] < 0 {
                return Err(Error::Unsupported("expansion is not a power series in one variable".into()));
            }
            p.unknown.push((m[0], *q));
        }
        Ok(p)
    }

    pub fn is_exact(&self) -> bool {
        self.unknown.is_empty()
    }

    fn spread_at(&self, t: Exp) -> Neutrix {
        self.spread
            .iter()
            .fold(Neutrix::Zero, |acc, (k, n)| acc.add(&n.scale(t * Exp::from_integer(*k as i64))))
    }

    /// Points where two of the exponent lines `q + k t` cross.
    fn breakpoints(&self) -> Vec<Exp> {
        let mut lines: Vec<(Exp, i32)> = Vec::new();
        lines.extend(self.exact.iter().map(|(k, q, _)| (*q, *k)));
        lines.extend(self.unknown.iter().map(|(k, q)| (*q, *k)));
        lines.extend(self.spread.iter().filter_map(|(k, n)| n.exponent().map(|q| (q, *k))));
        if let Some(q) = self.k.exponent() {
            lines.push((q, 0));
        }
        let mut out = Vec::new();
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                if a.1 != b.1 {
                    out.push((b.0 - a.0) / Exp::from_integer((a.1 - b.1) as i64));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Verdict on the slice `s = sign * sigma * eps^t`.
    fn slice(&self, t: Exp, sigmas: Sigmas, sign: f64) -> Verdict {
        let ex = |k: i32, q: Exp| q + t * Exp::from_integer(k as i64);
        let a = self.spread_at(t);
        let e_exact = self.exact.iter().map(|(k, q, _)| ex(*k, *q)).min();
        let e_unknown = self.unknown.iter().map(|(k, q)| ex(*k, *q)).min();
        let e_min = match (e_exact, e_unknown) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => {
                return if a <= self.k { Verdict::Holds } else { Verdict::Fails };
            }
        };
        let inside = a <= self.k;
        if inside && self.k.contains_power(e_min) {
            return Verdict::Holds;
        }
        if !inside && a.contains_power(e_min) {
            return Verdict::Fails;
        }
        let Some(e) = e_exact else {
            return Verdict::Undecided;
        };
        let tied: Vec<(i32, f64)> = self
            .exact
            .iter()
            .filter(|(k, q, _)| ex(*k, *q) == e)
            .map(|(k, _, c)| (*k, *c * sign.powi(*k)))
            .collect();
        let k_low = tied.iter().map(|(k, _)| *k).min().unwrap_or(0);
        let unknown_matters = self.unknown.iter().any(|(k, q)| {
            let u = ex(*k, *q);
            u < e || (u == e && (sigmas != Sigmas::ToZero || *k <= k_low))
        });
        if unknown_matters {
            return Verdict::Undecided;
        }
        match poly_sign(&tied, sigmas) {
            PolySign::Positive => Verdict::Holds,
            PolySign::Negative => Verdict::Fails,
            PolySign::Touches => Verdict::Undecided,
        }
    }

    /// Verdict over both sides.
    pub fn check(&self, sides: &[Side]) -> Verdict {
        let bps = self.breakpoints();
        let mut verdict = Verdict::Holds;
        for side in sides {
            for (t, sig) in test_slices(&bps, side.reach) {
                verdict = verdict.and(self.slice(t, sig, side.sign));
                if verdict == Verdict::Fails {
                    return verdict;
                }
            }
        }
        verdict
    }
}

fn half() -> Exp {
    Exp::new(1, 2)
}

/// Slices `t > t0` between and beyond the breakpoints.
fn above(bps: &[Exp], t0: Exp) -> Vec<(Exp, Sigmas)> {
    let mut pts: Vec<Exp> = vec![t0];
    pts.extend(bps.iter().copied().filter(|b| *b > t0));
    let mut out = Vec::new();
    for w in pts.windows(2) {
        out.push(((w[0] + w[1]) * half(), Sigmas::All));
        out.push((w[1], Sigmas::All));
    }
    out.push((*pts.last().unwrap() + Exp::from_integer(1), Sigmas::All));
    out
}

fn test_slices(bps: &[Exp], reach: Reach) -> Vec<(Exp, Sigmas)> {
    match reach {
        Reach::Empty => Vec::new(),
        Reach::Far => {
            let top = bps.last().copied().unwrap_or_else(Exp::zero).max(Exp::zero());
            vec![(top + Exp::from_integer(1), Sigmas::All)]
        }
        Reach::Unbounded => {
            let lowest = bps.first().copied().unwrap_or_else(Exp::zero) - Exp::from_integer(1);
            let mut out = vec![(lowest, Sigmas::All)];
            out.extend(above(bps, lowest));
            out
        }
        Reach::UpTo(t0, c) => {
            let mut out = vec![(t0, Sigmas::UpTo(c))];
            out.extend(above(bps, t0));
            out
        }
        Reach::ToZero(t0) => {
            let mut out = vec![(t0, Sigmas::ToZero)];
            out.extend(above(bps, t0));
            out
        }
        Reach::Below(m) => {
            let gap = bps
                .iter()
                .copied()
                .filter(|b| *b < m)
                .max()
                .map_or_else(|| Exp::from_integer(1), |b| m - b);
            let t0 = m - gap * half();
            let mut out = vec![(t0, Sigmas::All)];
            out.extend(above(bps, t0));
            out
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PolySign {
    Positive,
    Negative,
    Touches,
}

fn sign_of(c: f64) -> PolySign {
    if c > 0.0 {
        PolySign::Positive
    } else {
        PolySign::Negative
    }
}

/// Sign of `sum c_k sigma^k` over the allowed standard `sigma > 0`.
fn poly_sign(terms: &[(i32, f64)], sigmas: Sigmas) -> PolySign {
    let low = terms.iter().min_by_key(|(k, _)| *k).copied().unwrap();
    let high = terms.iter().max_by_key(|(k, _)| *k).copied().unwrap();
    if sigmas == Sigmas::ToZero || terms.len() == 1 {
        return sign_of(low.1);
    }
    if sign_of(low.1) == PolySign::Negative {
        return PolySign::Negative;
    }
    if sigmas == Sigmas::All && sign_of(high.1) == PolySign::Negative {
        return PolySign::Negative;
    }
    // Positive roots lie between these bounds.
    let upper = 1.0 + terms.iter().filter(|t| t.0 != high.0).map(|t| (t.1 / high.1).abs()).fold(0.0, f64::max);
    let lower = 1.0 / (1.0 + terms.iter().filter(|t| t.0 != low.0).map(|t| (t.1 / low.1).abs()).fold(0.0, f64::max));
    let hi = match sigmas {
        Sigmas::UpTo(c) => c.min(2.0 * upper),
        _ => 2.0 * upper,
    };
    let lo = (0.5 * lower).min(hi);
    let n = 4000;
    let mut least = f64::INFINITY;
    for i in 0..=n {
        let s = lo * (hi / lo).powf(i as f64 / n as f64);
        let (mut v, mut size) = (0.0, 0.0);
        for (k, c) in terms {
            let p = c * s.powi(*k);
            v += p;
            size += p.abs();
        }
        let rel = v / size;
        if rel < -1e-12 {
            return PolySign::Negative;
        }
        least = least.min(rel);
    }
    if least < 1e-7 {
        PolySign::Touches
    } else {
        PolySign::Positive
    }
}

/// Range of `t` inside `[lo, hi]` on the side `sign` of `a`.
pub(crate) fn domain_reach(a: &AsymptoticReal, bounds: [f64; 2], sign: f64) -> Result<Reach> {
    let end = if sign > 0.0 { bounds[1] } else { bounds[0] };
    if end.is_infinite() {
        return Ok(Reach::Unbounded);
    }
    let room = if sign > 0.0 {
        AsymptoticReal::constant(end).sub(a)
    } else {
        a.sub(&AsymptoticReal::constant(end))
    };
    if room.is_zero() {
        return Ok(Reach::Empty);
    }
    if room.is_negative() {
        return Err(Error::Invalid("point lies outside the domain".into()));
    }
    let lead = room.leading().unwrap();
    Ok(Reach::UpTo(lead.exp, lead.coef))
}

/// Displacements allowed by an `M`-neighborhood, cut by the domain.
pub(crate) fn local_reach(m: Neutrix, dom: Reach) -> Result<Reach> {
    if dom == Reach::Empty {
        return Ok(Reach::Empty);
    }
    Ok(match m {
        Neutrix::Full => return Err(Error::Invalid("M must be strictly contained in R".into())),
        Neutrix::Zero | Neutrix::Meps | Neutrix::Mueps => Reach::Far,
        Neutrix::Scaled(q, crate::scale::Idem::Oslash) => match dom {
            Reach::UpTo(r, c) if r > q => Reach::UpTo(r, c),
            _ => Reach::ToZero(q),
        },
        Neutrix::Scaled(q, crate::scale::Idem::Pounds) => match dom {
            Reach::UpTo(r, c) if r >= q => Reach::UpTo(r, c),
            _ => Reach::Below(q),
        },
    })
}

/// Rational with the smallest denominator in `[lo, hi]`.
pub(crate) fn simplest_between(lo: Exp, hi: Exp) -> Exp {
    for d in 1..=1024i64 {
        let n = (lo * Exp::from_integer(d)).ceil();
        let cand = n / Exp::from_integer(d);
        if cand <= hi {
            return cand;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_signs() {
        assert_eq!(poly_sign(&[(2, 3.0), (3, 1.0)], Sigmas::All), PolySign::Positive);
        assert_eq!(poly_sign(&[(2, 3.0), (3, -1.0)], Sigmas::All), PolySign::Negative);
        assert_eq!(poly_sign(&[(2, 3.0), (3, -1.0)], Sigmas::UpTo(1.0)), PolySign::Positive);
        assert_eq!(poly_sign(&[(2, 3.0), (3, -1.0)], Sigmas::ToZero), PolySign::Positive);
        // (s - 1)^2 s touches zero at 1
        assert_eq!(poly_sign(&[(1, 1.0), (2, -2.0), (3, 1.0)], Sigmas::All), PolySign::Touches);
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(Exp::new(511, 1024), Exp::new(1, 2)), Exp::new(1, 2));
        assert_eq!(simplest_between(Exp::new(1, 3), Exp::new(2, 3)), Exp::new(1, 2));
        assert_eq!(simplest_between(Exp::zero(), Exp::new(1, 1024)), Exp::zero());
    }
}
