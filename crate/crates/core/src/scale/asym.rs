//! Finite generalized polynomials in `eps`: sums of `c * eps^q` with real
//! coefficients and rational exponents.

use super::neutrix::{Exp, Neutrix};
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Relative size below which a merged coefficient is treated as cancelled.
pub const CANCEL_TOL: f64 = 1e-10;
/// Relative tolerance for coefficient equality.
pub const EQ_TOL: f64 = 1e-9;
/// Truncation span for series whose neutrix gives no natural cutoff.
pub const SERIES_SPAN: i64 = 8;
const MAX_SERIES_TERMS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub exp: Exp,
    pub coef: f64,
}

/// Terms sorted by increasing exponent, no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AsymptoticReal {
    terms: Vec<Term>,
}

fn merged(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.abs() <= CANCEL_TOL * a.abs().max(b.abs()) {
        0.0
    } else {
        s
    }
}

impl AsymptoticReal {
    pub fn zero() -> Self {
        AsymptoticReal { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, Exp::zero())
    }

    pub fn monomial(c: f64, q: Exp) -> Self {
        if c == 0.0 {
            Self::zero()
        } else {
            AsymptoticReal {
                terms: vec![Term { exp: q, coef: c }],
            }
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (f64, Exp)>>(it: I) -> Self {
        let mut v: Vec<Term> = it
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(coef, exp)| Term { exp, coef })
            .collect();
        v.sort_by(|a, b| a.exp.cmp(&b.exp));
        let mut out: Vec<Term> = Vec::with_capacity(v.len());
        for t in v {
            match out.last_mut() {
                Some(last) if last.exp == t.exp => last.coef = merged(last.coef, t.coef),
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coef != 0.0 && t.coef.is_finite());
        AsymptoticReal { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<Term> {
        self.terms.first().copied()
    }

    /// Exponent of the leading term.
    pub fn order(&self) -> Option<Exp> {
        self.terms.first().map(|t| t.exp)
    }

    /// Sign of the leading coefficient; 0 for the zero polynomial.
    pub fn sign(&self) -> i32 {
        match self.leading() {
            None => 0,
            Some(t) if t.coef > 0.0 => 1,
            Some(_) => -1,
        }
    }

    pub fn coef_at(&self, q: Exp) -> f64 {
        self.terms
            .iter()
            .find(|t| t.exp == q)
            .map(|t| t.coef)
            .unwrap_or(0.0)
    }

    /// Coefficient of `eps^0` when every term is limited, i.e. the
    /// standard part.
    pub fn standard_part(&self) -> Option<f64> {
        match self.order() {
            None => Some(0.0),
            Some(q) if q < Exp::zero() => None,
            Some(_) => Some(self.coef_at(Exp::zero())),
        }
    }

    /// True when the value is a standard real (only an `eps^0` term).
    pub fn is_standard(&self) -> bool {
        self.terms.iter().all(|t| t.exp.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let pick = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.exp.cmp(&b.exp),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match pick {
                Ordering::Less => {
                    out.push(self.terms[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = merged(self.terms[i].coef, other.terms[j].coef);
                    if c != 0.0 {
                        out.push(Term {
                            exp: self.terms[i].exp,
                            coef: c,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        AsymptoticReal { terms: out }
    }

    pub fn neg(&self) -> Self {
        AsymptoticReal {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exp: t.exp,
                    coef: -t.coef,
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                v.push((a.coef * b.coef, a.exp + b.exp));
            }
        }
        Self::from_terms(v)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| (t.coef * c, t.exp)))
    }

    /// Multiply by `eps^p`.
    pub fn shift(&self, p: Exp) -> Self {
        AsymptoticReal {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exp: t.exp + p,
                    coef: t.coef,
                })
                .collect(),
        }
    }

    /// Keep only terms with exponent `<= cut`.
    pub fn truncate_above(&self, cut: Exp) -> Self {
        AsymptoticReal {
            terms: self.terms.iter().filter(|t| t.exp <= cut).copied().collect(),
        }
    }

    /// Drop every term that the neutrix absorbs.
    pub fn strip(&self, n: &Neutrix) -> Self {
        match n {
            Neutrix::Full => Self::zero(),
            _ => AsymptoticReal {
                terms: self
                    .terms
                    .iter()
                    .filter(|t| !n.contains_power(t.exp))
                    .copied()
                    .collect(),
            },
        }
    }

    /// Whether the whole value lies in the neutrix.
    pub fn in_neutrix(&self, n: &Neutrix) -> bool {
        match self.order() {
            None => true,
            Some(q) => n.contains_power(q),
        }
    }

    /// Reciprocal expanded as a series up to exponent `cut` (inclusive).
    pub fn inv_truncated(&self, cut: Exp) -> Option<Self> {
        let lead = self.leading()?;
        // self = c0 eps^q0 (1 + u)
        let u = AsymptoticReal {
            terms: self.terms[1..]
                .iter()
                .map(|t| Term {
                    exp: t.exp - lead.exp,
                    coef: t.coef / lead.coef,
                })
                .collect(),
        };
        let rel_cut = cut + lead.exp;
        let neg_u = u.neg().truncate_above(rel_cut);
        let mut sum = Self::constant(1.0);
        let mut power = Self::constant(1.0);
        for _ in 0..MAX_SERIES_TERMS {
            power = power.mul(&neg_u).truncate_above(rel_cut);
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power);
        }
        Some(sum.scale(1.0 / lead.coef).shift(-lead.exp))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::constant(1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Numerical value for a concrete `eps`.
    pub fn eval_f64(&self, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * eps.powf(t.exp.to_f64().unwrap_or(0.0)))
            .sum()
    }

    /// Equality up to relative coefficient tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms.iter().zip(&other.terms).all(|(a, b)| {
            a.exp == b.exp && (a.coef - b.coef).abs() <= EQ_TOL * a.coef.abs().max(b.coef.abs())
        })
    }

    pub fn max_exponent(&self) -> Option<Exp> {
        self.terms.last().map(|t| t.exp)
    }

    pub fn is_negative(&self) -> bool {
        self.leading().map(|t| t.coef.is_negative()).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::neutrix::{exp, exp_frac};

    #[test]
    fn cancellation_removes_float_noise() {
        let a = AsymptoticReal::constant(-1.0);
        let b = AsymptoticReal::constant(1.0000000000000002);
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn inverse_of_one_plus_eps() {
        let a = AsymptoticReal::from_terms([(1.0, exp(0)), (1.0, exp(1))]);
        let inv = a.inv_truncated(exp(3)).unwrap();
        let want = AsymptoticReal::from_terms([
            (1.0, exp(0)),
            (-1.0, exp(1)),
            (1.0, exp(2)),
            (-1.0, exp(3)),
        ]);
        assert!(inv.approx_eq(&want), "{inv:?}");
    }

    #[test]
    fn inverse_shifts_order() {
        let a = AsymptoticReal::monomial(2.0, exp_frac(1, 2));
        let inv = a.inv_truncated(exp(4)).unwrap();
        assert!(inv.approx_eq(&AsymptoticReal::monomial(0.5, exp_frac(-1, 2))));
    }

    #[test]
    fn strip_respects_class() {
        let a = AsymptoticReal::from_terms([(1.0, exp(0)), (3.0, exp(1)), (2.0, exp(2))]);
        assert_eq!(a.strip(&Neutrix::pounds(exp(1))).terms().len(), 1);
        assert_eq!(a.strip(&Neutrix::oslash(exp(1))).terms().len(), 2);
    }
}
