//! External numbers `a + A`: a representative generalized polynomial plus a
//! neutrix.

use super::asym::{AsymptoticReal, SERIES_SPAN};
use super::neutrix::{exp, Exp, Neutrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ExternalNumber {
    rep: AsymptoticReal,
    neutrix: Neutrix,
}

/// Outcome of comparing two external numbers under the pointwise order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderPattern {
    Lt,
    Gt,
    LeqAndGeq,
    LeqOnly,
    GeqOnly,
    Incomparable,
}

/// Result of checking distributivity on a triple.
#[derive(Clone, Debug)]
pub struct DistributivityCheck {
    pub lhs: ExternalNumber,
    pub rhs: ExternalNumber,
    pub correction_alpha: Neutrix,
    pub correction_beta: Neutrix,
    pub exact: bool,
}

impl ExternalNumber {
    pub fn new(rep: AsymptoticReal, neutrix: Neutrix) -> Self {
        let rep = rep.strip(&neutrix);
        ExternalNumber { rep, neutrix }
    }

    pub fn precise(rep: AsymptoticReal) -> Self {
        ExternalNumber {
            rep,
            neutrix: Neutrix::Zero,
        }
    }

    pub fn real(c: f64) -> Self {
        Self::precise(AsymptoticReal::constant(c))
    }

    pub fn monomial(c: f64, q: Exp) -> Self {
        Self::precise(AsymptoticReal::monomial(c, q))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn from_neutrix(n: Neutrix) -> Self {
        ExternalNumber {
            rep: AsymptoticReal::zero(),
            neutrix: n,
        }
    }

    pub fn rep(&self) -> &AsymptoticReal {
        &self.rep
    }

    pub fn neutrix(&self) -> Neutrix {
        self.neutrix
    }

    pub fn with_neutrix(&self, n: Neutrix) -> Self {
        Self::new(self.rep.clone(), self.neutrix.add(&n))
    }

    pub fn is_zeroless(&self) -> bool {
        !self.rep.is_zero()
    }

    /// Equal to its own neutrix (contains 0).
    pub fn is_neutricial(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn is_precise(&self) -> bool {
        self.neutrix.is_zero()
    }

    /// Standard real value if the number is a precise standard real.
    pub fn as_standard(&self) -> Option<f64> {
        if self.is_precise() && self.rep.is_standard() {
            self.rep.standard_part()
        } else {
            None
        }
    }

    /// Order of the representative's leading term.
    pub fn order(&self) -> Option<Exp> {
        self.rep.order()
    }

    /// Sign when zeroless, otherwise 0.
    pub fn sign(&self) -> i32 {
        self.rep.sign()
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.rep.add(&other.rep), self.neutrix.add(&other.neutrix))
    }

    pub fn neg(&self) -> Self {
        ExternalNumber {
            rep: self.rep.neg(),
            neutrix: self.neutrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Neutrix of the product, `aB + bA + AB`.
    pub fn product_neutrix(&self, other: &Self) -> Neutrix {
        let a_b = scale_by(&other.neutrix, &self.rep);
        let b_a = scale_by(&self.neutrix, &other.rep);
        a_b.add(&b_a).add(&self.neutrix.mul(&other.neutrix))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.rep.mul(&other.rep), self.product_neutrix(other))
    }

    /// Multiply by a precise real.
    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self::new(self.rep.scale(c), self.neutrix)
    }

    /// Multiply by `eps^p`.
    pub fn shift(&self, p: Exp) -> Self {
        Self::new(self.rep.shift(p), self.neutrix.scale(p))
    }

    /// `1/(a + A) = 1/a + A/a^2`.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_zeroless() {
            return Err(Error::NotZeroless(self.to_string()));
        }
        let q0 = self.rep.order().expect("zeroless");
        let n = self.neutrix.scale(-q0 - q0);
        let cut = match n {
            Neutrix::Scaled(t, _) => t,
            _ => -q0 + exp(SERIES_SPAN),
        };
        let rep = self
            .rep
            .inv_truncated(cut)
            .ok_or_else(|| Error::NotZeroless(self.to_string()))?;
        Ok(Self::new(rep, n))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn powi(&self, k: i32) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::real(1.0);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn abs(&self) -> Self {
        if self.rep.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// `A / |a|`, or the whole line when the number is not zeroless.
    pub fn relative_uncertainty(&self) -> Neutrix {
        match self.rep.order() {
            Some(q) => self.neutrix.scale(-q),
            None => Neutrix::Full,
        }
    }

    /// Relative uncertainty is at most infinitesimal.
    pub fn is_appreciable_leading(&self) -> bool {
        self.relative_uncertainty().is_subset_of(&Neutrix::OSLASH)
    }

    /// Set inclusion `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.neutrix.is_subset_of(&self.neutrix) && other.rep.sub(&self.rep).in_neutrix(&self.neutrix)
    }

    /// Membership of a precise value.
    pub fn contains_real(&self, x: &AsymptoticReal) -> bool {
        x.sub(&self.rep).in_neutrix(&self.neutrix)
    }

    pub fn disjoint(&self, other: &Self) -> bool {
        self.sub(other).is_zeroless()
    }

    /// `∀x ∈ self ∃y ∈ other: x <= y`.
    pub fn leq(&self, other: &Self) -> bool {
        let a = self.neutrix;
        let b = other.neutrix;
        let d = self.rep.sub(&other.rep);
        if a.is_subset_of(&b) {
            !(d.sign() > 0 && !d.in_neutrix(&b))
        } else {
            d.sign() < 0 && !d.in_neutrix(&a)
        }
    }

    /// `∀x ∈ self ∃y ∈ other: x >= y`.
    pub fn geq(&self, other: &Self) -> bool {
        self.neg().leq(&other.neg())
    }

    /// Every element of `self` is below every element of `other`.
    pub fn lt(&self, other: &Self) -> bool {
        let d = other.sub(self);
        d.is_zeroless() && d.is_positive()
    }

    pub fn gt(&self, other: &Self) -> bool {
        other.lt(self)
    }

    pub fn compare(&self, other: &Self) -> OrderPattern {
        if self.lt(other) {
            return OrderPattern::Lt;
        }
        if self.gt(other) {
            return OrderPattern::Gt;
        }
        match (self.leq(other), self.geq(other)) {
            (true, true) => OrderPattern::LeqAndGeq,
            (true, false) => OrderPattern::LeqOnly,
            (false, true) => OrderPattern::GeqOnly,
            (false, false) => OrderPattern::Incomparable,
        }
    }

    /// Membership in the external interval `[lower, upper]`.
    pub fn in_interval(&self, lower: &Self, upper: &Self) -> bool {
        self.geq(lower) && self.leq(upper)
    }

    /// Strict inclusion `(α+β)C ⊂ max(αC, βC)`.
    pub fn opposite_wrt(&self, other: &Self, c: &Neutrix) -> bool {
        let cn = ExternalNumber::from_neutrix(*c);
        let sum = self.add(other).product_neutrix(&cn);
        let m = self.product_neutrix(&cn).add(&other.product_neutrix(&cn));
        sum < m
    }

    /// Compare `αγ + βγ` with `(α + β)γ`.
    pub fn distributivity_check(alpha: &Self, beta: &Self, gamma: &Self) -> DistributivityCheck {
        let lhs = alpha.mul(gamma).add(&beta.mul(gamma));
        let rhs = alpha.add(beta).mul(gamma);
        let c = ExternalNumber::from_neutrix(gamma.neutrix);
        let ca = c.product_neutrix(alpha);
        let cb = c.product_neutrix(beta);
        let exact = lhs == rhs;
        DistributivityCheck {
            lhs,
            rhs,
            correction_alpha: ca,
            correction_beta: cb,
            exact,
        }
    }

    /// `saw(u) = eps*floor(u/eps) - u`, exact when the floor is determined
    /// on the whole set, otherwise the enclosure `eps*pounds`.
    pub fn saw(&self) -> Self {
        let envelope = ExternalNumber::from_neutrix(Neutrix::pounds(exp(1)));
        if !self.neutrix.is_subset_of(&Neutrix::oslash(exp(1))) {
            return envelope;
        }
        let v = self.rep.shift(-exp(1));
        let v0 = match v.standard_part() {
            Some(x) => x,
            None => return envelope,
        };
        let delta = v.sub(&AsymptoticReal::constant(v0));
        let slack = self.neutrix.scale(-exp(1));
        let mut n = v0.floor();
        if v0 == n && !(delta.is_zero() && slack.is_zero()) {
            if delta.is_zero() || delta.in_neutrix(&slack) {
                return envelope;
            }
            if delta.is_negative() {
                n -= 1.0;
            }
        }
        let base = AsymptoticReal::monomial(n, exp(1));
        Self::new(base.sub(&self.rep), self.neutrix)
    }
}

fn scale_by(n: &Neutrix, a: &AsymptoticReal) -> Neutrix {
    match a.order() {
        None => Neutrix::Zero,
        Some(q) => n.scale(q),
    }
}

/// Set equality.
impl PartialEq for ExternalNumber {
    fn eq(&self, other: &Self) -> bool {
        self.neutrix == other.neutrix && self.rep.sub(&other.rep).in_neutrix(&self.neutrix)
    }
}

impl From<f64> for ExternalNumber {
    fn from(c: f64) -> Self {
        ExternalNumber::real(c)
    }
}

impl From<Neutrix> for ExternalNumber {
    fn from(n: Neutrix) -> Self {
        ExternalNumber::from_neutrix(n)
    }
}

impl Default for ExternalNumber {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::neutrix::exp_frac;

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    #[test]
    fn product_keeps_neutrix_product() {
        let a = en("1 + oslash");
        let b = en("2 + eps*pounds");
        assert_eq!(a.mul(&b), en("2 + oslash"));
        let z = en("oslash");
        assert_eq!(z.mul(&z), en("oslash"));
    }

    #[test]
    fn inverse_carries_relative_uncertainty() {
        let a = en("2 + eps*pounds");
        assert_eq!(a.inv().unwrap(), en("0.5 + eps*pounds"));
        let b = en("eps + eps^2*oslash");
        let inv = b.inv().unwrap();
        assert_eq!(inv.neutrix(), Neutrix::OSLASH);
        assert!(en("oslash").inv().is_err());
    }

    #[test]
    fn order_patterns() {
        let o = en("oslash");
        let l = en("pounds");
        assert_eq!(o.compare(&l), OrderPattern::LeqAndGeq);
        assert_eq!(l.compare(&o), OrderPattern::Incomparable);
        assert_eq!(en("1").compare(&en("2 + oslash")), OrderPattern::Lt);
    }

    #[test]
    fn interval_membership() {
        let lo = en("-oslash");
        let hi = en("oslash");
        assert!(ExternalNumber::monomial(1.0, exp_frac(1, 2)).in_interval(&lo, &hi));
        assert!(!en("2").in_interval(&lo, &hi));
    }

    #[test]
    fn saw_values() {
        assert_eq!(en("0").saw(), en("0"));
        assert_eq!(en("1").saw(), en("eps*pounds"));
        assert_eq!(en("2.5*eps").saw(), en("-0.5*eps"));
        assert_eq!(en("3*eps + eps^2").saw(), en("-eps^2"));
        assert_eq!(en("3*eps - eps^2").saw(), en("-eps + eps^2"));
    }

    #[test]
    fn distributivity_correction() {
        let a = en("1 + eps*pounds");
        let b = en("-1 + eps^2*oslash");
        let g = en("oslash");
        let d = ExternalNumber::distributivity_check(&a, &b, &g);
        assert!(!d.exact);
        let fixed = d.rhs.with_neutrix(d.correction_alpha).with_neutrix(d.correction_beta);
        assert_eq!(fixed, d.lhs);
    }
}
