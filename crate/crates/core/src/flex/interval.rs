//! External intervals: all reals between two external numbers.

use crate::scale::{AsymptoticReal, ExternalNumber, Neutrix};
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalInterval {
    pub lower: ExternalNumber,
    pub upper: ExternalNumber,
}

impl ExternalInterval {
    pub fn new(lower: ExternalNumber, upper: ExternalNumber) -> Self {
        ExternalInterval { lower, upper }
    }

    pub fn reals(lo: f64, hi: f64) -> Self {
        ExternalInterval::new(ExternalNumber::real(lo), ExternalNumber::real(hi))
    }

    /// The external number `a + N` viewed as an interval.
    pub fn around(center: &ExternalNumber) -> Self {
        ExternalInterval::new(center.clone(), center.clone())
    }

    pub fn neutrix(n: Neutrix) -> Self {
        ExternalInterval::around(&ExternalNumber::from_neutrix(n))
    }

    /// Some member of `lower` is at most `x` and some member of `upper` is
    /// at least `x`.
    pub fn contains(&self, x: &AsymptoticReal) -> bool {
        let p = ExternalNumber::precise(x.clone());
        p.geq(&self.lower) && p.leq(&self.upper)
    }

    /// When both ends are the same external number, that number.
    pub fn as_external(&self) -> Option<&ExternalNumber> {
        if self.lower == self.upper {
            Some(&self.lower)
        } else {
            None
        }
    }
}

impl fmt::Display for ExternalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_external() {
            Some(e) => write!(f, "{e}"),
            None => write!(f, "[{}, {}]", self.lower, self.upper),
        }
    }
}
