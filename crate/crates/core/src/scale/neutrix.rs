//! Neutrices: convex additive groups of reals, restricted to the shapes the
//! library can represent exactly.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Exponent of a power of the infinitesimal scale `eps`.
pub type Exp = Rational64;

pub fn exp(n: i64) -> Exp {
    Rational64::from_integer(n)
}

pub fn exp_frac(n: i64, d: i64) -> Exp {
    Rational64::new(n, d)
}

/// The two idempotent neutrices that a scaled neutrix is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Idem {
    /// Infinitesimals.
    Oslash,
    /// Limited reals.
    Pounds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Neutrix {
    Zero,
    /// `eps^q * oslash` or `eps^q * pounds`.
    Scaled(Exp, Idem),
    /// Reals smaller than every power of `eps`.
    Meps,
    /// Reals smaller than every `e^(-1/eps^n)`.
    Mueps,
    /// All of R.
    Full,
}

/// Result of comparing two neutrices by inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inclusion {
    Subset,
    Equal,
    Superset,
}

impl Neutrix {
    pub const OSLASH: Neutrix = Neutrix::Scaled(Rational64::new_raw(0, 1), Idem::Oslash);
    pub const POUNDS: Neutrix = Neutrix::Scaled(Rational64::new_raw(0, 1), Idem::Pounds);

    pub fn oslash(q: Exp) -> Neutrix {
        Neutrix::Scaled(q, Idem::Oslash)
    }

    pub fn pounds(q: Exp) -> Neutrix {
        Neutrix::Scaled(q, Idem::Pounds)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Neutrix::Zero)
    }

    pub fn exponent(&self) -> Option<Exp> {
        match self {
            Neutrix::Scaled(q, _) => Some(*q),
            _ => None,
        }
    }

    // Position in the inclusion chain. Larger means bigger set.
    fn rank(&self) -> (u8, Exp, u8) {
        let z = Exp::zero();
        match *self {
            Neutrix::Zero => (0, z, 0),
            Neutrix::Mueps => (1, z, 0),
            Neutrix::Meps => (2, z, 0),
            // Smaller exponent means larger set; at equal exponent pounds wins.
            Neutrix::Scaled(q, Idem::Oslash) => (3, -q, 0),
            Neutrix::Scaled(q, Idem::Pounds) => (3, -q, 1),
            Neutrix::Full => (4, z, 0),
        }
    }

    /// Inclusion order. The representable neutrices form a chain, so any
    /// two are comparable.
    pub fn relation(&self, other: &Neutrix) -> Inclusion {
        match self.cmp(other) {
            Ordering::Less => Inclusion::Subset,
            Ordering::Equal => Inclusion::Equal,
            Ordering::Greater => Inclusion::Superset,
        }
    }

    pub fn is_subset_of(&self, other: &Neutrix) -> bool {
        self <= other
    }

    /// Neutrix sum. For a chain this is the larger of the two.
    pub fn add(&self, other: &Neutrix) -> Neutrix {
        if self >= other {
            *self
        } else {
            *other
        }
    }

    pub fn mul(&self, other: &Neutrix) -> Neutrix {
        use Neutrix::*;
        match (*self, *other) {
            (Zero, _) | (_, Zero) => Zero,
            (Full, _) | (_, Full) => Full,
            (Mueps, _) | (_, Mueps) => Mueps,
            (Meps, _) | (_, Meps) => Meps,
            (Scaled(p, a), Scaled(q, b)) => {
                let idem = if a == Idem::Oslash || b == Idem::Oslash {
                    Idem::Oslash
                } else {
                    Idem::Pounds
                };
                Scaled(p + q, idem)
            }
        }
    }

    /// Multiply by `eps^p`.
    pub fn scale(&self, p: Exp) -> Neutrix {
        match *self {
            Neutrix::Scaled(q, i) => Neutrix::Scaled(q + p, i),
            other => other,
        }
    }

    /// Whether `c * eps^p` (with `c` a nonzero standard real) lies in the set.
    pub fn contains_power(&self, p: Exp) -> bool {
        match *self {
            Neutrix::Zero | Neutrix::Meps | Neutrix::Mueps => false,
            Neutrix::Full => true,
            Neutrix::Scaled(q, Idem::Oslash) => p > q,
            Neutrix::Scaled(q, Idem::Pounds) => p >= q,
        }
    }

    /// Largest neutrix `A` with `A * self == self`-style absorption used by
    /// the stability test.
    pub fn absorber(&self) -> Neutrix {
        match self {
            Neutrix::Zero => Neutrix::Zero,
            Neutrix::Scaled(..) => Neutrix::OSLASH,
            Neutrix::Meps | Neutrix::Mueps => Neutrix::Mueps,
            Neutrix::Full => Neutrix::Zero,
        }
    }

    /// `self` is stable for `m` when the absorber of `m` lies inside `self`.
    pub fn is_stable_for(&self, m: &Neutrix) -> bool {
        m.absorber().is_subset_of(self)
    }

    pub fn token(&self) -> String {
        match *self {
            Neutrix::Zero => "0".to_string(),
            Neutrix::Meps => "Meps".to_string(),
            Neutrix::Mueps => "mueps".to_string(),
            Neutrix::Full => "R".to_string(),
            Neutrix::Scaled(q, i) => {
                let name = match i {
                    Idem::Oslash => "oslash",
                    Idem::Pounds => "pounds",
                };
                if q.is_zero() {
                    name.to_string()
                } else {
                    format!("{}*{}", eps_power(q), name)
                }
            }
        }
    }
}

impl PartialOrd for Neutrix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neutrix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for Neutrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Text for `eps^q`, e.g. `eps`, `eps^2`, `eps^-1`, `eps^(1/2)`.
pub fn eps_power(q: Exp) -> String {
    if q == Exp::from_integer(1) {
        "eps".to_string()
    } else if q.is_integer() {
        format!("eps^{}", q.to_integer())
    } else if q.is_negative() {
        format!("eps^(-{}/{})", -q.numer(), q.denom())
    } else {
        format!("eps^({}/{})", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<Neutrix> {
        vec![
            Neutrix::Zero,
            Neutrix::Mueps,
            Neutrix::Meps,
            Neutrix::oslash(exp(2)),
            Neutrix::pounds(exp(2)),
            Neutrix::oslash(exp(1)),
            Neutrix::pounds(exp(1)),
            Neutrix::OSLASH,
            Neutrix::POUNDS,
            Neutrix::pounds(exp(-1)),
            Neutrix::Full,
        ]
    }

    #[test]
    fn chain_is_strictly_increasing() {
        let v = all();
        for w in v.windows(2) {
            assert_eq!(w[0].relation(&w[1]), Inclusion::Subset, "{} {}", w[0], w[1]);
        }
    }

    #[test]
    fn mul_table() {
        let e = Neutrix::pounds(exp(1));
        assert_eq!(Neutrix::OSLASH.mul(&Neutrix::POUNDS), Neutrix::OSLASH);
        assert_eq!(Neutrix::POUNDS.mul(&Neutrix::POUNDS), Neutrix::POUNDS);
        assert_eq!(Neutrix::Meps.mul(&e), Neutrix::Meps);
        assert_eq!(e.mul(&Neutrix::oslash(exp(2))), Neutrix::oslash(exp(3)));
        assert_eq!(Neutrix::Mueps.mul(&Neutrix::Meps), Neutrix::Mueps);
        assert_eq!(Neutrix::Full.mul(&Neutrix::OSLASH), Neutrix::Full);
        assert_eq!(Neutrix::Zero.mul(&Neutrix::Full), Neutrix::Zero);
    }

    #[test]
    fn add_is_max() {
        assert_eq!(Neutrix::OSLASH.add(&Neutrix::pounds(exp(1))), Neutrix::OSLASH);
        assert_eq!(Neutrix::OSLASH.add(&Neutrix::POUNDS), Neutrix::POUNDS);
    }

    #[test]
    fn absorbers_and_stability() {
        assert_eq!(Neutrix::pounds(exp(1)).absorber(), Neutrix::OSLASH);
        assert_eq!(Neutrix::Meps.absorber(), Neutrix::Mueps);
        assert!(Neutrix::OSLASH.is_stable_for(&Neutrix::POUNDS));
        assert!(!Neutrix::pounds(exp(1)).is_stable_for(&Neutrix::OSLASH));
        assert!(Neutrix::Meps.is_stable_for(&Neutrix::Meps));
        assert!(Neutrix::Zero.is_stable_for(&Neutrix::Full));
    }

    #[test]
    fn power_membership() {
        assert!(Neutrix::OSLASH.contains_power(exp_frac(1, 2)));
        assert!(!Neutrix::OSLASH.contains_power(exp(0)));
        assert!(Neutrix::POUNDS.contains_power(exp(0)));
        assert!(!Neutrix::oslash(exp(2)).contains_power(exp(2)));
    }

    #[test]
    fn tokens() {
        assert_eq!(Neutrix::pounds(exp(1)).token(), "eps*pounds");
        assert_eq!(Neutrix::oslash(exp_frac(1, 2)).token(), "eps^(1/2)*oslash");
        assert_eq!(Neutrix::pounds(exp(-2)).token(), "eps^-2*pounds");
    }
}
