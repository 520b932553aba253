//! Boundary term rules: the limit contribution of one monomial
//! `c * eps^q * h1^k1 * h2^k2` (or `N * h1^k1 * h2^k2`) as each displacement
//! approaches its neutrix.

use crate::error::{Error, Result};
use crate::scale::{Exp, Idem, Neutrix};

/// How one displacement moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// The axis does not move; its powers must vanish.
    Frozen,
    /// `h` approaches `eps^m * base`. Outer: `|h|` stays above the neutrix.
    /// Inner: `h` may also lie inside it.
    Scaled { m: Exp, base: Idem, inner: bool },
    /// Ordinary limit `h -> 0`.
    Zero,
    /// `h` approaches a neutrix below every power of `eps`.
    Tiny(Neutrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Outer,
    Inner,
}

impl Regime {
    pub fn new(m: Neutrix, mode: Mode) -> Result<Regime> {
        match m {
            Neutrix::Full => Err(Error::Invalid("the neutrix of a point cannot be R".into())),
            Neutrix::Zero => Ok(Regime::Zero),
            Neutrix::Meps | Neutrix::Mueps => Ok(Regime::Tiny(m)),
            Neutrix::Scaled(q, base) => Ok(Regime::Scaled {
                m: q,
                base,
                inner: mode == Mode::Inner,
            }),
        }
    }

    pub fn outer(m: Neutrix) -> Result<Regime> {
        Regime::new(m, Mode::Outer)
    }

    pub fn inner(m: Neutrix) -> Result<Regime> {
        Regime::new(m, Mode::Inner)
    }

    pub fn is_tiny(&self) -> bool {
        matches!(self, Regime::Tiny(_))
    }
}

/// Coefficient of a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coef {
    /// A zeroless multiple of `eps^q`.
    Zeroless(Exp),
    /// A neutrix.
    Set(Neutrix),
}

fn widen(acc: Option<Idem>, f: Idem) -> Option<Idem> {
    match acc {
        Some(Idem::Oslash) => Some(Idem::Oslash),
        _ => Some(f),
    }
}

/// Neutrix that a nonconstant monomial tends to.
pub fn classify(coef: Coef, mono: [i32; 2], regimes: &[Regime; 2]) -> Neutrix {
    let (mut scale, mut class) = match coef {
        Coef::Set(Neutrix::Zero) => return Neutrix::Zero,
        Coef::Set(Neutrix::Full) => return Neutrix::Full,
        Coef::Set(Neutrix::Scaled(p, i)) => (p, Some(i)),
        Coef::Set(_) => (Exp::from_integer(0), None),
        Coef::Zeroless(q) => (q, None),
    };
    let tiny_coef = match coef {
        Coef::Set(n @ (Neutrix::Meps | Neutrix::Mueps)) => Some(n),
        _ => None,
    };
    let mut controlled_pounds = false;
    let mut vanish = false;
    let mut tiny = Neutrix::Zero;
    let mut tiny_inverse: Vec<Neutrix> = Vec::new();
    for (k, r) in mono.iter().zip(regimes) {
        let k = *k;
        if k == 0 {
            continue;
        }
        match *r {
            Regime::Frozen => return Neutrix::Full,
            Regime::Zero => {
                if k > 0 {
                    vanish = true;
                } else {
                    return Neutrix::Full;
                }
            }
            Regime::Tiny(t) => {
                if k > 0 {
                    tiny = tiny.add(&t);
                } else {
                    tiny_inverse.push(t);
                }
            }
            Regime::Scaled { m, base, inner } => {
                scale += m * Exp::from_integer(k as i64);
                if k > 0 {
                    if base == Idem::Pounds {
                        controlled_pounds = true;
                    }
                } else if inner {
                    return Neutrix::Full;
                } else {
                    let forced = match base {
                        Idem::Oslash => Idem::Pounds,
                        Idem::Pounds => Idem::Oslash,
                    };
                    class = widen(class, forced);
                }
            }
        }
    }
    if !tiny_inverse.is_empty() {
        return match tiny_coef {
            Some(Neutrix::Mueps) => Neutrix::Mueps,
            Some(Neutrix::Meps) if tiny_inverse.iter().all(|t| *t == Neutrix::Meps) && !vanish => Neutrix::Meps,
            _ => Neutrix::Full,
        };
    }
    if vanish {
        return Neutrix::Zero;
    }
    if let Some(t) = tiny_coef {
        return t;
    }
    if !tiny.is_zero() {
        return tiny;
    }
    let pounds = controlled_pounds || class == Some(Idem::Pounds);
    if pounds {
        Neutrix::pounds(scale)
    } else {
        Neutrix::oslash(scale)
    }
}
