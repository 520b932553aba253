//! Expression trees for flexible functions of one or two variables.

use crate::scale::{ExternalNumber, Neutrix};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Exp => "exp",
            Prim::Ln => "ln",
            Prim::Sin => "sin",
            Prim::Cos => "cos",
            Prim::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Prim> {
        Some(match s {
            "exp" => Prim::Exp,
            "ln" => Prim::Ln,
            "sin" => Prim::Sin,
            "cos" => Prim::Cos,
            "sqrt" => Prim::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(ExternalNumber),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Smooth(Prim, Box<Expr>),
    /// `eps*floor(u/eps) - u`
    Saw(Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(ExternalNumber::real(v))
    }

    pub fn en(v: ExternalNumber) -> Expr {
        Expr::Const(v)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    pub fn neutrix(n: Neutrix) -> Expr {
        Expr::Const(ExternalNumber::from_neutrix(n))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    pub fn smooth(p: Prim, a: Expr) -> Expr {
        Expr::Smooth(p, Box::new(a))
    }

    pub fn saw(a: Expr) -> Expr {
        Expr::Saw(Box::new(a))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => vec![a, b],
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Smooth(_, a) | Expr::Saw(a) => vec![a],
        }
    }

    /// No constant carries a neutrix.
    pub fn is_internal(&self) -> bool {
        match self {
            Expr::Const(c) => c.is_precise(),
            _ => self.children().iter().all(|e| e.is_internal()),
        }
    }

    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Var(w) => *w == v,
            _ => self.children().iter().any(|e| e.uses(v)),
        }
    }

    pub fn contains_saw(&self) -> bool {
        match self {
            Expr::Saw(_) => true,
            _ => self.children().iter().any(|e| e.contains_saw()),
        }
    }

    pub fn contains_smooth(&self) -> bool {
        match self {
            Expr::Smooth(..) => true,
            _ => self.children().iter().any(|e| e.contains_smooth()),
        }
    }

    /// Polynomial in the variables: no division by variable terms, no
    /// negative powers of variable terms, no primitives or saw.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Expr::Div(a, b) => a.is_polynomial() && !b.uses(Var::X) && !b.uses(Var::Y),
            Expr::Neg(a) => a.is_polynomial(),
            Expr::Pow(a, k) => a.is_polynomial() && (*k >= 0 || (!a.uses(Var::X) && !a.uses(Var::Y))),
            Expr::Smooth(_, a) | Expr::Saw(a) => !a.uses(Var::X) && !a.uses(Var::Y),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|e| e.node_count()).sum::<usize>()
    }

    /// Replace a variable by an expression.
    pub fn substitute(&self, v: Var, with: &Expr) -> Expr {
        self.map_vars(&|w| if w == v { Some(with.clone()) } else { None })
    }

    pub fn map_vars(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        let r = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(w) => f(*w).unwrap_or_else(|| self.clone()),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Pow(a, k) => Expr::Pow(r(a), *k),
            Expr::Smooth(p, a) => Expr::Smooth(*p, r(a)),
            Expr::Saw(a) => Expr::Saw(r(a)),
        }
    }

    /// Drop every neutrix, leaving the internal representative.
    pub fn representative(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(ExternalNumber::precise(c.rep().clone())),
            _ => self.map_children(|e| e.representative()),
        }
    }

    pub fn map_children(&self, f: impl Fn(&Expr) -> Expr) -> Expr {
        let r = |e: &Expr| Box::new(f(e));
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(r(a), r(b)),
            Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
            Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
            Expr::Div(a, b) => Expr::Div(r(a), r(b)),
            Expr::Neg(a) => Expr::Neg(r(a)),
            Expr::Pow(a, k) => Expr::Pow(r(a), *k),
            Expr::Smooth(p, a) => Expr::Smooth(*p, r(a)),
            Expr::Saw(a) => Expr::Saw(r(a)),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) => const_prec(c),
            _ => 5,
        }
    }
}

/// Binding strength of a constant's printed form.
fn const_prec(c: &ExternalNumber) -> u8 {
    let t = c.rep().terms();
    if c.is_neutricial() {
        return if c.neutrix().token().contains('*') { 2 } else { 5 };
    }
    if !c.is_precise() || t.len() != 1 {
        return 1;
    }
    let (coef, q) = (t[0].coef, t[0].exp);
    let standard = q == 0.into();
    match (coef > 0.0, standard) {
        (true, true) => 5,
        (true, false) if coef == 1.0 => {
            if q == 1.into() {
                5
            } else {
                4
            }
        }
        (false, true) => 3,
        _ => 2,
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.prec() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("/")?;
                wrap(f, b, 3)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, 4)
            }
            Expr::Pow(a, k) => {
                wrap(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Smooth(p, a) => write!(f, "{}({a})", p.name()),
            Expr::Saw(a) => write!(f, "saw({a})"),
        }
    }
}
