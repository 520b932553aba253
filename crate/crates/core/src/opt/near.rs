//! Near-minimizers, local near-minimizers and the Fermat certificate.

use super::scales::{domain_reach, local_reach, Profile, Side, Verdict};
use crate::calc::{expand, neutrix_derivative, Context, Regime, Series};
use crate::error::{Error, Result};
use crate::flex::{eval, Expr, Var};
use crate::scale::{AsymptoticReal, ExternalNumber, Neutrix};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub fn name(self) -> &'static str {
        match self {
            Sense::Min => "min",
            Sense::Max => "max",
        }
    }
}

/// `F(x) >= F(a) + N` for all feasible `x`, or for all `x` in some
/// `M`-neighborhood of `a + M` when `m` is given.
#[derive(Clone, Debug)]
pub struct OptimalityQuery {
    pub objective: Expr,
    /// Real bounds per axis; infinite ends are allowed.
    pub domain: Vec<[f64; 2]>,
    pub sense: Sense,
    pub m: Option<Vec<Neutrix>>,
    pub n: Neutrix,
}

impl OptimalityQuery {
    pub fn global(objective: Expr, domain: [f64; 2], sense: Sense, n: Neutrix) -> Self {
        OptimalityQuery {
            objective,
            domain: vec![domain],
            sense,
            m: None,
            n,
        }
    }

    pub fn local(objective: Expr, domain: [f64; 2], sense: Sense, m: Neutrix, n: Neutrix) -> Self {
        OptimalityQuery {
            objective,
            domain: vec![domain],
            sense,
            m: Some(vec![m]),
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == Neutrix::Full {
            return Err(Error::Invalid("N must be strictly contained in R".into()));
        }
        if self.domain.is_empty() || self.domain.len() > 2 {
            return Err(Error::Invalid("domain has one or two axes".into()));
        }
        if self.domain.iter().any(|d| d[0].is_nan() || d[1].is_nan() || d[0] > d[1]) {
            return Err(Error::Invalid("empty domain".into()));
        }
        if let Some(m) = &self.m {
            if m.len() != self.domain.len() {
                return Err(Error::Invalid("one M per axis".into()));
            }
            if m.contains(&Neutrix::Full) {
                return Err(Error::Invalid("M must be strictly contained in R".into()));
            }
        }
        if self.domain.len() == 1 && self.objective.uses(Var::Y) {
            return Err(Error::Invalid("objective uses y on a one-dimensional domain".into()));
        }
        Ok(())
    }

    /// The objective to minimize.
    pub(crate) fn signed(&self) -> Expr {
        match self.sense {
            Sense::Min => self.objective.clone(),
            Sense::Max => Expr::neg(self.objective.clone()),
        }
    }
}

pub(crate) fn sides(a: &AsymptoticReal, bounds: [f64; 2], m: Option<Neutrix>) -> Result<[Side; 2]> {
    let mut out = [Side {
        sign: 1.0,
        reach: super::scales::Reach::Empty,
    }; 2];
    for (i, sign) in [1.0, -1.0].into_iter().enumerate() {
        let dom = domain_reach(a, bounds, sign)?;
        let reach = match m {
            Some(m) => local_reach(m, dom)?,
            None => dom,
        };
        out[i] = Side { sign, reach };
    }
    Ok(out)
}

/// Decide minimality from a series of `F(a+s)` in `s`.
pub(crate) fn verdict_from_series(series: &Series, fa: Neutrix, n: Neutrix, sides: &[Side; 2]) -> Result<Verdict> {
    let profile = Profile::new(series, fa, n)?;
    if !profile.is_exact() && !sides.iter().all(|s| s.reach.is_small()) {
        return Ok(Verdict::Undecided);
    }
    Ok(profile.check(sides))
}

/// Three-valued form of [`check_near_optimum`].
pub fn verdict_near_optimum(q: &OptimalityQuery, a: &[AsymptoticReal]) -> Result<Verdict> {
    q.validate()?;
    if a.len() != 1 || q.domain.len() != 1 {
        return Err(Error::Unsupported("near-optimality is certified on one-dimensional domains".into()));
    }
    let a = &a[0];
    let f = q.signed();
    let m = q.m.as_ref().map(|m| m[0]);
    let sides = sides(a, q.domain[0], m)?;
    let at = ExternalNumber::precise(a.clone());
    let fa = eval(&f, std::slice::from_ref(&at))?;
    let ctx = Context::new([Regime::inner(Neutrix::OSLASH)?, Regime::Frozen]);
    let series = match expand(&f, &[Series::shifted(at, 0), Series::zero()], &ctx) {
        Ok(s) => s,
        Err(Error::Unsupported(_)) => return Ok(Verdict::Undecided),
        Err(e) => return Err(e),
    };
    match verdict_from_series(&series, fa.neutrix(), q.n, &sides) {
        Err(Error::Unsupported(_)) => Ok(Verdict::Undecided),
        other => other,
    }
}

/// Whether `a` is an `N`-optimizer (or `M`-local `N`-optimizer) of the query.
pub fn check_near_optimum(q: &OptimalityQuery, a: &[AsymptoticReal]) -> Result<bool> {
    match verdict_near_optimum(q, a)? {
        Verdict::Holds => Ok(true),
        Verdict::Fails => Ok(false),
        Verdict::Undecided => Err(Error::Undecided(format!(
            "neither certified nor falsified at {}",
            a.iter().map(crate::scale::text::render_asym).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// A certified `M`-local `N`-optimizer stays one for smaller `M'` and
/// larger `N'`. With `audit` the shrunken query is verified again.
pub fn monotonicity_shrink(q: &OptimalityQuery, a: &[AsymptoticReal], m2: &[Neutrix], n2: Neutrix, audit: bool) -> Result<bool> {
    q.validate()?;
    if let Some(m) = &q.m {
        if m.len() != m2.len() || m.iter().zip(m2).any(|(big, small)| !small.is_subset_of(big)) {
            return Err(Error::Invalid("M' must be contained in M".into()));
        }
    } else if m2.len() != q.domain.len() {
        return Err(Error::Invalid("one M' per axis".into()));
    }
    if !q.n.is_subset_of(&n2) {
        return Err(Error::Invalid("N' must contain N".into()));
    }
    if !audit {
        return Ok(true);
    }
    let shrunk = OptimalityQuery {
        m: Some(m2.to_vec()),
        n: n2,
        ..q.clone()
    };
    check_near_optimum(&shrunk, a)
}

#[derive(Clone, Debug, PartialEq)]
pub enum FermatVerdict {
    CertifiedInclusion,
    CertifiedEquality,
    RejectedZeroless,
    HypothesesUnmet(Vec<String>),
}

impl fmt::Display for FermatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FermatVerdict::CertifiedInclusion => write!(f, "certified-inclusion"),
            FermatVerdict::CertifiedEquality => write!(f, "certified-equality"),
            FermatVerdict::RejectedZeroless => write!(f, "rejected-zeroless"),
            FermatVerdict::HypothesesUnmet(l) => write!(f, "hypotheses-unmet({})", l.join("; ")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermatCertificate {
    pub point: AsymptoticReal,
    pub m: Neutrix,
    pub l: Neutrix,
    pub derivative: ExternalNumber,
    pub verdict: FermatVerdict,
}

impl FermatCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, FermatVerdict::CertifiedInclusion | FermatVerdict::CertifiedEquality)
    }
}

/// Fermat's rule for `M`-local `L`-minimizers of `F` on the real line.
pub fn fermat_certificate(f: &Expr, a: &AsymptoticReal, m: Neutrix, l: Neutrix) -> Result<FermatCertificate> {
    let derivative = neutrix_derivative(f, a, m)?.value;
    let cert = |verdict| FermatCertificate {
        point: a.clone(),
        m,
        l,
        derivative: derivative.clone(),
        verdict,
    };
    if derivative.is_zeroless() {
        return Ok(cert(FermatVerdict::RejectedZeroless));
    }
    let fa = eval(f, &[ExternalNumber::precise(a.clone())])?;
    let mut unmet = Vec::new();
    if !l.is_stable_for(&m) {
        unmet.push(format!("L = {l} is not stable for M = {m}"));
    }
    if !fa.neutrix().is_subset_of(&l) {
        unmet.push(format!("L does not contain N(F(a)) = {}", fa.neutrix()));
    }
    if !derivative.neutrix().is_subset_of(&l) {
        unmet.push(format!("L does not contain N(D) = {}", derivative.neutrix()));
    }
    if !unmet.is_empty() {
        return Ok(cert(FermatVerdict::HypothesesUnmet(unmet)));
    }
    let q = OptimalityQuery::local(f.clone(), [f64::NEG_INFINITY, f64::INFINITY], Sense::Min, m, l);
    let verdict = match verdict_near_optimum(&q, std::slice::from_ref(a))? {
        Verdict::Holds => {
            let lset = ExternalNumber::from_neutrix(l);
            if lset == derivative {
                FermatVerdict::CertifiedEquality
            } else if lset.contains(&derivative) {
                FermatVerdict::CertifiedInclusion
            } else {
                FermatVerdict::HypothesesUnmet(vec![format!("derivative {derivative} escapes L = {l}")])
            }
        }
        Verdict::Fails => FermatVerdict::HypothesesUnmet(vec!["a is not an M-local L-minimizer".into()]),
        Verdict::Undecided => FermatVerdict::HypothesesUnmet(vec!["M-local L-minimality is undecided".into()]),
    };
    Ok(cert(verdict))
}

/// Axis-frozen Fermat certificates for a function of `(x, y)`.
pub fn fermat_two_variable(
    f: &Expr,
    a: (&AsymptoticReal, &AsymptoticReal),
    m: (Neutrix, Neutrix),
    l: Neutrix,
) -> Result<[FermatCertificate; 2]> {
    let konst = |v: &AsymptoticReal| Expr::en(ExternalNumber::precise(v.clone()));
    let along_x = f.substitute(Var::Y, &konst(a.1));
    let b = konst(a.0);
    let along_y = f.map_vars(&|v| match v {
        Var::X => Some(b.clone()),
        Var::Y => Some(Expr::x()),
    });
    let fa = eval(f, &[ExternalNumber::precise(a.0.clone()), ExternalNumber::precise(a.1.clone())])?;
    let mut extra = Vec::new();
    let smaller = if m.0 <= m.1 { m.0 } else { m.1 };
    if !l.is_stable_for(&smaller) {
        extra.push(format!("L = {l} is not stable for min(M1, M2)"));
    }
    if !fa.neutrix().is_subset_of(&l) {
        extra.push(format!("L does not contain N(F(a)) = {}", fa.neutrix()));
    }
    let mut out = [
        fermat_certificate(&along_x, a.0, m.0, l)?,
        fermat_certificate(&along_y, a.1, m.1, l)?,
    ];
    if !extra.is_empty() {
        for c in out.iter_mut() {
            match &mut c.verdict {
                FermatVerdict::HypothesesUnmet(list) => list.extend(extra.iter().cloned()),
                FermatVerdict::RejectedZeroless => {}
                v => *v = FermatVerdict::HypothesesUnmet(extra.clone()),
            }
        }
    }
    Ok(out)
}
