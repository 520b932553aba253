//! Concrete-ε probe oracle.
//!
//! External sets are instantiated at a fixed small ε in high-precision
//! floating point. Magnitudes are classified by the exponent estimate
//! `q̂ = ln|x| / ln ε`. Limits are estimated from a ladder of displacements
//! approaching the boundary of `a + M`; the spread of the sampled values on
//! each rung gives an exponent sequence whose trend decides the neutrix.
//! Every rung is sampled at both ε and ε² with the same draws, and the two
//! exponents are combined as `2 q̂(ε²) - q̂(ε)`, which cancels the constant
//! factor of the spread.
//!
//! Constants of the classification:
//! - guard band `g` (default 1/4) around every scale threshold;
//! - `M_ε` members are the magnitudes with `q̂ > 3`; its constants are
//!   instantiated as `±ε^5`, and a limit neutrix whose exponent settles above
//!   `3 + g` is reported as `M_ε`;
//! - working precision is the requested digits plus `8·|log10 ε|`, so the
//!   deepest ladder rung `ε^8` stays resolvable;
//! - `μ_ε` cannot be resolved at a concrete ε (its cutoff `ε^{1/ε}` is below
//!   any working precision); anything involving it is reported as skipped.

use astro_float::{BigFloat, Consts, RoundingMode};
use neutrix_core::calc::{ExternalPoint, LimitKind, Mode};
use neutrix_core::flex::{Expr, Prim};
use neutrix_core::scale::{exp_frac, Exp, Idem};
use neutrix_core::{AsymptoticReal, ExternalNumber, Neutrix};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeSet, HashMap};

/// Magnitudes with `q̂` above this belong to `M_ε`.
pub const MEPS_THRESHOLD: f64 = 3.0;
/// Exponent of the `M_ε` witness.
const MEPS_WITNESS: i64 = 5;
/// Deepest ε-exponent a ladder sample reaches; working precision is raised
/// by this many powers of ε.
const LADDER_DEPTH: f64 = 8.0;
const H_COEFS: [f64; 5] = [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0];
const POUNDS_COEFS: [f64; 3] = [1.0 / 3.0, 1.0, 3.0];
const DRAWS: usize = 3;
/// Spread exponents changing less than this between the last rungs count as
/// constant.
const CONSTANT_TREND: f64 = 1e-3;
/// Largest distance of an extrapolated exponent from the grid of quarters.
const SNAP_TOLERANCE: f64 = 0.11;
/// `ε^p ⊘` constants are instantiated at `ε^{p + 1/16}`, inside the neutrix
/// and within the snapping tolerance of its scale.
const OSLASH_DEPTH: i64 = 16;
/// Exponent noise tolerated below a grid point when rounding down.
const INSIDE_NOISE: f64 = 0.03;
/// Relative difference below which two f64 representatives are the same.
const F64_ROUNDING: f64 = 1e-12;
/// Depth below the boundary, in powers of ε, of the inside samples of the
/// boundary rung.
const BOUNDARY_DEPTH: i64 = 4;

/// Rung parameters `κ`, approaching the boundary of the neighbourhood.
fn ladder() -> [Exp; 4] {
    [Exp::from_integer(1), exp_frac(1, 2), exp_frac(1, 4), exp_frac(1, 8)]
}

/// Where the sampled variation comes from.
#[derive(Clone, Copy, Debug)]
enum Source {
    /// The representative, every neutrix constant set to 0.
    Rep,
    /// The mixed difference of `F` in the neutrix constants of the mask.
    Mixed(u32),
}

/// Largest number of neutrix constants whose interactions are sampled.
const MAX_NODES: usize = 12;

/// Neutrices of the constants of `e` in evaluation order, and the masks of
/// the sets of one to three constants whose mixed difference can be nonzero.
/// A product mixes sets meeting both factors, a quotient sets meeting the
/// denominator, other nonlinear operations every set.
fn neutrix_nodes(e: &Expr) -> (Vec<Neutrix>, BTreeSet<u32>) {
    fn mark(all: &[usize], must: &[&[usize]], sets: &mut BTreeSet<u32>) {
        let all: Vec<usize> = all.iter().copied().filter(|&i| i < MAX_NODES).collect();
        let meets = |set: &[usize]| must.iter().all(|m| set.iter().any(|i| m.contains(i)));
        for (x, &i) in all.iter().enumerate() {
            for (y, &j) in all.iter().enumerate().skip(x + 1) {
                if meets(&[i, j]) {
                    sets.insert(1 << i | 1 << j);
                }
                for &k in &all[y + 1..] {
                    if meets(&[i, j, k]) {
                        sets.insert(1 << i | 1 << j | 1 << k);
                    }
                }
            }
        }
    }
    fn walk(e: &Expr, nodes: &mut Vec<Neutrix>, sets: &mut BTreeSet<u32>) -> Vec<usize> {
        match e {
            Expr::Const(c) => {
                if c.neutrix().is_zero() {
                    return Vec::new();
                }
                nodes.push(c.neutrix());
                vec![nodes.len() - 1]
            }
            Expr::Var(_) => Vec::new(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let left = walk(a, nodes, sets);
                let right = walk(b, nodes, sets);
                let all: Vec<usize> = left.iter().chain(&right).copied().collect();
                match e {
                    Expr::Mul(..) => mark(&all, &[&left, &right], sets),
                    Expr::Div(..) => mark(&all, &[&right], sets),
                    _ => {}
                }
                all
            }
            Expr::Neg(a) | Expr::Pow(a, 1) => walk(a, nodes, sets),
            Expr::Pow(a, _) | Expr::Smooth(_, a) | Expr::Saw(a) => {
                let all = walk(a, nodes, sets);
                mark(&all, &[], sets);
                all
            }
        }
    }
    let mut nodes = Vec::new();
    let mut sets = BTreeSet::new();
    walk(e, &mut nodes, &mut sets);
    sets.extend((0..nodes.len().min(MAX_NODES)).map(|i| 1u32 << i));
    (nodes, sets)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSettings {
    pub epsilon: f64,
    /// Decimal digits of working precision.
    pub digits: usize,
    pub guard_band: f64,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            epsilon: 1e-12,
            digits: 60,
            guard_band: 0.25,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProbeError {
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("non-stabilizing: {0}")]
    NonStabilizing(String),
    /// The question involves `μ_ε`, which a concrete ε cannot resolve.
    #[error("skipped: {0}")]
    Skipped(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type ProbeResult<T> = std::result::Result<T, ProbeError>;

/// Oracle estimate of a limit.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeLimit {
    /// Value at the smallest displacement of the last rung, neutrices set to 0.
    pub center: f64,
    /// Exponent estimate of `center` (infinite for 0).
    pub center_exponent: f64,
    pub neutrix: Neutrix,
    /// Spread exponent on each rung of the ladder.
    pub spreads: Vec<f64>,
    pub epsilon: f64,
}

impl ProbeLimit {
    /// Single-term rounding of the estimate.
    pub fn estimate(&self) -> ExternalNumber {
        let rep = if self.center == 0.0 || !self.center_exponent.is_finite() {
            AsymptoticReal::zero()
        } else {
            let q = snap(self.center_exponent, 8);
            AsymptoticReal::monomial(self.center / self.epsilon.powf(q), Exp::new((q * 8.0).round() as i64, 8))
        };
        ExternalNumber::new(rep, self.neutrix)
    }
}

fn snap(x: f64, denom: i64) -> f64 {
    (x * denom as f64).round() / denom as f64
}

pub struct Probe {
    settings: ProbeSettings,
    bits: usize,
    rm: RoundingMode,
    cc: RefCell<Consts>,
    ln_eps: BigFloat,
    powers: RefCell<HashMap<Exp, BigFloat>>,
    /// The same probe at ε².
    twin: OnceCell<Box<Probe>>,
}

/// How neutrix constants are instantiated while evaluating.
enum Witness<'a> {
    Zero,
    /// `⊘` constants are drawn at `ε^{p + rate κ}`, `£` constants at
    /// `c ε^{p - rate κ}`: both approach the boundary of their neutrix as
    /// `κ -> 0`, from inside and from outside.
    Draw { kappa: Exp, rate: Exp, rng: &'a mut ChaCha8Rng },
    /// The `j`-th neutrix constant takes the value `values[j]`, or 0.
    Fixed { values: &'a [Option<BigFloat>], seen: usize },
}

impl Probe {
    pub fn new(settings: ProbeSettings) -> ProbeResult<Probe> {
        if !(settings.epsilon > 0.0 && settings.epsilon < 1.0) {
            return Err(ProbeError::Unsupported("epsilon must lie in (0, 1)".into()));
        }
        let depth = LADDER_DEPTH * -settings.epsilon.log10();
        let bits = ((settings.digits as f64 + depth) * std::f64::consts::LOG2_10).ceil() as usize + 64;
        let mut cc = Consts::new().map_err(|e| ProbeError::Unsupported(format!("{e:?}")))?;
        let rm = RoundingMode::ToEven;
        let ln_eps = BigFloat::from_f64(settings.epsilon, bits).ln(bits, rm, &mut cc);
        Ok(Probe {
            settings,
            bits,
            rm,
            cc: RefCell::new(cc),
            ln_eps,
            powers: RefCell::new(HashMap::new()),
            twin: OnceCell::new(),
        })
    }

    pub fn settings(&self) -> &ProbeSettings {
        &self.settings
    }

    fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, self.rm)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, self.rm)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, self.rm)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> Option<BigFloat> {
        if b.is_zero() {
            return None;
        }
        Some(a.div(b, self.bits, self.rm))
    }

    /// `ε^q`.
    pub fn power(&self, q: Exp) -> BigFloat {
        if let Some(v) = self.powers.borrow().get(&q) {
            return v.clone();
        }
        let qf = self.div(&self.num(*q.numer() as f64), &self.num(*q.denom() as f64)).unwrap();
        let v = self.mul(&qf, &self.ln_eps).exp(self.bits, self.rm, &mut self.cc.borrow_mut());
        self.powers.borrow_mut().insert(q, v.clone());
        v
    }

    pub fn asym(&self, a: &AsymptoticReal) -> BigFloat {
        a.terms()
            .iter()
            .fold(self.num(0.0), |acc, t| self.add(&acc, &self.mul(&self.num(t.coef), &self.power(t.exp))))
    }

    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        format!("{x}").parse().unwrap_or(f64::NAN)
    }

    /// `ln|x| / ln ε`, infinite for 0.
    pub fn exponent(&self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return f64::INFINITY;
        }
        let l = x.abs().ln(self.bits, self.rm, &mut self.cc.borrow_mut());
        self.to_f64(&self.div(&l, &self.ln_eps).unwrap())
    }

    /// Decide `d ∈ N` for a concrete `d`.
    pub fn classify(&self, d: &BigFloat, n: &Neutrix) -> ProbeResult<bool> {
        let g = self.settings.guard_band;
        let q = self.exponent(d);
        match n {
            Neutrix::Zero => Ok(d.is_zero()),
            Neutrix::Full => Ok(true),
            Neutrix::Mueps => {
                if d.is_zero() {
                    Ok(true)
                } else {
                    Err(ProbeError::Skipped("membership in mu_eps".into()))
                }
            }
            Neutrix::Meps => {
                if q > MEPS_THRESHOLD + g {
                    Ok(true)
                } else if q < MEPS_THRESHOLD - g {
                    Ok(false)
                } else {
                    Err(ProbeError::Ambiguous(format!("exponent {q:.3} at the M_eps threshold")))
                }
            }
            Neutrix::Scaled(p, idem) => {
                let p = *p.numer() as f64 / *p.denom() as f64;
                if q > p + g {
                    return Ok(true);
                }
                if q < p - g {
                    return Ok(false);
                }
                // Inside the band the coefficient |d| / ε^p is appreciable.
                let above_one = q < p;
                match (idem, above_one) {
                    (Idem::Oslash, true) => Ok(false),
                    (Idem::Pounds, false) => Ok(true),
                    _ => Err(ProbeError::Ambiguous(format!("exponent {q:.3} within the guard band of {p}"))),
                }
            }
        }
    }

    /// `x ∈ S` at the concrete ε.
    pub fn membership(&self, x: &AsymptoticReal, s: &ExternalNumber) -> ProbeResult<bool> {
        let d = self.sub(&self.asym(x), &self.asym(s.rep()));
        self.classify(&d, &s.neutrix())
    }

    /// Members `rep + w` of an external number, with `w` drawn from the
    /// witness ladder of its neutrix.
    pub fn members(&self, x: &ExternalNumber, count: usize, rng: &mut ChaCha8Rng) -> ProbeResult<Vec<AsymptoticReal>> {
        let ladder = [exp_frac(1, 2), exp_frac(1, 4), exp_frac(1, 8)];
        let mut out = vec![x.rep().clone()];
        while out.len() < count {
            let kappa = ladder[rng.gen_range(0..ladder.len())];
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let w = match x.neutrix() {
                Neutrix::Zero => AsymptoticReal::zero(),
                Neutrix::Scaled(p, Idem::Oslash) => AsymptoticReal::monomial(sign, p + kappa),
                Neutrix::Scaled(p, Idem::Pounds) => {
                    AsymptoticReal::monomial(sign * POUNDS_COEFS[rng.gen_range(0..POUNDS_COEFS.len())], p)
                }
                Neutrix::Meps => AsymptoticReal::monomial(sign, Exp::from_integer(MEPS_WITNESS)),
                Neutrix::Mueps => return Err(ProbeError::Skipped("members of mu_eps".into())),
                Neutrix::Full => AsymptoticReal::monomial(sign, -Exp::from_integer(1) / kappa),
            };
            out.push(x.rep().add(&w));
        }
        Ok(out)
    }

    /// A member of `n` near its own scale: `±ε^{p + 1/16}` for `ε^p ⊘`,
    /// `c ε^p` for `ε^p £`.
    fn draw_node(&self, n: &Neutrix, rng: &mut ChaCha8Rng) -> ProbeResult<BigFloat> {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        Ok(match n {
            Neutrix::Zero => self.num(0.0),
            Neutrix::Scaled(p, Idem::Oslash) => self.mul(&self.num(sign), &self.power(*p + exp_frac(1, OSLASH_DEPTH))),
            Neutrix::Scaled(p, Idem::Pounds) => {
                let c = POUNDS_COEFS[rng.gen_range(0..POUNDS_COEFS.len())];
                self.mul(&self.num(sign * c), &self.power(*p))
            }
            Neutrix::Meps => self.mul(&self.num(sign), &self.power(Exp::from_integer(MEPS_WITNESS))),
            Neutrix::Mueps => return Err(ProbeError::Skipped("a mu_eps constant".into())),
            Neutrix::Full => return Err(ProbeError::Unsupported("an R constant".into())),
        })
    }

    fn witness(&self, n: &Neutrix, w: &mut Witness) -> ProbeResult<BigFloat> {
        let (kappa, rate, rng) = match w {
            Witness::Zero => return Ok(self.num(0.0)),
            Witness::Draw { kappa, rate, rng } => (*kappa, *rate, &mut **rng),
            Witness::Fixed { values, seen } => {
                *seen += 1;
                return Ok(values.get(*seen - 1).cloned().flatten().unwrap_or_else(|| self.num(0.0)));
            }
        };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        Ok(match n {
            Neutrix::Zero => self.num(0.0),
            Neutrix::Scaled(p, Idem::Oslash) => self.mul(&self.num(sign), &self.power(*p + kappa * rate)),
            Neutrix::Scaled(p, Idem::Pounds) => {
                let c = POUNDS_COEFS[rng.gen_range(0..POUNDS_COEFS.len())];
                self.mul(&self.num(sign * c), &self.power(*p - kappa * rate))
            }
            Neutrix::Meps => self.mul(&self.num(sign), &self.power(Exp::from_integer(MEPS_WITNESS))),
            Neutrix::Mueps => return Err(ProbeError::Skipped("a mu_eps constant".into())),
            Neutrix::Full => self.mul(&self.num(sign), &self.power(-Exp::from_integer(1) / kappa)),
        })
    }

    fn eval(&self, e: &Expr, x: &[BigFloat; 2], w: &mut Witness) -> ProbeResult<Option<BigFloat>> {
        macro_rules! sub {
            ($a:expr) => {
                match self.eval($a, x, w)? {
                    Some(v) => v,
                    None => return Ok(None),
                }
            };
        }
        let cc = || self.cc.borrow_mut();
        let p = self.bits;
        let rm = self.rm;
        Ok(Some(match e {
            Expr::Const(c) => {
                let base = self.asym(c.rep());
                let n = c.neutrix();
                if n.is_zero() {
                    base
                } else {
                    self.add(&base, &self.witness(&n, w)?)
                }
            }
            Expr::Var(v) => x[v.index()].clone(),
            Expr::Add(a, b) => {
                let a = sub!(a);
                self.add(&a, &sub!(b))
            }
            Expr::Sub(a, b) => {
                let a = sub!(a);
                self.sub(&a, &sub!(b))
            }
            Expr::Mul(a, b) => {
                let a = sub!(a);
                self.mul(&a, &sub!(b))
            }
            Expr::Div(a, b) => {
                let a = sub!(a);
                let b = sub!(b);
                match self.div(&a, &b) {
                    Some(v) => v,
                    None => return Ok(None),
                }
            }
            Expr::Neg(a) => sub!(a).neg(),
            Expr::Pow(a, k) => {
                let a = sub!(a);
                let v = a.powi(k.unsigned_abs() as usize, p, rm);
                if *k < 0 {
                    match self.div(&self.num(1.0), &v) {
                        Some(v) => v,
                        None => return Ok(None),
                    }
                } else {
                    v
                }
            }
            Expr::Smooth(prim, a) => {
                let a = sub!(a);
                match prim {
                    Prim::Exp => a.exp(p, rm, &mut cc()),
                    Prim::Sin => a.sin(p, rm, &mut cc()),
                    Prim::Cos => a.cos(p, rm, &mut cc()),
                    Prim::Ln => {
                        if !a.is_positive() || a.is_zero() {
                            return Ok(None);
                        }
                        a.ln(p, rm, &mut cc())
                    }
                    Prim::Sqrt => {
                        if a.is_negative() {
                            return Ok(None);
                        }
                        a.sqrt(p, rm)
                    }
                }
            }
            Expr::Saw(a) => {
                let u = sub!(a);
                let eps = self.power(Exp::from_integer(1));
                let k = self.div(&u, &eps).unwrap().floor();
                self.sub(&self.mul(&eps, &k), &u)
            }
        }))
    }

    /// Evaluate the representative of `f` at a real point.
    pub fn eval_at(&self, f: &Expr, x: &AsymptoticReal, y: &AsymptoticReal) -> ProbeResult<Option<f64>> {
        let v = self.eval(f, &[self.asym(x), self.asym(y)], &mut Witness::Zero)?;
        Ok(v.map(|v| self.to_f64(&v)))
    }

    /// Displacements `h` on one rung of the ladder for one axis.
    fn rung(&self, m: &Neutrix, mode: Mode, kappa: Exp, coefs: &[f64]) -> ProbeResult<Vec<BigFloat>> {
        let mut exps = Vec::new();
        let deep = if kappa.is_zero() {
            Exp::from_integer(BOUNDARY_DEPTH)
        } else {
            Exp::from_integer(1) / kappa
        };
        // £ rungs stay infinitesimal when the neutrix is
        let step = |p: Exp| if p > Exp::from_integer(0) { kappa * p.min(Exp::from_integer(1)) } else { kappa };
        match (m, mode) {
            (Neutrix::Zero, _) => exps.push(deep),
            (Neutrix::Scaled(p, Idem::Oslash), Mode::Outer) => exps.push(*p + kappa),
            (Neutrix::Scaled(p, Idem::Oslash), Mode::Inner) => exps.extend([*p + kappa, *p + deep]),
            (Neutrix::Scaled(p, Idem::Pounds), Mode::Outer) => exps.push(*p - step(*p)),
            (Neutrix::Scaled(p, Idem::Pounds), Mode::Inner) => exps.extend([*p - step(*p), *p, *p + deep]),
            (Neutrix::Mueps, _) => return Err(ProbeError::Skipped("a mu_eps neighbourhood".into())),
            (other, _) => return Err(ProbeError::Unsupported(format!("limits at the neutrix {other}"))),
        }
        let mut out = Vec::new();
        for q in exps {
            let base = self.power(q);
            for c in coefs {
                for s in [1.0, -1.0] {
                    out.push(self.mul(&self.num(s * c), &base));
                }
            }
        }
        Ok(out)
    }

    fn twin(&self) -> ProbeResult<&Probe> {
        if self.twin.get().is_none() {
            let settings = ProbeSettings {
                epsilon: self.settings.epsilon * self.settings.epsilon,
                ..self.settings.clone()
            };
            let _ = self.twin.set(Box::new(Probe::new(settings)?));
        }
        Ok(self.twin.get().expect("just set"))
    }

    /// Oracle estimate of the limit of `f` at `p`.
    ///
    /// The ladder runs at ε² (and ε⁴ for the twin), where the shallowest
    /// displacements beyond the boundary are still clearly infinitesimal.
    /// The variation of the representative and the mixed differences in the
    /// neutrix constants are classified separately and added. At `⊘` and `0`
    /// scales a mixed difference takes the product class of its constants; at
    /// `£` scales the direction in which it approaches the boundary decides,
    /// unless it does not depend on `h`.
    pub fn limit(&self, f: &Expr, p: &ExternalPoint, kind: LimitKind) -> ProbeResult<ProbeLimit> {
        let dim = p.dim();
        if dim == 0 || dim > 2 {
            return Err(ProbeError::Unsupported("points have one or two coordinates".into()));
        }
        self.twin()?.limit_here(f, p, kind)
    }

    fn limit_here(&self, f: &Expr, p: &ExternalPoint, kind: LimitKind) -> ProbeResult<ProbeLimit> {
        let dim = p.dim();
        let (nodes, sets) = neutrix_nodes(f);
        if nodes.contains(&Neutrix::Mueps) {
            return Err(ProbeError::Skipped("a mu_eps constant".into()));
        }
        let (spreads, center) = self.twin_spreads(f, &nodes, p, kind, Source::Rep, &ladder())?;
        let mut neutrix = self.trend(&spreads, Idem::Pounds, false)?;
        let axes = &p.neutrices[..dim];
        let pounds = axes.iter().any(|n| matches!(n, Neutrix::Scaled(_, Idem::Pounds)));
        let boundary = !pounds
            && !axes.iter().any(|n| n.is_zero())
            && kind.modes()[..dim].iter().all(|m| matches!(m, Mode::Outer));
        for mask in sets {
            let members: Vec<&Neutrix> = nodes.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, n)| n).collect();
            if members.contains(&&Neutrix::Full) {
                neutrix = Neutrix::Full;
                continue;
            }
            let idem = if members.iter().any(|n| matches!(n, Neutrix::Scaled(_, Idem::Oslash))) {
                Idem::Oslash
            } else {
                Idem::Pounds
            };
            let part = if boundary {
                let (e, _) = self.twin_spreads(f, &nodes, p, kind, Source::Mixed(mask), &[Exp::zero()])?;
                self.scaled(e[0], idem, idem == Idem::Oslash)?
            } else {
                let (e, _) = self.twin_spreads(f, &nodes, p, kind, Source::Mixed(mask), &ladder())?;
                match (self.trend(&e, idem, idem == Idem::Oslash)?, pounds) {
                    (Neutrix::Scaled(q, _), false) => Neutrix::Scaled(q, idem),
                    (other, _) => other,
                }
            };
            neutrix = neutrix.add(&part);
        }
        Ok(ProbeLimit {
            center: self.to_f64(&center),
            center_exponent: self.exponent(&center),
            neutrix,
            spreads,
            epsilon: self.settings.epsilon,
        })
    }

    /// Spread exponents at ε and ε², combined as `2 q̂(ε²) - q̂(ε)`.
    fn twin_spreads(
        &self,
        f: &Expr,
        nodes: &[Neutrix],
        p: &ExternalPoint,
        kind: LimitKind,
        source: Source,
        kappas: &[Exp],
    ) -> ProbeResult<(Vec<f64>, BigFloat)> {
        let (near, center) = self.ladder(f, nodes, p, kind, source, kappas)?;
        let (far, _) = self.twin()?.ladder(f, nodes, p, kind, source, kappas)?;
        let spreads = near
            .iter()
            .zip(&far)
            .map(|(a, b)| if a.is_infinite() || b.is_infinite() { f64::INFINITY } else { 2.0 * b - a })
            .collect();
        Ok((spreads, center))
    }

    /// `Σ ± F` over the subsets of `mask`, the constants outside a subset set
    /// to 0, and the largest `|F|` of the sum; `None` if some evaluation hits
    /// a pole.
    fn mixed(
        &self,
        f: &Expr,
        pt: &[BigFloat; 2],
        v0: &BigFloat,
        mask: u32,
        values: &[Option<BigFloat>],
    ) -> ProbeResult<Option<(BigFloat, BigFloat)>> {
        let mut total = self.num(0.0);
        let mut largest = v0.abs();
        let mut sub = mask;
        loop {
            let v = if sub == 0 {
                v0.clone()
            } else {
                let kept: Vec<Option<BigFloat>> = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| if sub >> j & 1 == 1 { v.clone() } else { None })
                    .collect();
                let mut w = Witness::Fixed { values: &kept, seen: 0 };
                match self.eval(f, pt, &mut w)? {
                    Some(v) => v,
                    None => return Ok(None),
                }
            };
            if v.abs().cmp(&largest).is_some_and(|o| o > 0) {
                largest = v.abs();
            }
            total = if (mask.count_ones() - sub.count_ones()) % 2 == 0 {
                self.add(&total, &v)
            } else {
                self.sub(&total, &v)
            };
            if sub == 0 {
                return Ok(Some((total, largest)));
            }
            sub = (sub - 1) & mask;
        }
    }

    /// Spread exponent of the sampled values on each rung, and the centre.
    fn ladder(
        &self,
        f: &Expr,
        nodes: &[Neutrix],
        p: &ExternalPoint,
        kind: LimitKind,
        source: Source,
        kappas: &[Exp],
    ) -> ProbeResult<(Vec<f64>, BigFloat)> {
        let modes = kind.modes();
        let dim = p.dim();
        let centers: Vec<BigFloat> = p.centers.iter().map(|a| self.asym(a)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        let floor_bits = self.bits as i32 - 24;
        let mut spreads = Vec::new();
        let mut center = None;
        let mut samples = Vec::new();
        for &kappa in kappas {
            let coefs: &[f64] = if dim == 1 { &H_COEFS } else { &POUNDS_COEFS };
            let h1 = self.rung(&p.neutrices[0], modes[0], kappa, coefs)?;
            let h2 = if dim == 2 {
                self.rung(&p.neutrices[1], modes[1], kappa, coefs)?
            } else {
                vec![self.num(0.0)]
            };
            let y0 = if dim == 2 { centers[1].clone() } else { self.num(0.0) };
            let mut lo: Option<BigFloat> = None;
            let mut hi: Option<BigFloat> = None;
            let mut scale = self.num(0.0);
            // the centre comes from the rung closest to the limit regime
            center = None;
            samples.clear();
            for a in &h1 {
                for b in &h2 {
                    let pt = [self.add(&centers[0], a), self.add(&y0, b)];
                    // samples that hit a pole are left out
                    let Some(v0) = self.eval(f, &pt, &mut Witness::Zero)? else {
                        continue;
                    };
                    let mut values = Vec::new();
                    match source {
                        Source::Rep => {
                            samples.push((self.to_f64(a), v0.clone()));
                            let size = (a.abs(), b.abs());
                            let better = match &center {
                                None => true,
                                Some((s, _)) => {
                                    let (s1, s2): &(BigFloat, BigFloat) = s;
                                    size.0.cmp(s1).is_some_and(|o| o < 0) || (size.0 == *s1 && size.1.cmp(s2).is_some_and(|o| o < 0))
                                }
                            };
                            if better {
                                center = Some((size, v0.clone()));
                            }
                            values.push(v0.clone());
                        }
                        Source::Mixed(mask) => {
                            values.push(self.num(0.0));
                            for _ in 0..DRAWS {
                                let mut drawn = Vec::with_capacity(nodes.len());
                                for (j, n) in nodes.iter().enumerate() {
                                    drawn.push(if mask >> j & 1 == 1 { Some(self.draw_node(n, &mut rng)?) } else { None });
                                }
                                if let Some((v, largest)) = self.mixed(f, &pt, &v0, mask, &drawn)? {
                                    if largest.cmp(&scale).is_some_and(|o| o > 0) {
                                        scale = largest;
                                    }
                                    values.push(v);
                                }
                            }
                        }
                    }
                    if v0.abs().cmp(&scale).is_some_and(|o| o > 0) {
                        scale = v0.abs();
                    }
                    for v in values {
                        if v.abs().cmp(&scale).is_some_and(|o| o > 0) {
                            scale = v.abs();
                        }
                        if lo.as_ref().is_none_or(|l| v.cmp(l).is_some_and(|o| o < 0)) {
                            lo = Some(v.clone());
                        }
                        if hi.as_ref().is_none_or(|h| v.cmp(h).is_some_and(|o| o > 0)) {
                            hi = Some(v);
                        }
                    }
                }
            }
            let (Some(hi), Some(lo)) = (hi, lo) else {
                return Err(ProbeError::Unsupported("the function is undefined near the point".into()));
            };
            let spread = self.sub(&hi, &lo);
            let noise = scale.exponent().map(|e| e - floor_bits);
            let negligible = match (spread.exponent(), noise) {
                (_, None) => true,
                (Some(e), Some(n)) => e <= n,
                (None, _) => true,
            };
            spreads.push(if spread.is_zero() || negligible { f64::INFINITY } else { self.exponent(&spread) });
        }
        let c = match center {
            Some((_, c)) if dim == 1 => self.extrapolate(&c, &samples),
            Some((_, c)) => c,
            None => self.num(0.0),
        };
        Ok((spreads, c))
    }

    /// Value at `h = 0` of a least-squares polynomial through the samples
    /// `(h, F(a + h))` of one rung, relative to `base`.
    fn extrapolate(&self, base: &BigFloat, samples: &[(f64, BigFloat)]) -> BigFloat {
        const DEGREE: usize = 4;
        let width = samples.iter().fold(0.0f64, |w, (h, _)| w.max(h.abs()));
        if samples.len() <= DEGREE || width == 0.0 || !width.is_finite() {
            return base.clone();
        }
        let rows: Vec<(f64, f64)> = samples.iter().map(|(h, v)| (h / width, self.to_f64(&self.sub(v, base)))).collect();
        if rows.iter().any(|(_, d)| !d.is_finite()) {
            return base.clone();
        }
        // normal equations, solved by Gaussian elimination with pivoting
        let n = DEGREE + 1;
        let mut a = vec![vec![0.0; n + 1]; n];
        for (u, d) in &rows {
            let pw: Vec<f64> = (0..n).map(|k| u.powi(k as i32)).collect();
            for i in 0..n {
                for j in 0..n {
                    a[i][j] += pw[i] * pw[j];
                }
                a[i][n] += pw[i] * d;
            }
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            if a[col][col].abs() < 1e-300 {
                return base.clone();
            }
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        self.add(base, &self.num(a[0][n] / a[0][0]))
    }

    /// Neutrix from the spread exponents along the ladder; a constant trend
    /// has the class `constant`.
    fn trend(&self, e: &[f64], constant: Idem, inside: bool) -> ProbeResult<Neutrix> {
        let n = e.len();
        let (e1, e2, e3) = (e[n - 3], e[n - 2], e[n - 1]);
        if e3.is_infinite() {
            return Ok(Neutrix::Zero);
        }
        let scaled = |x: f64, idem: Idem| self.scaled(x, idem, inside);
        let d2 = e3 - e2;
        if d2.abs() < CONSTANT_TREND {
            return scaled(e3, constant);
        }
        let d1 = if e1.is_infinite() { f64::INFINITY } else { e2 - e1 };
        let r = d2 / d1;
        if r >= 1.5 || (d1.is_infinite() && d2 > 0.0) {
            return Ok(if d2 > 0.0 { Neutrix::Zero } else { Neutrix::Full });
        }
        if (0.3..=0.7).contains(&r) {
            let limit = e3 + d2 * r / (1.0 - r);
            return scaled(limit, if d2 < 0.0 { Idem::Oslash } else { Idem::Pounds });
        }
        Err(ProbeError::NonStabilizing(format!("spread exponents {e:?}")))
    }

    /// Neutrix of class `idem` at the grid exponent nearest `x`. With
    /// `inside`, the sample involved `⊘` witnesses, up to three of which lift
    /// the exponent by `1/16` each, and `x` is rounded down to the grid.
    fn scaled(&self, x: f64, idem: Idem, inside: bool) -> ProbeResult<Neutrix> {
        if x.is_infinite() {
            return Ok(Neutrix::Zero);
        }
        if x > MEPS_THRESHOLD + self.settings.guard_band {
            return Ok(Neutrix::Meps);
        }
        let s = if inside { ((x + INSIDE_NOISE) * 4.0).floor() / 4.0 } else { snap(x, 4) };
        if !inside && (x - s).abs() > SNAP_TOLERANCE {
            return Err(ProbeError::NonStabilizing(format!("limit exponent {x:.3} is off the grid")));
        }
        Ok(Neutrix::Scaled(Exp::new((s * 4.0).round() as i64, 4), idem))
    }

    /// Whether a concrete value lies in `s`. A precise `s` is matched with a
    /// relative tolerance of 1e-9.
    pub fn within(&self, v: &BigFloat, s: &ExternalNumber) -> ProbeResult<bool> {
        let rep = self.asym(s.rep());
        let d = self.sub(v, &rep);
        if s.neutrix().is_zero() {
            let tol = 1e-9 * self.to_f64(&rep).abs().max(1e-300);
            return Ok(self.to_f64(&d).abs() <= tol);
        }
        self.classify(&d, &s.neutrix())
    }

    /// Every sampled member of `F(point)` lies in `value`: the representative
    /// and `draws` instantiations of the neutrix constants.
    pub fn check_value(&self, f: &Expr, point: &[AsymptoticReal], value: &ExternalNumber, draws: usize) -> ProbeResult<bool> {
        let mut x = [self.num(0.0), self.num(0.0)];
        for (slot, a) in x.iter_mut().zip(point) {
            *slot = self.asym(a);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        for draw in 0..=draws {
            let mut w = if draw == 0 {
                Witness::Zero
            } else {
                Witness::Draw {
                    kappa: exp_frac(1, 2),
                    rate: Exp::from_integer(2),
                    rng: &mut rng,
                }
            };
            let Some(v) = self.eval(f, &x, &mut w)? else {
                return Err(ProbeError::Unsupported("the function is undefined at the point".into()));
            };
            if !self.within(&v, value)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether an engine value is consistent with the oracle estimate: equal
    /// neutrices and the representative not definitely outside.
    pub fn agrees(&self, est: &ProbeLimit, value: &ExternalNumber) -> ProbeResult<bool> {
        if value.neutrix() == Neutrix::Mueps {
            return Err(ProbeError::Skipped("mu_eps limit".into()));
        }
        if est.epsilon != self.settings.epsilon {
            return self.twin()?.agrees(est, value);
        }
        if est.neutrix != value.neutrix() {
            return Ok(false);
        }
        if est.neutrix == Neutrix::Full {
            return Ok(true);
        }
        // representatives computed in f64 are matched up to their rounding
        let rep = self.to_f64(&self.asym(value.rep()));
        if (est.center - rep).abs() <= F64_ROUNDING * est.center.abs().max(rep.abs()) {
            return Ok(true);
        }
        match self.within(&self.num(est.center), value) {
            Ok(b) => Ok(b),
            Err(ProbeError::Ambiguous(_)) => Ok(true),
            Err(e) => Err(e),
        }
    }
}

/// `(F(a + h e_axis) - F(a)) / h` as a function of `h`, written with `x`.
pub fn difference_quotient(f: &Expr, point: &[AsymptoticReal], axis: usize) -> Expr {
    let at = |i: usize| Expr::en(ExternalNumber::precise(point.get(i).cloned().unwrap_or_else(AsymptoticReal::zero)));
    let moved = f.map_vars(&|v| {
        let i = v.index();
        Some(if i == axis { Expr::add(at(i), Expr::x()) } else { at(i) })
    });
    let fixed = f.map_vars(&|v| Some(at(v.index())));
    Expr::div(Expr::sub(moved, fixed), Expr::x())
}

#[cfg(test)]
mod tests {
    use super::*;
    use neutrix_core::flex::parse_expr;
    use neutrix_core::scale::exp;

    fn probe() -> Probe {
        Probe::new(ProbeSettings::default()).unwrap()
    }

    fn en(s: &str) -> ExternalNumber {
        s.parse().unwrap()
    }

    #[test]
    fn membership_examples() {
        let p = probe();
        let x = AsymptoticReal::monomial(5.0, exp(2));
        assert_eq!(p.membership(&x, &en("eps*pounds")), Ok(true));
        assert_eq!(p.membership(&x, &en("eps^2*oslash")), Ok(false));
        let near = AsymptoticReal::monomial(1.0, Exp::new(999, 1000));
        assert!(matches!(p.membership(&near, &en("eps*pounds")), Err(ProbeError::Ambiguous(_))));
        assert_eq!(p.membership(&AsymptoticReal::constant(2.0), &en("oslash")), Ok(false));
        assert_eq!(p.membership(&AsymptoticReal::monomial(1.0, exp_frac(1, 2)), &en("oslash")), Ok(true));
    }

    fn lim(src: &str, a: f64, m: &str, kind: LimitKind) -> ProbeLimit {
        let f = parse_expr(src).unwrap();
        probe().limit(&f, &ExternalPoint::real(a, m.parse().unwrap()), kind).unwrap()
    }

    fn agrees(src: &str, a: f64, m: &str, kind: LimitKind, expected: &str) {
        let est = lim(src, a, m, kind);
        assert!(probe().agrees(&est, &en(expected)).unwrap(), "{src}: {est:?} vs {expected}");
    }

    #[test]
    fn limit_examples() {
        agrees("oslash/x", 0.0, "oslash", LimitKind::Outer, "oslash");
        agrees("((x)^2 + oslash - (1 + oslash))/(x - 1)", 1.0, "oslash", LimitKind::Outer, "2 + oslash");
        agrees("saw(x)/x", 0.0, "eps*pounds", LimitKind::Outer, "oslash");
        agrees("saw(x)/x", 0.0, "oslash", LimitKind::Outer, "eps*pounds");
        agrees("(exp(x) - 1)/x", 0.0, "oslash", LimitKind::Outer, "1 + oslash");
        let q = lim("x^2 + 3", 1.0, "0", LimitKind::Outer);
        assert_eq!(q.estimate(), en("4"));
        assert!(!probe().agrees(&q, &en("4.001")).unwrap());
        assert!(!probe().agrees(&lim("(exp(x) - 1)/x", 0.0, "oslash", LimitKind::Outer), &en("3 + oslash")).unwrap());
    }

    #[test]
    fn limit_classes() {
        assert_eq!(lim("x^2", 1.0, "0", LimitKind::Outer).neutrix, Neutrix::Zero);
        assert_eq!(lim("x + eps*pounds", 0.0, "0", LimitKind::Outer).neutrix, Neutrix::pounds(exp(1)));
        assert_eq!(lim("1/x", 0.0, "oslash", LimitKind::Outer).neutrix, Neutrix::POUNDS);
        assert_eq!(lim("1/x", 0.0, "oslash", LimitKind::Inner).neutrix, Neutrix::Full);
        assert_eq!(lim("x", 0.0, "pounds", LimitKind::Inner).neutrix, Neutrix::POUNDS);
        assert_eq!(lim("1/x", 0.0, "eps*pounds", LimitKind::Outer).neutrix, Neutrix::oslash(exp(-1)));
    }
}
