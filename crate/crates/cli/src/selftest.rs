//! Self-test suites, one per acceptance area.
//!
//! 1. external-number algebra, 2. order, 3. derivative anchors,
//! 4. near-optimizer anchors, 5. Fermat anchors, 6. implicit function anchor,
//! 7. Lagrange anchor, 8. limit laws on random rational flexible functions,
//! 9. chain rules.

use crate::probe::{difference_quotient, Probe, ProbeError, ProbeResult, ProbeSettings};
use neutrix_core::calc::{chain_rule_verify, chain_rule_verify_2d, limit, neutrix_derivative, ExternalPoint, LimitKind};
use neutrix_core::flex::{eval, parse_expr, Expr};
use neutrix_core::opt::{
    fermat_certificate, find_near_optimizers, implicit_jet, implicit_solve, lagrange_solve, verdict_near_optimum,
    FermatVerdict, OptimalityQuery, Sense, Verdict,
};
use neutrix_core::scale::{exp, exp_frac, OrderPattern};
use neutrix_core::{AsymptoticReal, Error as CoreError, Exp, ExternalNumber, Idem, Neutrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

pub const SUITES: u8 = 9;

pub const ALGEBRA_NUMBERS: usize = 1000;
pub const ORDER_TRIPLES: usize = 10_000;
pub const LIMIT_FUNCTIONS: usize = 500;
pub const CHAIN_PAIRS: usize = 200;
pub const CHAIN_2D: usize = 12;

const COEFS: [f64; 8] = [-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0];
const LINE: [f64; 2] = [f64::NEG_INFINITY, f64::INFINITY];

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub id: u8,
    pub name: &'static str,
    pub checks: usize,
    /// Oracle checks declared skipped (`μ_ε`).
    pub skipped: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.budget.is_none_or(|b| self.elapsed < b)
    }
}

struct Tally {
    checks: usize,
    skipped: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally {
            checks: 0,
            skipped: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Display>(&mut self, what: &str, got: &T, want: &T) {
        self.check(got == want, || format!("{what}: got {got}, expected {want}"));
    }

    fn engine<T>(&mut self, what: &str, r: Result<T, CoreError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{what}: {e}"));
                None
            }
        }
    }

    /// An oracle verdict; only `μ_ε` skips are tolerated.
    fn oracle(&mut self, what: &str, r: ProbeResult<bool>) {
        self.checks += 1;
        match r {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("oracle disagrees: {what}")),
            Err(ProbeError::Skipped(_)) => self.skipped += 1,
            Err(e) => self.failures.push(format!("oracle: {what}: {e}")),
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.checks += other.checks;
        self.skipped += other.skipped;
        self.failures.extend(other.failures);
    }
}

pub fn suite_name(id: u8) -> &'static str {
    match id {
        1 => "algebra",
        2 => "order",
        3 => "derivative anchors",
        4 => "optimization anchors",
        5 => "fermat anchors",
        6 => "implicit anchor",
        7 => "lagrange anchor",
        8 => "limit laws",
        9 => "chain rules",
        _ => "unknown",
    }
}

fn budget(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        2 => Some(Duration::from_secs(30)),
        4 => Some(Duration::from_secs(120)),
        7 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

pub fn run_suite(id: u8, seed: u64, settings: &ProbeSettings) -> SuiteOutcome {
    let start = Instant::now();
    let settings = ProbeSettings {
        seed,
        ..settings.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(id) << 32));
    let t = match id {
        1 => algebra(&mut rng),
        2 => order(&mut rng),
        3 => derivative_anchors(&settings),
        4 => optimization_anchors(),
        5 => fermat_anchors(&settings),
        6 => implicit_anchor(&settings),
        7 => lagrange_anchor(&settings),
        8 => limit_laws(&mut rng, &settings),
        9 => chain_rules(&mut rng, &settings),
        _ => {
            let mut t = Tally::new();
            t.check(false, || format!("no suite {id}"));
            t
        }
    };
    let elapsed = start.elapsed();
    let mut failures = t.failures;
    let budget = budget(id);
    if let Some(b) = budget {
        if elapsed >= b {
            failures.push(format!("runtime {:.1} s exceeds {} s", elapsed.as_secs_f64(), b.as_secs()));
        }
    }
    SuiteOutcome {
        id,
        name: suite_name(id),
        checks: t.checks,
        skipped: t.skipped,
        failures,
        elapsed,
        budget,
    }
}

// ---------------------------------------------------------------- generators

fn half_exp(rng: &mut ChaCha8Rng) -> Exp {
    Exp::new(rng.gen_range(-4..=4), 2)
}

/// One of the five neutrix variants; scaled ones over exponents -2..2 in
/// steps of 1/2.
fn random_neutrix(rng: &mut ChaCha8Rng) -> Neutrix {
    match rng.gen_range(0..8) {
        0 => Neutrix::Zero,
        1 => Neutrix::Meps,
        2 => Neutrix::Mueps,
        3 => Neutrix::Full,
        k => Neutrix::Scaled(half_exp(rng), if k % 2 == 0 { Idem::Oslash } else { Idem::Pounds }),
    }
}

fn random_rep(rng: &mut ChaCha8Rng) -> AsymptoticReal {
    let n = rng.gen_range(0..=2);
    AsymptoticReal::from_terms((0..n).map(|_| (*COEFS.choose(rng).unwrap(), half_exp(rng))).collect::<Vec<_>>())
}

fn random_external(rng: &mut ChaCha8Rng) -> ExternalNumber {
    ExternalNumber::new(random_rep(rng), random_neutrix(rng))
}

// ------------------------------------------------------------ suites 1 and 2

fn lead(a: &ExternalNumber) -> ExternalNumber {
    ExternalNumber::precise(a.rep().clone())
}

fn algebra(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::new();
    let pool: Vec<ExternalNumber> = (0..ALGEBRA_NUMBERS).map(|_| random_external(rng)).collect();
    for a in &pool {
        let b = pool.choose(rng).unwrap();
        let c = pool.choose(rng).unwrap();
        t.eq("a + b = b + a", &a.add(b), &b.add(a));
        t.eq("(a + b) + c = a + (b + c)", &a.add(b).add(c), &a.add(&b.add(c)));
        t.eq("ab = ba", &a.mul(b), &b.mul(a));
        t.eq("(ab)c = a(bc)", &a.mul(b).mul(c), &a.mul(&b.mul(c)));
        let d = ExternalNumber::distributivity_check(a, b, c);
        t.check(d.lhs.contains(&d.rhs), || format!("subdistributivity for {a}, {b}, {c}"));
        let corrected = d
            .rhs
            .add(&ExternalNumber::from_neutrix(d.correction_alpha))
            .add(&ExternalNumber::from_neutrix(d.correction_beta));
        t.eq("distributivity with correction", &d.lhs, &corrected);
        if a.is_zeroless() {
            zeroless_clauses(&mut t, a, c, random_neutrix(rng));
        }
    }
    t
}

/// The six properties of a zeroless `a = α + A` against a number `g` and a
/// neutrix `b`.
fn zeroless_clauses(t: &mut Tally, a: &ExternalNumber, g: &ExternalNumber, b: Neutrix) {
    let nb = ExternalNumber::from_neutrix(b);
    let inv = a.inv().expect("zeroless numbers are invertible");
    t.eq("aB = αB", &a.mul(&nb), &lead(a).mul(&nb));
    t.eq("B/a = B/α", &nb.div(a).unwrap(), &nb.div(&lead(a)).unwrap());
    let sq = lead(a).mul(&lead(a));
    let want = ExternalNumber::from_neutrix(a.neutrix()).div(&sq).unwrap().neutrix();
    t.eq("N(1/a) = N(a)/a²", &inv.neutrix(), &want);
    t.check(a.relative_uncertainty().is_subset_of(&Neutrix::OSLASH), || format!("R({a}) ⊆ ⊘"));
    t.check(inv.relative_uncertainty().is_subset_of(&Neutrix::OSLASH), || format!("R(1/({a})) ⊆ ⊘"));
    let small = a.mul(&ExternalNumber::from_neutrix(Neutrix::OSLASH));
    t.check(a.disjoint(&small), || format!("{a} meets ⊘({a})"));
    let lhs = a.mul(g).neutrix();
    let rhs = lead(a)
        .mul(&ExternalNumber::from_neutrix(g.neutrix()))
        .neutrix()
        .add(&ExternalNumber::from_neutrix(a.neutrix()).mul(g).neutrix());
    t.eq("N(ag) = aN(g) + N(a)g", &lhs, &rhs);
    // limited and not an absorber of B: appreciable, or B absorbs no power of ε
    let order = a.rep().order().unwrap_or_default();
    let limited = order >= Exp::from_integer(0);
    let appreciable = order == Exp::from_integer(0);
    let rigid = matches!(b, Neutrix::Zero | Neutrix::Meps | Neutrix::Mueps | Neutrix::Full);
    if limited && (appreciable || rigid) {
        t.eq("aB = B", &a.mul(&nb), &nb);
        t.eq("B/a = B", &nb.div(a).unwrap(), &nb);
    }
}

fn order(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::new();
    let o = ExternalNumber::from_neutrix(Neutrix::OSLASH);
    let l = ExternalNumber::from_neutrix(Neutrix::POUNDS);
    t.check(o.leq(&l) && o.geq(&l), || "both ⊘ ≤ £ and ⊘ ≥ £".into());
    t.check(!l.leq(&o), || "£ ≰ ⊘".into());
    let pattern = o.compare(&l);
    t.check(pattern == OrderPattern::LeqAndGeq, || format!("pattern of ⊘ against £: {pattern:?}"));
    for _ in 0..ORDER_TRIPLES {
        let (a, b, c) = (random_external(rng), random_external(rng), random_external(rng));
        if a.leq(&b) && b.leq(&c) {
            t.check(a.leq(&c), || format!("{a} ≤ {b} ≤ {c} but not {a} ≤ {c}"));
        }
        if a.lt(&b) && b.lt(&c) {
            t.check(a.lt(&c), || format!("{a} < {b} < {c} but not {a} < {c}"));
        }
        // relations must also hold for a shuffled reading of the same triple
        if c.leq(&b) && b.leq(&a) {
            t.check(c.leq(&a), || format!("{c} ≤ {b} ≤ {a} but not {c} ≤ {a}"));
        }
    }
    t
}

// ------------------------------------------------------------- anchor suites

fn en(s: &str) -> ExternalNumber {
    s.parse().expect("anchor values parse")
}

fn expr(s: &str) -> Expr {
    parse_expr(s).expect("anchor expressions parse")
}

fn real(a: f64) -> AsymptoticReal {
    if a == 0.0 {
        AsymptoticReal::zero()
    } else {
        AsymptoticReal::constant(a)
    }
}

fn new_probe(settings: &ProbeSettings) -> Option<Probe> {
    Probe::new(settings.clone()).ok()
}

/// Oracle limit compared with an engine value; the verdict text carries the
/// estimate.
fn oracle_limit(pr: &Probe, e: &Expr, p: &ExternalPoint, v: &ExternalNumber) -> (String, ProbeResult<bool>) {
    match pr.limit(e, p, LimitKind::Outer) {
        Ok(est) => {
            let r = pr.agrees(&est, v);
            (format!(" (oracle {} + {}, spreads {:?})", est.center, est.neutrix.token(), est.spreads), r)
        }
        Err(e) => (String::new(), Err(e)),
    }
}

/// Oracle estimate of `D_M F(point)` compared with `d`.
fn oracle_derivative(pr: &Probe, f: &Expr, point: &[AsymptoticReal], axis: usize, m: Neutrix, d: &ExternalNumber) -> ProbeResult<bool> {
    let q = difference_quotient(f, point, axis);
    let (_, r) = oracle_limit(pr, &q, &ExternalPoint::one(AsymptoticReal::zero(), m), d);
    r
}

fn derivative_anchors(settings: &ProbeSettings) -> Tally {
    let mut t = Tally::new();
    let Some(pr) = new_probe(settings) else {
        t.check(false, || "probe settings rejected".into());
        return t;
    };
    let sqr = expr("x^2 + oslash");
    let mut anchors: Vec<(Expr, f64, Neutrix, ExternalNumber)> = [0.0, 1.0, -3.0]
        .iter()
        .map(|c| (sqr.clone(), *c, Neutrix::OSLASH, ExternalNumber::new(real(2.0 * c), Neutrix::OSLASH)))
        .collect();
    anchors.push((expr("x + x*oslash"), 0.0, Neutrix::OSLASH, en("1 + oslash")));
    anchors.push((expr("saw(x)"), 0.0, Neutrix::OSLASH, en("eps*pounds")));
    anchors.push((expr("saw(x)"), 0.0, Neutrix::pounds(exp(1)), en("oslash")));
    anchors.push((expr("exp(x)"), 0.0, Neutrix::OSLASH, en("1 + oslash")));
    for (f, a, m, want) in anchors {
        let what = format!("D_{m} at {a}");
        if let Some(d) = t.engine(&what, neutrix_derivative(&f, &real(a), m)) {
            t.eq(&what, &d.value, &want);
            t.oracle(&what, oracle_derivative(&pr, &f, &[real(a)], 0, m, &d.value));
        }
    }
    t
}

fn single_cluster(t: &mut Tally, what: &str, q: &OptimalityQuery, want: Option<ExternalNumber>) {
    let Some(r) = t.engine(what, find_near_optimizers(q)) else {
        return;
    };
    let got: Vec<String> = r.clusters.iter().map(|c| c.to_string()).collect();
    match want {
        Some(w) => {
            let ok = r.clusters.len() == 1 && r.clusters[0].as_external() == Some(&w) && r.undecided.is_empty();
            t.check(ok, || format!("{what}: clusters {got:?}, undecided {:?}, expected [{w}]", r.undecided));
        }
        None => t.check(r.clusters.is_empty(), || format!("{what}: expected no clusters, got {got:?}")),
    }
}

fn optimization_anchors() -> Tally {
    let mut t = Tally::new();
    let q = OptimalityQuery::global(expr("x^2 + eps*pounds"), LINE, Sense::Min, Neutrix::pounds(exp(1)));
    single_cluster(&mut t, "x^2 + ε£", &q, Some(ExternalNumber::from_neutrix(Neutrix::pounds(exp_frac(1, 2)))));
    let q = OptimalityQuery::global(expr("x^2 + oslash*x"), LINE, Sense::Min, Neutrix::OSLASH);
    single_cluster(&mut t, "x^2 + ⊘x", &q, Some(ExternalNumber::from_neutrix(Neutrix::OSLASH)));
    let cubic = expr("x^3 - 3*x + 1 + oslash*x");
    let local = |sense, m| OptimalityQuery::local(cubic.clone(), LINE, sense, m, Neutrix::OSLASH);
    single_cluster(&mut t, "cubic ⊘-local minimizers", &local(Sense::Min, Neutrix::OSLASH), Some(en("1 + oslash")));
    single_cluster(&mut t, "cubic ⊘-local maximizers", &local(Sense::Max, Neutrix::OSLASH), Some(en("-1 + oslash")));
    single_cluster(&mut t, "cubic £-local minimizers", &local(Sense::Min, Neutrix::POUNDS), None);
    single_cluster(&mut t, "cubic £-local maximizers", &local(Sense::Max, Neutrix::POUNDS), None);
    for (sense, a) in [(Sense::Min, 1.0), (Sense::Max, -1.0)] {
        let what = format!("£-local {} at {a}", sense.name());
        if let Some(v) = t.engine(&what, verdict_near_optimum(&local(sense, Neutrix::POUNDS), &[real(a)])) {
            t.eq(&what, &v.name(), &Verdict::Fails.name());
        }
    }
    t
}

fn fermat_anchors(settings: &ProbeSettings) -> Tally {
    let mut t = Tally::new();
    let Some(pr) = new_probe(settings) else {
        t.check(false, || "probe settings rejected".into());
        return t;
    };
    let sqr = expr("x^2 + oslash");
    let cases = [
        (sqr.clone(), 0.0, Neutrix::OSLASH, Some(FermatVerdict::CertifiedEquality)),
        (sqr, 1.0, Neutrix::OSLASH, Some(FermatVerdict::RejectedZeroless)),
        (expr("x^2 + saw(x)"), 0.0, Neutrix::OSLASH, None),
        (expr("x^2 + saw(x)"), 0.0, Neutrix::pounds(exp(1)), None),
    ];
    for (f, a, m, want) in cases {
        let what = format!("fermat at {a}, M = {m}");
        let Some(c) = t.engine(&what, fermat_certificate(&f, &real(a), m, Neutrix::OSLASH)) else {
            continue;
        };
        match want {
            Some(v) => t.check(c.verdict == v, || format!("{what}: {} expected {v}", c.verdict)),
            None => t.check(c.is_certified(), || format!("{what}: {}", c.verdict)),
        }
        t.oracle(&what, oracle_derivative(&pr, &f, &[real(a)], 0, m, &c.derivative));
    }
    t
}

fn implicit_anchor(settings: &ProbeSettings) -> Tally {
    let mut t = Tally::new();
    let g = expr("1 - x^2 - y^2");
    let point = (AsymptoticReal::zero(), real(1.0));
    let Some(r) = t.engine("implicit", implicit_solve(&g, (&point.0, &point.1), Neutrix::OSLASH, Neutrix::OSLASH)) else {
        return t;
    };
    t.eq("gamma_x", &r.gamma_x, &en("oslash"));
    t.eq("gamma_y", &r.gamma_y, &en("-2 + oslash"));
    t.eq("derivative bound", &r.derivative_bound, &en("oslash"));
    t.check(!r.witness.is_empty(), || "empty witness".into());
    for (x, y) in &r.witness {
        let residual = (1.0 - x * x - y * y).abs();
        t.check(residual < 1e-9, || format!("|g({x}, {y})| = {residual:e}"));
    }
    match new_probe(settings) {
        Some(pr) => t.oracle(
            "finite-difference slope inside the bound",
            pr.membership(&AsymptoticReal::constant(r.slope), &r.derivative_bound),
        ),
        None => t.check(false, || "probe settings rejected".into()),
    }
    t
}

pub const LAGRANGE_OBJECTIVE: &str = "-(1 + eps*oslash)*x - (1 + eps*pounds)*y^2 + oslash";
pub const LAGRANGE_CONSTRAINT: &str = "1 - x^2 - y^2";

fn lagrange_anchor(settings: &ProbeSettings) -> Tally {
    let mut t = Tally::new();
    let f = expr(LAGRANGE_OBJECTIVE);
    let g = expr(LAGRANGE_CONSTRAINT);
    let (a, b) = (real(0.5), real(3f64.sqrt() / 2.0));
    let Some(r) = t.engine("lagrange", lagrange_solve(&f, &g, (&a, &b), Neutrix::OSLASH, Neutrix::OSLASH)) else {
        return t;
    };
    t.check(r.lambda == 1.0, || format!("lambda = {}, expected 1", r.lambda));
    t.eq("L", &r.l, &Neutrix::OSLASH);
    t.eq("residual_x", &r.residual_x, &en("oslash"));
    t.eq("residual_y", &r.residual_y, &en("oslash"));
    t.check(r.certified, || "not certified".into());
    let sqrt3 = 3f64.sqrt();
    t.eq("dF/dx", &r.partials[0], &en("-1 + oslash"));
    t.eq("dF/dy", &r.partials[1], &ExternalNumber::new(real(-sqrt3), Neutrix::OSLASH));
    // the four values as displayed with the worked example
    t.check(r.constraint_partials[0] == 1.0, || format!("dg/dx = {}, displayed 1", r.constraint_partials[0]));
    t.check(
        (r.constraint_partials[1] - sqrt3).abs() < 1e-12,
        || format!("dg/dy = {}, displayed √3", r.constraint_partials[1]),
    );
    if let Some(pr) = new_probe(settings) {
        t.oracle("dF/dx", oracle_derivative(&pr, &f, &[a.clone(), b.clone()], 0, Neutrix::OSLASH, &r.partials[0]));
        t.oracle("dF/dy", oracle_derivative(&pr, &f, &[a, b], 1, Neutrix::OSLASH, &r.partials[1]));
    }
    t
}

// ------------------------------------------------------------------ suite 8

const POINTS: [f64; 5] = [-1.0, 0.0, 0.5, 1.0, 2.0];

fn limit_neutrices() -> [Neutrix; 4] {
    [
        Neutrix::OSLASH,
        Neutrix::oslash(exp_frac(1, 2)),
        Neutrix::pounds(exp(1)),
        Neutrix::pounds(exp_frac(1, 2)),
    ]
}

fn coefficient_neutrix(rng: &mut ChaCha8Rng) -> Neutrix {
    match rng.gen_range(0..40) {
        0 => Neutrix::Mueps,
        1 | 2 => Neutrix::Meps,
        k => [
            Neutrix::OSLASH,
            Neutrix::oslash(exp(1)),
            Neutrix::oslash(exp_frac(1, 2)),
            Neutrix::pounds(exp(1)),
            Neutrix::pounds(exp_frac(1, 2)),
            Neutrix::POUNDS,
        ][k % 6],
    }
}

fn poly(rng: &mut ChaCha8Rng, max_degree: i32) -> Expr {
    let mut e = Expr::c(*COEFS.choose(rng).unwrap());
    for k in 1..=rng.gen_range(0..=max_degree) {
        if rng.gen_bool(0.7) {
            e = Expr::add(e, Expr::mul(Expr::c(*COEFS.choose(rng).unwrap()), Expr::pow(Expr::x(), k)));
        }
    }
    e
}

fn shifted(a: f64) -> Expr {
    Expr::sub(Expr::x(), Expr::c(a))
}

/// A rational flexible function around `a`: a rational representative plus
/// neutrix terms `N (x - a)^k`, `k` in -1..=2.
fn rational(rng: &mut ChaCha8Rng, a: f64) -> Expr {
    let p = poly(rng, 3);
    let mut f = match rng.gen_range(0..4) {
        0 => p,
        1 => Expr::div(p, Expr::add(Expr::c(1.0), Expr::pow(Expr::x(), 2))),
        2 => Expr::div(p, Expr::sub(Expr::x(), Expr::c(if a > 0.0 { -2.5 } else { 3.5 }))),
        _ => {
            let at = p.substitute(neutrix_core::flex::Var::X, &Expr::c(a));
            Expr::div(Expr::sub(p, at), shifted(a))
        }
    };
    for _ in 0..rng.gen_range(0..=2) {
        let n = Expr::neutrix(coefficient_neutrix(rng));
        let term = match rng.gen_range(-1..=2) {
            -1 => Expr::div(n, shifted(a)),
            0 => n,
            k => Expr::mul(n, Expr::pow(shifted(a), k)),
        };
        f = Expr::add(f, term);
    }
    f
}

struct LawCase {
    f: Expr,
    g: Expr,
    a: f64,
    m: Neutrix,
    c: f64,
    /// `b + k (x - a) + j (x - a)^2` and the point `b` it lands on.
    phi: Expr,
    b: f64,
    outer: Expr,
}

fn law_case(rng: &mut ChaCha8Rng) -> LawCase {
    let a = *POINTS.choose(rng).unwrap();
    let b = *POINTS.choose(rng).unwrap();
    let k = *COEFS.choose(rng).unwrap();
    let j = [0.0, 1.0, -2.0][rng.gen_range(0..3)];
    let d = shifted(a);
    let phi = Expr::add(
        Expr::add(Expr::c(b), Expr::mul(Expr::c(k), d.clone())),
        Expr::mul(Expr::c(j), Expr::pow(d, 2)),
    );
    LawCase {
        f: rational(rng, a),
        g: rational(rng, a),
        a,
        m: *limit_neutrices().choose(rng).unwrap(),
        c: *COEFS.choose(rng).unwrap(),
        phi,
        b,
        outer: rational(rng, b),
    }
}

fn limit_laws(rng: &mut ChaCha8Rng, settings: &ProbeSettings) -> Tally {
    let cases: Vec<LawCase> = (0..LIMIT_FUNCTIONS).map(|_| law_case(rng)).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 8);
    let chunk = cases.len().div_ceil(workers);
    let tallies: Vec<Tally> = std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let mut t = Tally::new();
                    let Some(pr) = new_probe(settings) else {
                        t.check(false, || "probe settings rejected".into());
                        return t;
                    };
                    for case in part {
                        law_case_checks(&mut t, &pr, case);
                    }
                    t
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut t = Tally::new();
    for part in tallies {
        t.absorb(part);
    }
    t
}

fn law_case_checks(t: &mut Tally, pr: &Probe, case: &LawCase) {
    let p = ExternalPoint::real(case.a, case.m);
    let at = format!("at {}+{}", case.a, case.m.token());
    let lim = |t: &mut Tally, e: &Expr, what: &str| -> Option<ExternalNumber> {
        let v = t.engine(&format!("limit of {what} {at}"), limit(e, &p, LimitKind::Outer))?.value;
        let (est, oracle) = oracle_limit(pr, e, &p, &v);
        t.oracle(&format!("limit of {what} = {e} {at} = {v}{est}"), oracle);
        Some(v)
    };
    let (Some(alpha), Some(beta)) = (lim(t, &case.f, "F"), lim(t, &case.g, "G")) else {
        return;
    };
    if let Some(sum) = lim(t, &Expr::add(case.f.clone(), case.g.clone()), "F + G") {
        t.check(alpha.add(&beta).contains(&sum), || format!("sum law {at}: {sum} ⊄ {alpha} + {beta}"));
        t.check(sum.neutrix().is_subset_of(&alpha.neutrix().add(&beta.neutrix())), || {
            format!("sum law {at}: N({sum}) ⊄ N({alpha}) + N({beta})")
        });
    }
    let product = || Expr::mul(case.f.clone(), case.g.clone());
    if alpha.is_zeroless() || beta.is_zeroless() {
        if let Some(prod) = lim(t, &product(), "FG") {
            t.check(alpha.mul(&beta).contains(&prod), || format!("product law {at}: {prod} ⊄ ({alpha})({beta})"));
            let bound = alpha
                .mul(&ExternalNumber::from_neutrix(beta.neutrix()))
                .neutrix()
                .add(&beta.mul(&ExternalNumber::from_neutrix(alpha.neutrix())).neutrix());
            t.check(prod.neutrix().is_subset_of(&bound), || format!("product law {at}: N({prod}) ⊄ {bound}"));
        }
    } else if let (Neutrix::Scaled(pa, _), Neutrix::Scaled(qb, _)) = (alpha.neutrix(), beta.neutrix()) {
        if alpha.is_neutricial() && beta.is_neutricial() {
            if let Some(prod) = lim(t, &product(), "FG") {
                let bound = alpha.neutrix().scale(qb).add(&beta.neutrix().scale(pa));
                t.check(
                    ExternalNumber::from_neutrix(prod.neutrix()).contains(&prod) && prod.neutrix().is_subset_of(&bound),
                    || format!("neutricial product law {at}: {prod} ⊄ {bound}"),
                );
            }
        }
    }
    if let Some(scaled) = lim(t, &Expr::mul(Expr::c(case.c), case.f.clone()), "cF") {
        t.eq(&format!("scalar law {at}"), &scaled, &alpha.scale(case.c));
    }
    if alpha.is_zeroless() {
        if let Some(rec) = lim(t, &Expr::div(Expr::c(1.0), case.f.clone()), "1/F") {
            t.eq(&format!("reciprocal law {at}"), &rec, &alpha.inv().unwrap());
        }
    }
    change_of_variables(t, pr, case);
}

fn change_of_variables(t: &mut Tally, pr: &Probe, case: &LawCase) {
    let p = ExternalPoint::real(case.a, case.m);
    let Some(inner) = t.engine("limit of phi", limit(&case.phi, &p, LimitKind::Outer)) else {
        return;
    };
    // phi(a) = b and a standard nonzero slope keep phi outside b + N
    let n = inner.value.neutrix();
    if inner.value != ExternalNumber::new(real(case.b), n) || n != case.m {
        t.check(false, || format!("limit of phi at {}+{}: {}", case.a, case.m.token(), inner.value));
        return;
    }
    let q = ExternalPoint::real(case.b, n);
    let Some(gamma) = t.engine("limit of G", limit(&case.outer, &q, LimitKind::Outer)) else {
        return;
    };
    let comp = case.outer.substitute(neutrix_core::flex::Var::X, &case.phi);
    let Some(lhs) = t.engine("limit of G∘phi", limit(&comp, &p, LimitKind::Outer)) else {
        return;
    };
    t.check(gamma.value.contains(&lhs.value), || {
        format!("change of variables at {}+{}: {} ⊄ {}", case.a, case.m.token(), lhs.value, gamma.value)
    });
    let (est, oracle) = oracle_limit(pr, &comp, &p, &lhs.value);
    t.oracle(&format!("limit of G∘phi = {comp} at {}+{} = {}{est}", case.a, case.m.token(), lhs.value), oracle);
}

// ------------------------------------------------------------------ suite 9

/// Flexible polynomial around `b` with neutrix coefficients on some terms.
fn flexible_poly(rng: &mut ChaCha8Rng, b: f64) -> Expr {
    let mut f = Expr::c(0.0);
    for k in 0..=rng.gen_range(1..=3) {
        let c = *COEFS.choose(rng).unwrap();
        let coef = if rng.gen_bool(0.4) {
            let n = [Neutrix::OSLASH, Neutrix::oslash(exp(1)), Neutrix::pounds(exp(1))][rng.gen_range(0..3)];
            Expr::en(ExternalNumber::new(AsymptoticReal::constant(c), n))
        } else {
            Expr::c(c)
        };
        f = Expr::add(f, if k == 0 { coef } else { Expr::mul(coef, Expr::pow(shifted(b), k)) });
    }
    if rng.gen_bool(0.3) {
        f = Expr::add(f, Expr::neutrix(Neutrix::oslash(exp(1))));
    }
    f
}

fn inner_map(rng: &mut ChaCha8Rng, a: f64, b: f64) -> Expr {
    let k = *COEFS.choose(rng).unwrap();
    let d = shifted(a);
    let linear = Expr::mul(Expr::c(k), d.clone());
    let body = match rng.gen_range(0..3) {
        0 => linear,
        1 => Expr::add(linear, Expr::mul(Expr::c(*COEFS.choose(rng).unwrap()), Expr::pow(d, 2))),
        _ => Expr::mul(Expr::c(k), Expr::smooth(neutrix_core::flex::Prim::Sin, d)),
    };
    Expr::add(Expr::c(b), body)
}

fn chain_rules(rng: &mut ChaCha8Rng, settings: &ProbeSettings) -> Tally {
    let mut t = Tally::new();
    let Some(pr) = new_probe(settings) else {
        t.check(false, || "probe settings rejected".into());
        return t;
    };
    let ms = [Neutrix::OSLASH, Neutrix::oslash(exp_frac(1, 2)), Neutrix::pounds(exp(1))];
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < CHAIN_PAIRS && attempts < 4 * CHAIN_PAIRS {
        attempts += 1;
        let a = *POINTS.choose(rng).unwrap();
        let b = *POINTS.choose(rng).unwrap();
        let m = *ms.choose(rng).unwrap();
        let phi = inner_map(rng, a, b);
        let f = flexible_poly(rng, b);
        let Ok(lim) = limit(&phi, &ExternalPoint::real(a, m), LimitKind::Outer) else {
            continue;
        };
        let n = lim.value.neutrix();
        match chain_rule_verify(&f, &phi, &real(a), m, n) {
            Ok(rep) => {
                accepted += 1;
                t.check(rep.holds, || format!("chain rule at {a}+{}: {} ⊄ {}", m.token(), rep.lhs, rep.rhs));
                let comp = f.substitute(neutrix_core::flex::Var::X, &phi);
                let q = difference_quotient(&comp, &[real(a)], 0);
                let (est, r) = oracle_limit(&pr, &q, &ExternalPoint::one(AsymptoticReal::zero(), m), &rep.lhs);
                t.oracle(&format!("D_{} (F∘phi)({a}) = {} for F∘phi = {comp}{est}", m.token(), rep.lhs), r);
            }
            Err(CoreError::SideCondition(_)) => {}
            Err(e) => t.check(false, || format!("chain rule at {a}+{}: {e}", m.token())),
        }
    }
    t.check(accepted == CHAIN_PAIRS, || format!("only {accepted} of {CHAIN_PAIRS} pairs met the hypotheses"));
    chain_rules_2d(&mut t, rng);
    t
}

/// `F(x, y)` along `(x, h(x))` with `h` the implicit function of a conic
/// constraint, as in the Lagrange pipeline.
fn chain_rules_2d(t: &mut Tally, rng: &mut ChaCha8Rng) {
    let mut done = 0;
    let mut attempts = 0;
    while done < CHAIN_2D && attempts < 4 * CHAIN_2D {
        attempts += 1;
        let (p, r): (f64, f64) = ([1.0, 2.0, 0.5][rng.gen_range(0..3)], [1.0, 2.0, 0.5][rng.gen_range(0..3)]);
        let theta = std::f64::consts::PI * rng.gen_range(1..=5) as f64 / 12.0;
        let (a, b) = (theta.cos() / p.sqrt(), theta.sin() / r.sqrt());
        let g = Expr::sub(
            Expr::sub(Expr::c(1.0), Expr::mul(Expr::c(p), Expr::pow(Expr::x(), 2))),
            Expr::mul(Expr::c(r), Expr::pow(Expr::y(), 2)),
        );
        let Some(jet) = implicit_jet(&g, a, b, 6) else {
            t.check(false, || format!("no implicit jet at ({a}, {b})"));
            continue;
        };
        let h = jet.c.iter().enumerate().fold(Expr::c(0.0), |e, (k, c)| {
            if *c == 0.0 {
                e
            } else if k == 0 {
                Expr::add(e, Expr::c(*c))
            } else {
                Expr::add(e, Expr::mul(Expr::c(*c), Expr::pow(shifted(a), k as i32)))
            }
        });
        let u = *COEFS.choose(rng).unwrap();
        let v = *COEFS.choose(rng).unwrap();
        let fx = Expr::mul(Expr::en(ExternalNumber::new(AsymptoticReal::constant(u), Neutrix::oslash(exp(1)))), Expr::x());
        let fy = Expr::mul(
            Expr::en(ExternalNumber::new(AsymptoticReal::constant(v), Neutrix::pounds(exp(1)))),
            Expr::pow(Expr::y(), 2),
        );
        let f = Expr::add(Expr::add(fx, fy), Expr::neutrix(Neutrix::OSLASH));
        let at = [ExternalNumber::real(a)];
        let hb = eval(&h, &at).map(|v| v.rep().standard_part().unwrap_or(f64::NAN));
        if !hb.is_ok_and(|v| (v - b).abs() < 1e-9) {
            t.check(false, || format!("jet misses the point ({a}, {b})"));
            continue;
        }
        match chain_rule_verify_2d(&f, (&Expr::x(), &h), &real(a), Neutrix::OSLASH, (Neutrix::OSLASH, Neutrix::OSLASH)) {
            Ok(rep) => {
                done += 1;
                t.check(rep.holds, || format!("two-variable chain rule at ({a}, {b}): {} ⊄ {}", rep.lhs, rep.rhs));
            }
            Err(CoreError::SideCondition(_)) => {}
            Err(e) => t.check(false, || format!("two-variable chain rule at ({a}, {b}): {e}")),
        }
    }
    t.check(done == CHAIN_2D, || format!("only {done} of {CHAIN_2D} two-variable instances met the hypotheses"));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            assert_eq!(random_external(&mut r1), random_external(&mut r2));
        }
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let variants: std::collections::BTreeSet<u8> = (0..200)
            .map(|_| match random_neutrix(&mut r) {
                Neutrix::Zero => 0,
                Neutrix::Scaled(..) => 1,
                Neutrix::Meps => 2,
                Neutrix::Mueps => 3,
                Neutrix::Full => 4,
            })
            .collect();
        assert_eq!(variants.len(), 5);
    }
}
