//! Command dispatch.

use crate::probe::{difference_quotient, Probe, ProbeSettings};
use crate::problem::Problem;
use crate::report::{OracleSummary, Outcome, Report};
use crate::selftest;
use neutrix_core::calc::{limit, neutrix_derivative, partial_derivative, ExternalPoint, LimitKind};
use neutrix_core::flex::{eval, Expr, Var};
use neutrix_core::opt::{
    fermat_certificate, fermat_two_variable, find_near_optimizers, implicit_solve, lagrange_solve, monotonicity_shrink,
    verdict_near_optimum, FermatCertificate, FermatVerdict, OptimalityQuery, Sense, Verdict,
};
use neutrix_core::scale::text::render_asym;
use neutrix_core::scale::exp_frac;
use neutrix_core::{AsymptoticReal, Error as CoreError, ExternalNumber, Idem, Neutrix};
use num_traits::{One, Zero};
use serde_json::json;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub audit: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Input(String),
}

type CmdResult = Result<Report, CommandError>;

/// `⊘`, `ε£`, `ε^(1/2)⊘`, `M_ε`, ...
pub fn symbol(n: &Neutrix) -> String {
    match n {
        Neutrix::Zero => "0".into(),
        Neutrix::Meps => "M_ε".into(),
        Neutrix::Mueps => "μ_ε".into(),
        Neutrix::Full => "R".into(),
        Neutrix::Scaled(q, idem) => {
            let base = match idem {
                Idem::Oslash => "⊘",
                Idem::Pounds => "£",
            };
            if q.is_zero() {
                base.into()
            } else if q.is_one() {
                format!("ε{base}")
            } else if q.is_integer() {
                format!("ε^{q}{base}")
            } else {
                format!("ε^({q}){base}")
            }
        }
    }
}

fn need<'a, T>(v: &'a Option<T>, what: &str, cmd: &str) -> Result<&'a T, CommandError> {
    v.as_ref().ok_or_else(|| CommandError::Input(format!("`{cmd}` needs `{what}`")))
}

fn point_text(p: &[AsymptoticReal]) -> String {
    p.iter().map(render_asym).collect::<Vec<_>>().join(", ")
}

fn tokens(ns: &[Neutrix]) -> Vec<String> {
    ns.iter().map(Neutrix::token).collect()
}

fn verdict_status(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

/// Errors of the engine become report outcomes; malformed input becomes an
/// input error.
fn engine_failure(mut r: Report, e: CoreError) -> CmdResult {
    let outcome = match &e {
        CoreError::Parse { .. } | CoreError::Invalid(_) | CoreError::Domain(_) => {
            return Err(CommandError::Input(e.to_string()))
        }
        CoreError::HypothesisFailed(_) | CoreError::SideCondition(_) | CoreError::NotZeroless(_) => Outcome::HypothesesUnmet,
        CoreError::NoSignChange(_) | CoreError::WitnessNotFound(_) => Outcome::NotCertified,
        _ => Outcome::Undecided,
    };
    r.outcome = outcome;
    r.notes.push(e.to_string());
    Ok(r)
}

macro_rules! attempt {
    ($r:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return engine_failure($r, e),
        }
    };
}

fn probe(p: &Problem, opts: &RunOptions) -> Result<Probe, CommandError> {
    Probe::new(ProbeSettings {
        seed: opts.seed,
        ..p.oracle.clone()
    })
    .map_err(|e| CommandError::Input(e.to_string()))
}

fn base_report(cmd: &str, p: &Problem) -> Report {
    let mut r = Report::new(cmd);
    if let Some(t) = &p.objective_text {
        r.input("objective", t.as_str());
    }
    if let Some(t) = &p.constraint_text {
        r.input("constraint", t.as_str());
    }
    if !p.point.is_empty() {
        r.input("point", p.point.iter().map(render_asym).collect::<Vec<_>>());
    }
    if !p.m.is_empty() {
        r.input("m", tokens(&p.m));
    }
    if let Some(n) = &p.n {
        r.input("n", n.token());
    }
    if let Some(l) = &p.l {
        r.input("l", l.token());
    }
    r
}

pub fn run_command(cmd: &str, p: &Problem, opts: &RunOptions) -> CmdResult {
    match cmd {
        "eval" => cmd_eval(p, opts),
        "limit" => cmd_limit(p, opts),
        "derive" => cmd_derive(p, opts),
        "optimize" => cmd_optimize(p, opts),
        "fermat" => cmd_fermat(p, opts),
        "implicit" => cmd_implicit(p, opts),
        "lagrange" => cmd_lagrange(p, opts),
        "selftest" => Ok(cmd_selftest(p, opts)),
        other => Err(CommandError::Input(format!("unknown command `{other}`"))),
    }
}

fn point_for(f: &Expr, p: &Problem, cmd: &str) -> Result<Vec<AsymptoticReal>, CommandError> {
    let dim = if f.uses(Var::Y) { 2 } else { 1 };
    if p.point.len() < dim {
        return Err(CommandError::Input(format!("`{cmd}` needs a point with {dim} coordinate(s)")));
    }
    Ok(p.point.clone())
}

fn m_for(p: &Problem, dim: usize, cmd: &str) -> Result<Vec<Neutrix>, CommandError> {
    match p.m.len() {
        0 => Err(CommandError::Input(format!("`{cmd}` needs `m`"))),
        1 => Ok(vec![p.m[0]; dim]),
        k if k == dim => Ok(p.m.clone()),
        _ => Err(CommandError::Input("`m` needs one neutrix per coordinate".into())),
    }
}

fn cmd_eval(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "eval")?;
    let point = point_for(f, p, "eval")?;
    let mut r = base_report("eval", p);
    let at: Vec<ExternalNumber> = point.iter().cloned().map(ExternalNumber::precise).collect();
    let v = attempt!(r, eval(f, &at));
    r.summary.push(format!("F({}) = {v}", point_text(&point)));
    r.result("value", v.to_string());
    let mut o = OracleSummary::default();
    o.record("sampled members", probe(p, opts)?.check_value(f, &point, &v, 8));
    r.oracle = Some(o);
    Ok(r)
}

fn cmd_limit(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "limit")?;
    let point = point_for(f, p, "limit")?;
    let m = m_for(p, point.len(), "limit")?;
    let ep = ExternalPoint {
        centers: point.clone(),
        neutrices: m.clone(),
    };
    let mut r = base_report("limit", p);
    r.input("kind", p.limit.name());
    let res = attempt!(r, limit(f, &ep, p.limit));
    let at = point.iter().zip(&m).map(|(a, n)| format!("{}+{}", render_asym(a), symbol(n))).collect::<Vec<_>>().join(", ");
    r.summary.push(format!("lim_({at}) F = {}", res.value));
    r.result("value", res.value.to_string());
    r.result("minimal", res.minimal);
    if res.numeric {
        r.result("numeric", true);
    }
    let pr = probe(p, opts)?;
    let mut o = OracleSummary::default();
    o.record("limit", pr.limit(f, &ep, p.limit).and_then(|est| pr.agrees(&est, &res.value)));
    r.oracle = Some(o);
    Ok(r)
}

/// Oracle check of an `M`-derivative along one axis.
fn oracle_derivative(pr: &Probe, f: &Expr, point: &[AsymptoticReal], axis: usize, m: Neutrix, d: &ExternalNumber) -> crate::probe::ProbeResult<bool> {
    let q = difference_quotient(f, point, axis);
    let est = pr.limit(&q, &ExternalPoint::one(AsymptoticReal::zero(), m), LimitKind::Outer)?;
    pr.agrees(&est, d)
}

fn cmd_derive(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "derive")?;
    let point = point_for(f, p, "derive")?;
    let m = m_for(p, point.len(), "derive")?;
    let mut r = base_report("derive", p);
    let pr = probe(p, opts)?;
    let mut o = OracleSummary::default();
    if point.len() == 1 {
        let d = attempt!(r, neutrix_derivative(f, &point[0], m[0]));
        r.summary.push(format!("D_{}F({}) = {}", symbol(&m[0]), render_asym(&point[0]), d.value));
        r.result("derivative", d.value.to_string());
        r.result("ordinary", d.ordinary.to_string());
        r.result("singular", tokens(&d.singular));
        r.result("minimal", d.minimal);
        r.result("consistent", d.consistent);
        r.notes.extend(d.warnings.iter().cloned());
        o.record("derivative", oracle_derivative(&pr, f, &point, 0, m[0], &d.value));
    } else {
        let at = (&point[0], &point[1]);
        for (axis, var, name) in [(0, Var::X, "x"), (1, Var::Y, "y")] {
            let d = attempt!(r, partial_derivative(f, at, var, m[axis]));
            r.summary.push(format!("∂F/∂_{}{name}({}) = {}", symbol(&m[axis]), point_text(&point), d.value));
            r.result(&format!("partial_{name}"), d.value.to_string());
            o.record(&format!("partial in {name}"), oracle_derivative(&pr, f, &point, axis, m[axis], &d.value));
        }
    }
    r.oracle = Some(o);
    Ok(r)
}

fn domain_of(p: &Problem) -> [f64; 2] {
    p.domain.first().copied().unwrap_or([f64::NEG_INFINITY, f64::INFINITY])
}

fn cmd_optimize(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "optimize")?;
    let n = *need(&p.n, "n", "optimize")?;
    if f.uses(Var::Y) || p.domain.len() > 1 {
        return Err(CommandError::Input("`optimize` works on one-dimensional problems".into()));
    }
    let mut r = base_report("optimize", p);
    r.input("sense", p.sense.name());
    let q = OptimalityQuery {
        objective: f.clone(),
        domain: vec![domain_of(p)],
        sense: p.sense,
        m: if p.m.is_empty() { None } else { Some(vec![p.m[0]]) },
        n,
    };
    let scan = attempt!(r, find_near_optimizers(&q));
    let what = match (p.sense, q.m.is_some()) {
        (Sense::Min, false) => format!("{}-minimizers", symbol(&n)),
        (Sense::Max, false) => format!("{}-maximizers", symbol(&n)),
        (Sense::Min, true) => format!("{}-local {}-minimizers", symbol(&p.m[0]), symbol(&n)),
        (Sense::Max, true) => format!("{}-local {}-maximizers", symbol(&p.m[0]), symbol(&n)),
    };
    let clusters: Vec<String> = scan.clusters.iter().map(|c| c.to_string()).collect();
    r.summary.push(format!("{what}: {}", if clusters.is_empty() { "none".to_string() } else { clusters.join(", ") }));
    r.result("clusters", clusters);
    if !scan.undecided.is_empty() {
        r.result("undecided", scan.undecided.clone());
        r.outcome = Outcome::Undecided;
    }
    if let Some(a) = p.point.first() {
        let a = std::slice::from_ref(a);
        let v = attempt!(r, verdict_near_optimum(&q, a));
        r.result("candidate", v.name());
        match v {
            Verdict::Holds => {
                if let Some(m) = &q.m {
                    // A smaller M and a larger N keep the certificate.
                    let m2 = m[0].scale(exp_frac(1, 2));
                    let n2 = n.scale(exp_frac(-1, 2));
                    if n2 != Neutrix::Full {
                        let kept = attempt!(r, monotonicity_shrink(&q, a, &[m2], n2, opts.audit));
                        let how = if opts.audit { "re-verified" } else { "by monotonicity" };
                        r.check(format!("M' = {}, N' = {} ({how})", m2.token(), n2.token()), verdict_status(kept));
                    }
                }
            }
            Verdict::Fails => r.outcome = Outcome::NotCertified,
            Verdict::Undecided => r.outcome = Outcome::Undecided,
        }
        if r.outcome == Outcome::Computed {
            r.outcome = Outcome::Certified;
        }
    }
    Ok(r)
}

fn fermat_outcome(c: &FermatCertificate) -> Outcome {
    match c.verdict {
        FermatVerdict::CertifiedEquality | FermatVerdict::CertifiedInclusion => Outcome::Certified,
        FermatVerdict::RejectedZeroless => Outcome::NotCertified,
        FermatVerdict::HypothesesUnmet(_) => Outcome::HypothesesUnmet,
    }
}

fn cmd_fermat(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "fermat")?;
    let l = *need(&p.l, "l", "fermat")?;
    let point = point_for(f, p, "fermat")?;
    let m = m_for(p, point.len(), "fermat")?;
    let mut r = base_report("fermat", p);
    let pr = probe(p, opts)?;
    let mut o = OracleSummary::default();
    let certs: Vec<FermatCertificate> = if point.len() == 1 {
        vec![attempt!(r, fermat_certificate(f, &point[0], m[0], l))]
    } else {
        attempt!(r, fermat_two_variable(f, (&point[0], &point[1]), (m[0], m[1]), l)).to_vec()
    };
    let names = if certs.len() == 1 { vec![""] } else { vec!["_x", "_y"] };
    let mut outcome = Outcome::Certified;
    for (axis, (c, suffix)) in certs.iter().zip(names).enumerate() {
        r.summary.push(format!("D_{}F{suffix}({}) = {} in {}: {}", symbol(&c.m), point_text(&point), c.derivative, symbol(&l), c.verdict));
        r.result(&format!("derivative{suffix}"), c.derivative.to_string());
        r.result(&format!("verdict{suffix}"), c.verdict.to_string());
        if let FermatVerdict::HypothesesUnmet(list) = &c.verdict {
            for h in list {
                r.check(h.clone(), "fails");
            }
        }
        let this = fermat_outcome(c);
        if this != Outcome::Certified && outcome == Outcome::Certified {
            outcome = this;
        }
        o.record(&format!("derivative{suffix}"), oracle_derivative(&pr, f, &point, axis, c.m, &c.derivative));
    }
    r.outcome = outcome;
    r.oracle = Some(o);
    Ok(r)
}

fn cmd_implicit(p: &Problem, opts: &RunOptions) -> CmdResult {
    let g = need(&p.constraint, "constraint", "implicit")?;
    if p.point.len() != 2 {
        return Err(CommandError::Input("`implicit` needs a point (a, b)".into()));
    }
    let m = p.m.first().copied().ok_or_else(|| CommandError::Input("`implicit` needs `m`".into()))?;
    let n = p.n.or_else(|| p.m.get(1).copied()).unwrap_or(m);
    let mut r = base_report("implicit", p);
    let res = attempt!(r, implicit_solve(g, (&p.point[0], &p.point[1]), m, n));
    r.summary.push(format!("D_{}f({}) in {}", symbol(&m), render_asym(&p.point[0]), res.derivative_bound));
    r.result("gamma_x", res.gamma_x.to_string());
    r.result("gamma_y", res.gamma_y.to_string());
    r.result("derivative_bound", res.derivative_bound.to_string());
    r.result("delta", res.delta);
    r.result("inner_continuity", res.inner_continuity);
    r.result("witness_points", res.witness.len());
    r.result("max_residual", res.max_residual);
    r.result("slope", res.slope);
    for (name, ok) in &res.hypotheses {
        r.check(name.clone(), verdict_status(*ok));
    }
    let pr = probe(p, opts)?;
    let mut o = OracleSummary::default();
    o.record(
        "witness slope in derivative bound",
        pr.membership(&AsymptoticReal::constant(res.slope), &res.derivative_bound),
    );
    r.oracle = Some(o);
    Ok(r)
}

fn cmd_lagrange(p: &Problem, opts: &RunOptions) -> CmdResult {
    let f = need(&p.objective, "objective", "lagrange")?;
    let g = need(&p.constraint, "constraint", "lagrange")?;
    if p.point.len() != 2 {
        return Err(CommandError::Input("`lagrange` needs a point (a, b)".into()));
    }
    let m = p.m.first().copied().ok_or_else(|| CommandError::Input("`lagrange` needs `m`".into()))?;
    let n = p.n.or_else(|| p.m.get(1).copied()).unwrap_or(m);
    let mut r = base_report("lagrange", p);
    let res = attempt!(r, lagrange_solve(f, g, (&p.point[0], &p.point[1]), m, n));
    r.summary.push(format!("lambda = {}", res.lambda));
    r.summary.push(format!("∂F/∂_{}x - lambda ∂g/∂x = {}", symbol(&m), res.residual_x));
    r.summary.push(format!("∂F/∂_{}y - lambda ∂g/∂y = {}", symbol(&n), res.residual_y));
    r.result("lambda", res.lambda);
    r.result("L", res.l.token());
    r.result("residual_x", res.residual_x.to_string());
    r.result("residual_y", res.residual_y.to_string());
    r.result("dF_dx", res.partials[0].to_string());
    r.result("dF_dy", res.partials[1].to_string());
    r.result("dg_dx", res.constraint_partials[0]);
    r.result("dg_dy", res.constraint_partials[1]);
    r.result("certified", res.certified);
    for (name, v) in &res.hypotheses {
        r.check(name.clone(), v.name());
    }
    r.notes.extend(res.notes.iter().cloned());
    r.outcome = if res.certified { Outcome::Certified } else { Outcome::NotCertified };
    let pr = probe(p, opts)?;
    let mut o = OracleSummary::default();
    o.record("dF/dx", oracle_derivative(&pr, f, &p.point, 0, m, &res.partials[0]));
    o.record("dF/dy", oracle_derivative(&pr, f, &p.point, 1, n, &res.partials[1]));
    r.oracle = Some(o);
    Ok(r)
}

fn cmd_selftest(p: &Problem, opts: &RunOptions) -> Report {
    let mut r = Report::new("selftest");
    r.input("seed", opts.seed);
    let settings = ProbeSettings {
        seed: opts.seed,
        ..p.oracle.clone()
    };
    let mut failed = false;
    for id in 1..=selftest::SUITES {
        let s = selftest::run_suite(id, opts.seed, &settings);
        let status = if s.passed() { "pass" } else { "fail" };
        failed |= !s.passed();
        r.result(
            &format!("suite_{id}"),
            json!({"name": s.name, "status": status, "checks": s.checks, "skipped": s.skipped}),
        );
        r.summary.push(format!("suite {id} ({}): {status}, {} checks, {} skipped", s.name, s.checks, s.skipped));
        for f in s.failures.iter().take(5) {
            r.notes.push(format!("suite {id}: {f}"));
        }
    }
    r.outcome = if failed { Outcome::Failed } else { Outcome::Computed };
    r
}
