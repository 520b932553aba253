//! Multi-scale search for near-optimizers of a function of one variable.
//!
//! A coarse real grid of the representative finds candidate basins. Around
//! each basin center `c` the points `c +- sigma * eps^t` are certified on a
//! dyadic grid of `t`, and the boundary scale is located by bisection.

use super::near::{verdict_near_optimum, OptimalityQuery};
use super::scales::{simplest_between, Verdict};
use crate::error::{Error, Result};
use crate::flex::{eval_f64, ExternalInterval};
use crate::scale::{AsymptoticReal, Exp, ExternalNumber, Idem, Neutrix};
use num_traits::Zero;

const GRID: usize = 2000;
const WINDOW: f64 = 10.0;
const PROBE_EPS: f64 = 1e-12;
const T_STEPS: i64 = 64;
const T_DENOM: i64 = 16;
const BISECTIONS: usize = 8;
const SIGMAS: [f64; 3] = [0.5, 1.0, 2.0];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanReport {
    pub clusters: Vec<ExternalInterval>,
    /// Basins where no external set could be certified.
    pub undecided: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Level {
    Pass,
    Fail,
    Mixed,
}

struct Basin<'a> {
    q: &'a OptimalityQuery,
    center: AsymptoticReal,
}

impl Basin<'_> {
    fn verdict(&self, a: &AsymptoticReal) -> Option<Verdict> {
        match verdict_near_optimum(self.q, std::slice::from_ref(a)) {
            Ok(v) => Some(v),
            Err(_) => None,
        }
    }

    fn level(&self, t: Exp, sigmas: &[f64]) -> Level {
        let mut pass = 0;
        let mut fail = 0;
        for sign in [1.0, -1.0] {
            for s in sigmas {
                let a = self.center.add(&AsymptoticReal::monomial(sign * s, t));
                match self.verdict(&a) {
                    Some(Verdict::Holds) => pass += 1,
                    Some(Verdict::Fails) => fail += 1,
                    Some(Verdict::Undecided) => return Level::Mixed,
                    None => {}
                }
            }
        }
        match (pass, fail) {
            (_, 0) => Level::Pass,
            (0, _) => Level::Fail,
            _ => Level::Mixed,
        }
    }

    /// Neutrix of the cluster around the center; `None` when the center
    /// itself is not a near-optimizer.
    fn scan(&self) -> std::result::Result<Option<Neutrix>, String> {
        let name = crate::scale::text::render_asym(&self.center);
        match self.verdict(&self.center) {
            Some(Verdict::Holds) => {}
            Some(Verdict::Fails) => return Ok(None),
            _ => return Err(format!("basin center {name} is undecided")),
        }
        let ts: Vec<Exp> = (0..=T_STEPS).map(|k| Exp::new(k, T_DENOM)).collect();
        let levels: Vec<Level> = ts.iter().map(|t| self.level(*t, &SIGMAS)).collect();
        let first = match levels.iter().rposition(|l| *l != Level::Pass) {
            None => return Err(format!("basin at {name} passes at standard scale")),
            Some(i) if i + 1 == levels.len() => {
                return Err(format!("points near {name} are not certified at fine scales"))
            }
            Some(i) => i + 1,
        };
        if levels[..first].iter().any(|l| *l != Level::Fail) {
            return Err(format!("certification around {name} is not monotone in the scale"));
        }
        let (mut lo, mut hi) = (ts[first - 1], ts[first]);
        for _ in 0..BISECTIONS {
            let mid = (lo + hi) / Exp::from_integer(2);
            if self.level(mid, &SIGMAS) == Level::Pass {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let p = simplest_between(lo, hi);
        let idem = if p > lo && self.level(p, &[0.5, 1.0, 2.0, 10.0, 100.0]) == Level::Pass {
            Idem::Pounds
        } else {
            Idem::Oslash
        };
        Ok(Some(Neutrix::Scaled(p, idem)))
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

/// Nearby rational with a small denominator, if there is one.
fn snap(x: f64) -> f64 {
    for d in 1..=64 {
        let n = (x * d as f64).round();
        if (x - n / d as f64).abs() < 1e-6 {
            return n / d as f64;
        }
    }
    x
}

fn basin_centers(q: &OptimalityQuery) -> Vec<f64> {
    let f = q.signed().representative();
    let f0 = |x: f64| eval_f64(&f, [x, 0.0], PROBE_EPS);
    let [dlo, dhi] = q.domain[0];
    let lo = dlo.max(-WINDOW);
    let hi = dhi.min(WINDOW);
    if lo == hi {
        return vec![lo];
    }
    let xs: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|x| f0(*x)).collect();
    let finite = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    let mut picks: Vec<usize> = Vec::new();
    if q.m.is_none() {
        let vmin = vs.iter().copied().map(finite).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * (1.0 + vmin.abs());
        let mut i = 0;
        while i < vs.len() {
            if finite(vs[i]) <= vmin + tol {
                let start = i;
                while i + 1 < vs.len() && finite(vs[i + 1]) <= vmin + tol {
                    i += 1;
                }
                let best = (start..=i).min_by(|a, b| vs[*a].total_cmp(&vs[*b])).unwrap();
                picks.push(best);
            }
            i += 1;
        }
    } else {
        let n = vs.len();
        let mut i = 0;
        while i < n {
            let start = i;
            while i + 1 < n && vs[i + 1] == vs[i] {
                i += 1;
            }
            let left_ok = if start == 0 { lo == dlo } else { finite(vs[start - 1]) > vs[start] };
            let right_ok = if i + 1 == n { hi == dhi } else { finite(vs[i + 1]) > vs[i] };
            if vs[start].is_finite() && left_ok && right_ok {
                picks.push(start);
            }
            i += 1;
        }
    }
    picks
        .into_iter()
        .map(|i| {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(xs.len() - 1)];
            snap(golden_min(&f0, a, b)).clamp(dlo, dhi)
        })
        .collect()
}

/// External sets of near-optimizers found around each basin of the
/// representative.
pub fn find_near_optimizers(q: &OptimalityQuery) -> Result<ScanReport> {
    q.validate()?;
    if q.domain.len() != 1 {
        return Err(Error::Unsupported("the scan needs a one-dimensional domain".into()));
    }
    let mut report = ScanReport::default();
    let mut centers = basin_centers(q);
    centers.sort_by(f64::total_cmp);
    centers.dedup();
    for c in centers {
        let basin = Basin {
            q,
            center: if c.is_zero() { AsymptoticReal::zero() } else { AsymptoticReal::constant(c) },
        };
        match basin.scan() {
            Ok(None) => {}
            Ok(Some(n)) => report
                .clusters
                .push(ExternalInterval::around(&ExternalNumber::new(basin.center.clone(), n))),
            Err(why) => report.undecided.push(why),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::parse_expr;
    use crate::opt::Sense;
    use crate::scale::{exp, exp_frac};

    const LINE: [f64; 2] = [f64::NEG_INFINITY, f64::INFINITY];

    fn one(r: &ScanReport) -> ExternalNumber {
        assert_eq!(r.clusters.len(), 1, "{r:?}");
        r.clusters[0].as_external().unwrap().clone()
    }

    #[test]
    fn root_eps_pounds() {
        let q = OptimalityQuery::global(
            parse_expr("x^2 + eps*pounds").unwrap(),
            [-1.0, 1.0],
            Sense::Min,
            Neutrix::pounds(exp(1)),
        );
        let r = find_near_optimizers(&q).unwrap();
        assert_eq!(one(&r), ExternalNumber::from_neutrix(Neutrix::pounds(exp_frac(1, 2))));
    }

    #[test]
    fn oslash_cluster() {
        let q = OptimalityQuery::global(parse_expr("x^2 + oslash*x").unwrap(), LINE, Sense::Min, Neutrix::OSLASH);
        assert_eq!(one(&find_near_optimizers(&q).unwrap()), ExternalNumber::from_neutrix(Neutrix::OSLASH));
    }

    #[test]
    fn cubic_clusters() {
        let f = parse_expr("x^3 - 3*x + 1 + oslash*x").unwrap();
        let q = OptimalityQuery::local(f.clone(), LINE, Sense::Min, Neutrix::OSLASH, Neutrix::OSLASH);
        let expect = |c: f64| ExternalNumber::new(AsymptoticReal::constant(c), Neutrix::OSLASH);
        assert_eq!(one(&find_near_optimizers(&q).unwrap()), expect(1.0));
        let q = OptimalityQuery { sense: Sense::Max, ..q };
        assert_eq!(one(&find_near_optimizers(&q).unwrap()), expect(-1.0));
        let q = OptimalityQuery::local(f, LINE, Sense::Min, Neutrix::POUNDS, Neutrix::OSLASH);
        assert!(find_near_optimizers(&q).unwrap().clusters.is_empty());
    }
}
