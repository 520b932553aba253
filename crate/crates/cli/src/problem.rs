//! Problem files.
//!
//! ```toml
//! command = "lagrange"
//! objective = "-(1 + eps*oslash)*x - (1 + eps*pounds)*y^2 + oslash"
//! constraint = "1 - x^2 - y^2"
//! point = ["1/2", "sqrt(3)/2"]
//! m = ["oslash"]
//! n = "oslash"
//!
//! [oracle]
//! epsilon = 1e-12
//! ```
//!
//! See `docs/problem-schema.md` for every field.

use crate::probe::ProbeSettings;
use neutrix_core::calc::LimitKind;
use neutrix_core::flex::{parse_expr, Expr};
use neutrix_core::opt::Sense;
use neutrix_core::{AsymptoticReal, Error as CoreError, ExternalNumber, Neutrix};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use toml::Spanned;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ProblemError {}

/// Raw contents of a problem file. Every text field keeps its position for
/// error messages.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub point: Vec<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense: Option<Spanned<String>>,
    /// `outer`, `inner`, `x-outer-y-inner` or `x-inner-y-outer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_band: Option<f64>,
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub command: Option<String>,
    pub objective: Option<Expr>,
    pub objective_text: Option<String>,
    pub constraint: Option<Expr>,
    pub constraint_text: Option<String>,
    pub point: Vec<AsymptoticReal>,
    pub m: Vec<Neutrix>,
    pub n: Option<Neutrix>,
    pub l: Option<Neutrix>,
    pub domain: Vec<[f64; 2]>,
    pub sense: Sense,
    pub limit: LimitKind,
    pub oracle: ProbeSettings,
}

pub const COMMANDS: [&str; 8] = ["eval", "limit", "derive", "optimize", "fermat", "implicit", "lagrange", "selftest"];

struct Lines<'a> {
    src: &'a str,
}

impl Lines<'_> {
    fn at(&self, offset: usize, message: impl Into<String>) -> ProblemError {
        let offset = offset.min(self.src.len());
        let before = &self.src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ProblemError {
            line,
            column,
            message: message.into(),
        }
    }

    /// Error inside a quoted string value; `pos` is a byte offset into the
    /// string contents.
    fn inside(&self, s: &Spanned<String>, pos: usize, message: impl Into<String>) -> ProblemError {
        self.at(s.span().start + 1 + pos, message)
    }

    fn core(&self, s: &Spanned<String>, what: &str, e: CoreError) -> ProblemError {
        match e {
            CoreError::Parse { pos, msg } => self.inside(s, pos, format!("{what}: {msg}")),
            other => self.inside(s, 0, format!("{what}: {other}")),
        }
    }
}

pub fn parse_problem(src: &str) -> Result<Problem, ProblemError> {
    let raw: ProblemFile = toml::from_str(src).map_err(|e| {
        let lines = Lines { src };
        let offset = e.span().map_or(0, |s| s.start);
        lines.at(offset, e.message().to_string())
    })?;
    raw.validate(src)
}

pub fn load_problem(path: &Path) -> Result<Problem, ProblemError> {
    let src = std::fs::read_to_string(path).map_err(|e| ProblemError {
        line: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_problem(&src)
}

fn neutrix_token(lines: &Lines, s: &Spanned<String>) -> Result<Neutrix, ProblemError> {
    let v: ExternalNumber = s.get_ref().parse().map_err(|e| lines.core(s, "neutrix", e))?;
    if !v.rep().is_zero() {
        return Err(lines.inside(s, 0, format!("expected a neutrix, found {v}")));
    }
    Ok(v.neutrix())
}

impl ProblemFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files serialize")
    }

    pub fn validate(&self, src: &str) -> Result<Problem, ProblemError> {
        let lines = Lines { src };
        if let Some(c) = &self.command {
            if !COMMANDS.contains(&c.get_ref().as_str()) {
                return Err(lines.inside(c, 0, format!("unknown command `{}`", c.get_ref())));
            }
        }
        let expr = |s: &Option<Spanned<String>>, what: &str| -> Result<Option<Expr>, ProblemError> {
            s.as_ref()
                .map(|s| parse_expr(s.get_ref()).map_err(|e| lines.core(s, what, e)))
                .transpose()
        };
        let objective = expr(&self.objective, "objective")?;
        let constraint = expr(&self.constraint, "constraint")?;
        if self.point.len() > 2 {
            return Err(lines.inside(&self.point[2], 0, "a point has one or two coordinates"));
        }
        let mut point = Vec::new();
        for s in &self.point {
            let v: ExternalNumber = s.get_ref().parse().map_err(|e| lines.core(s, "point", e))?;
            if !v.is_precise() {
                return Err(lines.inside(s, 0, format!("a point coordinate must be precise, found {v}")));
            }
            point.push(v.rep().clone());
        }
        let m = self.m.iter().map(|s| neutrix_token(&lines, s)).collect::<Result<Vec<_>, _>>()?;
        if m.len() > 2 {
            return Err(lines.inside(&self.m[2], 0, "one neutrix per axis"));
        }
        let n = self.n.as_ref().map(|s| neutrix_token(&lines, s)).transpose()?;
        let l = self.l.as_ref().map(|s| neutrix_token(&lines, s)).transpose()?;
        let sense = match &self.sense {
            None => Sense::Min,
            Some(s) => match s.get_ref().as_str() {
                "min" => Sense::Min,
                "max" => Sense::Max,
                other => return Err(lines.inside(s, 0, format!("sense must be `min` or `max`, found `{other}`"))),
            },
        };
        let limit = match &self.limit {
            None => LimitKind::Outer,
            Some(s) => match s.get_ref().as_str() {
                "outer" => LimitKind::Outer,
                "inner" => LimitKind::Inner,
                "x-outer-y-inner" => LimitKind::MixedXOuterYInner,
                "x-inner-y-outer" => LimitKind::MixedXInnerYOuter,
                other => return Err(lines.inside(s, 0, format!("unknown limit kind `{other}`"))),
            },
        };
        for b in &self.domain {
            if b[0].is_nan() || b[1].is_nan() || b[0] > b[1] {
                return Err(lines.at(0, format!("invalid domain bounds [{}, {}]", b[0], b[1])));
            }
        }
        if !self.domain.is_empty() && !point.is_empty() {
            if self.domain.len() != point.len() {
                return Err(lines.at(0, "domain and point have different dimensions"));
            }
            for (i, (b, p)) in self.domain.iter().zip(&point).enumerate() {
                let v = p.standard_part().unwrap_or(if p.sign() < 0 { f64::NEG_INFINITY } else { f64::INFINITY });
                if v < b[0] || v > b[1] {
                    return Err(lines.inside(&self.point[i], 0, "the point lies outside the domain"));
                }
            }
        }
        let mut oracle = ProbeSettings::default();
        if let Some(o) = &self.oracle {
            if let Some(e) = o.epsilon {
                if !(e > 0.0 && e < 1e-3) {
                    return Err(lines.at(0, "oracle.epsilon must lie in (0, 1e-3)"));
                }
                oracle.epsilon = e;
            }
            if let Some(d) = o.digits {
                if !(20..=2000).contains(&d) {
                    return Err(lines.at(0, "oracle.digits must lie in [20, 2000]"));
                }
                oracle.digits = d;
            }
            if let Some(g) = o.guard_band {
                if !(g > 0.0 && g < 0.5) {
                    return Err(lines.at(0, "oracle.guard_band must lie in (0, 0.5)"));
                }
                oracle.guard_band = g;
            }
        }
        Ok(Problem {
            command: self.command.as_ref().map(|c| c.get_ref().clone()),
            objective,
            objective_text: self.objective.as_ref().map(|s| s.get_ref().clone()),
            constraint,
            constraint_text: self.constraint.as_ref().map(|s| s.get_ref().clone()),
            point,
            m,
            n,
            l,
            domain: self.domain.clone(),
            sense,
            limit,
            oracle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CIRCLE: &str = include_str!("../problems/circle-lagrange.toml");
    const QUADRATIC: &str = include_str!("../problems/quadratic-min.toml");

    #[test]
    fn example_problems() {
        let p = parse_problem(CIRCLE).unwrap();
        assert_eq!(p.command.as_deref(), Some("lagrange"));
        assert!(p.constraint.is_some());
        assert_eq!(p.point[1], AsymptoticReal::constant(3f64.sqrt() / 2.0));
        assert_eq!(p.m, vec![Neutrix::OSLASH, Neutrix::OSLASH]);
        let q = parse_problem(QUADRATIC).unwrap();
        assert_eq!(q.n, Some(Neutrix::pounds(neutrix_core::scale::exp(1))));
        assert!(q.point.is_empty());
    }

    #[test]
    fn malformed_neutrix_token() {
        let src = "objective = \"x^2\"\nn = \"oslash + qq\"\n";
        let e = parse_problem(src).unwrap_err();
        assert_eq!((e.line, e.column), (2, 15), "{e}");
        let e = parse_problem("n = \"1 + oslash\"\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("expected a neutrix"));
    }

    #[test]
    fn toml_and_field_errors() {
        let e = parse_problem("objective = \"x\"\nbogus = 1\n").unwrap_err();
        assert_eq!(e.line, 2, "{e}");
        let e = parse_problem("objective = \"x +\"\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_problem("point = [\"2\"]\ndomain = [[0.0, 1.0]]\n").unwrap_err();
        assert!(e.message.contains("outside"));
        let e = parse_problem("command = \"solve\"\n").unwrap_err();
        assert!(e.message.contains("unknown command"));
    }

    #[test]
    fn round_trip() {
        for src in [CIRCLE, QUADRATIC] {
            let raw: ProblemFile = toml::from_str(src).unwrap();
            let again: ProblemFile = toml::from_str(&raw.to_toml()).unwrap();
            assert_eq!(raw, again);
        }
    }
}
