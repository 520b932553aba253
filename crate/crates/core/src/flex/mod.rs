pub mod diff;
pub mod eval;
pub mod expr;
pub mod interval;
pub mod jet;
pub mod parse;

pub use diff::diff;
pub use eval::{apply_prim, eval, eval_f64, eval_jet, taylor_at, to_f64};
pub use expr::{Expr, Prim, Var};
pub use interval::ExternalInterval;
pub use jet::Jet;
pub use parse::{fold_all, parse_expr};

use crate::error::Result;
use crate::scale::{AsymptoticReal, ExternalNumber, Neutrix};

/// Neutrix part of a flexible function at a point.
pub fn neutrix_part(e: &Expr, point: &[ExternalNumber]) -> Result<Neutrix> {
    Ok(eval(e, point)?.neutrix())
}

/// Representative of a flexible function's value at a point.
pub fn representative(e: &Expr, point: &[ExternalNumber]) -> Result<AsymptoticReal> {
    Ok(eval(e, point)?.rep().clone())
}
