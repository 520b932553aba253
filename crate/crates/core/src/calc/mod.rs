pub mod deriv;
pub mod limit;
pub mod rules;
pub mod series;

pub use limit::{
    continuity_check, expand_at, inner_limit, is_m_accumulation, limit, mixed_limit, numeric_limit, outer_limit,
    ExternalPoint, LimitKind, LimitResult,
};
pub use rules::{classify, Coef, Mode, Regime};
pub use series::{expand, Context, Series};
pub use deriv::{
    c2_or_fallback, c2_rule_derivative, chain_rule_verify, chain_rule_verify_2d, derivative_along, derivative_op_laws,
    neutrix_derivative, partial_derivative, strong_diff_witness, DerivativeResult, InclusionReport, StrongDiffWitness,
};
