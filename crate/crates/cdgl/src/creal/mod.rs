//! Constructive reals: memoized interval refinement with exact rational
//! endpoints, evaluation of terms over states, and comparison up to ε.

mod eval;
mod interval;
mod real;
mod state;

pub use eval::{cmp_eps, eval_term, to_creal};
pub use interval::{ceil_log2, pow2, q, to_f64, Interval};
pub use real::{cmp_eps_real, division_effort, set_division_effort, sign_at, CReal, EpsCmp};
pub use state::State;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CRealError {
    #[error("divisor could not be separated from zero")]
    DivisionNearZero,
    #[error("square root of a negative number")]
    SqrtOfNegative,
    #[error("cannot evaluate {0}")]
    Unsupported(String),
}

/// Default precision for traces and reports.
pub const DEFAULT_PRECISION: u32 = 53;
