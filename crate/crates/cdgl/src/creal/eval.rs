use num_rational::BigRational;

use super::interval::Interval;
use super::real::{cmp_eps_real, CReal, EpsCmp};
use super::state::State;
use super::CRealError;
use crate::syntax::{primed, Term};

/// Builds the lazy real denoted by `t` in state `s`.
pub fn to_creal(t: &Term, s: &State) -> Result<CReal, CRealError> {
    Ok(match t {
        Term::RealLit(q) => CReal::from_rational(q.clone()),
        Term::Var(x) => s.get(x),
        Term::PrimedVar(x) => s.get(&primed(x)),
        Term::Plus(a, b) => to_creal(a, s)?.add(&to_creal(b, s)?),
        Term::Times(a, b) => to_creal(a, s)?.mul(&to_creal(b, s)?),
        Term::Div(a, b) => to_creal(a, s)?.div(&to_creal(b, s)?)?,
        Term::Min(a, b) => to_creal(a, s)?.min(&to_creal(b, s)?),
        Term::Max(a, b) => to_creal(a, s)?.max(&to_creal(b, s)?),
        Term::Neg(a) => to_creal(a, s)?.neg(),
        Term::Sqrt(a) => to_creal(a, s)?.sqrt()?,
        Term::Differential(_) => return Err(CRealError::Unsupported("a differential term; use the ODE module".into())),
        Term::Tuple(_) => return Err(CRealError::Unsupported("a tuple as a scalar".into())),
    })
}

/// Interval of width at most 2^-k enclosing the value of `t` in `s`.
pub fn eval_term(t: &Term, s: &State, k: u32) -> Result<Interval, CRealError> {
    to_creal(t, s)?.refine(k)
}

pub fn cmp_eps(f: &Term, g: &Term, eps: &BigRational, s: &State) -> Result<EpsCmp, CRealError> {
    cmp_eps_real(&to_creal(f, s)?, &to_creal(g, s)?, eps)
}
