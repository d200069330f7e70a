use crate::creal::{eval_term, Interval, State};
use crate::syntax::*;

use super::OdeError;

fn is_zero(t: &Term) -> bool {
    t.is_zero_lit()
}

fn s_plus(a: Term, b: Term) -> Term {
    match (is_zero(&a), is_zero(&b)) {
        (true, _) => b,
        (_, true) => a,
        _ => plus(a, b),
    }
}

fn s_minus(a: Term, b: Term) -> Term {
    match (is_zero(&a), is_zero(&b)) {
        (_, true) => a,
        (true, _) => neg(b),
        _ => minus(a, b),
    }
}

fn s_times(a: Term, b: Term) -> Term {
    if is_zero(&a) || is_zero(&b) {
        return lit_int(0);
    }
    if a.is_one_lit() {
        return b;
    }
    if b.is_one_lit() {
        return a;
    }
    times(a, b)
}

/// Total differential of `t`: the sum over variables x of (∂t/∂x)·x'.
/// Differential subterms are expanded first.
pub fn differential(t: &Term) -> Result<Term, OdeError> {
    Ok(match t {
        Term::RealLit(_) => lit_int(0),
        Term::Var(x) => Term::PrimedVar(x.clone()),
        Term::PrimedVar(x) => return Err(OdeError::NonDifferentiable(format!("{x}'"))),
        Term::Plus(a, b) => s_plus(differential(a)?, differential(b)?),
        Term::Neg(a) => {
            let d = differential(a)?;
            if is_zero(&d) {
                d
            } else {
                neg(d)
            }
        }
        Term::Times(a, b) => s_plus(s_times(differential(a)?, (**b).clone()), s_times((**a).clone(), differential(b)?)),
        Term::Div(a, b) => {
            let (da, db) = (differential(a)?, differential(b)?);
            if is_zero(&db) {
                if is_zero(&da) {
                    lit_int(0)
                } else {
                    div(da, (**b).clone())
                }
            } else {
                let num = s_minus(s_times(da, (**b).clone()), s_times((**a).clone(), db));
                div(num, times((**b).clone(), (**b).clone()))
            }
        }
        Term::Sqrt(a) => {
            let da = differential(a)?;
            if is_zero(&da) {
                lit_int(0)
            } else {
                div(da, times(lit_int(2), Term::Sqrt(a.clone())))
            }
        }
        Term::Min(..) => return Err(OdeError::NonDifferentiable(t.to_string())),
        Term::Max(..) => return Err(OdeError::NonDifferentiable(t.to_string())),
        Term::Differential(a) => differential(&differential(a)?)?,
        Term::Tuple(_) => return Err(OdeError::NonDifferentiable(t.to_string())),
    })
}

/// Replaces every `(e)'` node by its expanded differential.
pub fn expand_differentials(t: &Term) -> Result<Term, OdeError> {
    let rec = |a: &Term| expand_differentials(a).map(Box::new);
    Ok(match t {
        Term::Differential(a) => differential(&expand_differentials(a)?)?,
        Term::RealLit(_) | Term::Var(_) | Term::PrimedVar(_) => t.clone(),
        Term::Plus(a, b) => Term::Plus(rec(a)?, rec(b)?),
        Term::Times(a, b) => Term::Times(rec(a)?, rec(b)?),
        Term::Div(a, b) => Term::Div(rec(a)?, rec(b)?),
        Term::Min(a, b) => Term::Min(rec(a)?, rec(b)?),
        Term::Max(a, b) => Term::Max(rec(a)?, rec(b)?),
        Term::Neg(a) => Term::Neg(rec(a)?),
        Term::Sqrt(a) => Term::Sqrt(rec(a)?),
        Term::Tuple(ts) => Term::Tuple(ts.iter().map(expand_differentials).collect::<Result<_, _>>()?),
    })
}

/// Evaluates the differential of `t` (or of `e` when `t` is `(e)'`).
pub fn differential_eval(t: &Term, s: &State, k: u32) -> Result<Interval, OdeError> {
    let inner = match t {
        Term::Differential(a) => &**a,
        other => other,
    };
    let d = differential(inner)?;
    Ok(eval_term(&d, s, k)?)
}
