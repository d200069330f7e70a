//! Truth up to ε and evidence for first-order formulas.
//!
//! Exact comparison of computable reals does not terminate on equal
//! inputs, so runtime decisions compare with a tolerance: `a ≥ b` counts as
//! true unless `b > a` is certified, and is only then decided false when the
//! gap is at least about ε.

use std::sync::Arc;

use num_rational::BigRational;

use super::evidence::{Branch, Ev, EvResult};
use super::EngineError;
use crate::creal::{cmp_eps, to_creal, CReal, EpsCmp, State};
use crate::syntax::*;

fn quantifier_samples() -> Vec<BigRational> {
    let ints = [0i64, 1, -1, 2, -2, 3, 5, 10, -10, 100];
    let mut v: Vec<BigRational> = ints.iter().map(|&n| BigRational::from_integer(n.into())).collect();
    v.push(BigRational::new(1.into(), 2.into()));
    v.push(BigRational::new((-1).into(), 2.into()));
    v
}

fn ge(a: &Term, b: &Term, s: &State, eps: &BigRational) -> Result<bool, EngineError> {
    Ok(cmp_eps(b, a, eps, s)? == EpsCmp::LtPlusEps)
}

/// Relaxed truth of a first-order formula. Quantifiers are checked on a
/// fixed sample set; ODEs and loops are rejected.
pub fn holds_relaxed(f: &Formula, s: &State, eps: &BigRational) -> Result<bool, EngineError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(a, r, b) => match r {
            Rel::Ge | Rel::Gt => ge(a, b, s, eps)?,
            Rel::Le | Rel::Lt => ge(b, a, s, eps)?,
            Rel::Eq => ge(a, b, s, eps)? && ge(b, a, s, eps)?,
            Rel::Ne => !(ge(a, b, s, eps)? && ge(b, a, s, eps)?),
        },
        Formula::And(a, b) => holds_relaxed(a, s, eps)? && holds_relaxed(b, s, eps)?,
        Formula::Or(a, b) => holds_relaxed(a, s, eps)? || holds_relaxed(b, s, eps)?,
        Formula::Imply(a, b) => !holds_relaxed(a, s, eps)? || holds_relaxed(b, s, eps)?,
        Formula::Equiv(a, b) => holds_relaxed(a, s, eps)? == holds_relaxed(b, s, eps)?,
        Formula::Not(a) => !holds_relaxed(a, s, eps)?,
        Formula::Forall(x, p) => holds_relaxed(&forall(x, (**p).clone()), s, eps)?,
        Formula::Exists(x, p) => holds_relaxed(&exists(x, (**p).clone()), s, eps)?,
        Formula::Diamond(g, p) => game_relaxed(g, p, s, eps, true)?,
        Formula::Box(g, p) => game_relaxed(g, p, s, eps, false)?,
    })
}

fn game_relaxed(g: &Game, p: &Formula, s: &State, eps: &BigRational, dia: bool) -> Result<bool, EngineError> {
    Ok(match g {
        Game::Test(q) => {
            let c = holds_relaxed(q, s, eps)?;
            if dia {
                c && holds_relaxed(p, s, eps)?
            } else {
                !c || holds_relaxed(p, s, eps)?
            }
        }
        Game::Assign(x, f) => holds_relaxed(p, &s.set(x, to_creal(f, s)?), eps)?,
        Game::AssignAny(x) => {
            let mut acc = !dia;
            for v in quantifier_samples() {
                let h = holds_relaxed(p, &s.set(x, CReal::from_rational(v)), eps)?;
                if h == dia {
                    acc = dia;
                    break;
                }
            }
            acc
        }
        Game::Choice(a, b) => {
            let l = game_relaxed(a, p, s, eps, dia)?;
            if dia {
                l || game_relaxed(b, p, s, eps, dia)?
            } else {
                l && game_relaxed(b, p, s, eps, dia)?
            }
        }
        Game::DChoice(a, b) => {
            let l = game_relaxed(a, p, s, eps, !dia)?;
            if dia {
                l && game_relaxed(b, p, s, eps, !dia)?
            } else {
                l || game_relaxed(b, p, s, eps, !dia)?
            }
        }
        Game::Seq(a, b) => {
            let inner = if dia { diamond((**b).clone(), p.clone()) } else { boxf((**b).clone(), p.clone()) };
            game_relaxed(a, &inner, s, eps, dia)?
        }
        Game::Dual(a) => game_relaxed(a, p, s, eps, !dia)?,
        Game::Ode(..) | Game::Repeat(_) | Game::DRepeat(_) => {
            return Err(EngineError::ExtractionUnsupported(format!("cannot evaluate {g} numerically")))
        }
    })
}

/// Evidence for a first-order formula read off the state. Disjunctions
/// follow relaxed truth; existentials search the sample set.
pub fn fo_evidence(f: Formula, s: State, eps: Arc<BigRational>) -> Ev {
    Ev::lazy(move || fo_now(&f, &s, &eps))
}

fn fo_now(f: &Formula, s: &State, eps: &Arc<BigRational>) -> EvResult {
    let sub = |f: Formula, s: State| fo_evidence(f, s, eps.clone());
    let f = desugar(f);
    Ok(match &f {
        Formula::Cmp(..) => Ev::Unit,
        Formula::Diamond(g, p) | Formula::Box(g, p) => {
            let dia = matches!(f, Formula::Diamond(..));
            let wrap = |g: Game, p: Formula| if dia { diamond(g, p) } else { boxf(g, p) };
            match (&**g, dia) {
                (Game::Test(a), true) => Ev::pair(sub((**a).clone(), s.clone()), sub((**p).clone(), s.clone())),
                (Game::Test(_), false) => {
                    let (p, s, eps) = ((**p).clone(), s.clone(), eps.clone());
                    Ev::fun(move |_| Ok(fo_evidence(p.clone(), s.clone(), eps.clone())))
                }
                (Game::Assign(x, t), _) => return fo_now(p, &s.set(x, to_creal(t, s)?), eps),
                (Game::AssignAny(x), true) => {
                    for v in quantifier_samples() {
                        let v = CReal::from_rational(v);
                        let s2 = s.set(x, v.clone());
                        if holds_relaxed(p, &s2, eps)? {
                            return Ok(Ev::Witness(v, Arc::new(sub((**p).clone(), s2))));
                        }
                    }
                    return Err(EngineError::ExtractionUnsupported(format!("no sampled witness for {f}")));
                }
                (Game::AssignAny(x), false) => {
                    let (p, s, x, eps) = ((**p).clone(), s.clone(), x.clone(), eps.clone());
                    Ev::fun(move |i| Ok(fo_evidence(p.clone(), s.set(&x, i.val()?), eps.clone())))
                }
                (Game::Choice(a, b), true) => {
                    let left = diamond((**a).clone(), (**p).clone());
                    if holds_relaxed(&left, s, eps)? {
                        Ev::Inj(Branch::Left, Arc::new(sub(left, s.clone())))
                    } else {
                        Ev::Inj(Branch::Right, Arc::new(sub(diamond((**b).clone(), (**p).clone()), s.clone())))
                    }
                }
                (Game::Choice(a, b), false) => Ev::pair(
                    sub(boxf((**a).clone(), (**p).clone()), s.clone()),
                    sub(boxf((**b).clone(), (**p).clone()), s.clone()),
                ),
                (Game::Seq(a, b), _) => return fo_now(&wrap((**a).clone(), wrap((**b).clone(), (**p).clone())), s, eps),
                (Game::Dual(a), _) => {
                    let flipped = if dia { boxf((**a).clone(), (**p).clone()) } else { diamond((**a).clone(), (**p).clone()) };
                    return fo_now(&flipped, s, eps);
                }
                _ => return Err(EngineError::ExtractionUnsupported(format!("{f} is not first-order"))),
            }
        }
        _ => return Err(EngineError::ExtractionUnsupported(format!("unexpected formula {f}"))),
    })
}
