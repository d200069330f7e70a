use thiserror::Error;

use super::{bound_vars, free_vars_formula, free_vars_game, term_vars, VarSet};
use crate::syntax::*;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("substitution of `{var}` is not admissible: it occurs under a binder of `{binder}` at position {position}")]
pub struct AdmissibilityError {
    pub var: String,
    pub binder: String,
    pub position: String,
}

struct Subst<'a> {
    x: &'a str,
    f: &'a Term,
    /// FV(f) ∪ {x}: binding any of these above an occurrence of x is fatal.
    danger: VarSet,
    path: Vec<usize>,
}

type R<T> = Result<T, AdmissibilityError>;

impl Subst<'_> {
    fn fail(&self, binder: &str) -> AdmissibilityError {
        let position = if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
        };
        AdmissibilityError { var: self.x.to_string(), binder: binder.to_string(), position }
    }

    fn at<T>(&mut self, i: usize, k: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.path.push(i);
        let r = k(self);
        self.path.pop();
        r
    }

    fn check(&self, bound: &VarSet) -> R<()> {
        match bound.iter().find(|v| self.danger.contains(*v)) {
            Some(b) => Err(self.fail(b)),
            None => Ok(()),
        }
    }

    fn term(&mut self, t: &Term, bound: &VarSet) -> R<Term> {
        if !term_vars(t).contains(self.x) {
            return Ok(t.clone());
        }
        self.check(bound)?;
        let key = |t: &Term| -> Option<String> {
            match t {
                Term::Var(v) => Some(v.clone()),
                Term::PrimedVar(v) => Some(primed(v)),
                _ => None,
            }
        };
        Ok(match t {
            Term::Var(_) | Term::PrimedVar(_) if key(t).as_deref() == Some(self.x) => self.f.clone(),
            Term::RealLit(_) | Term::Var(_) | Term::PrimedVar(_) => t.clone(),
            Term::Plus(a, b) => Term::Plus(Box::new(self.term(a, bound)?), Box::new(self.term(b, bound)?)),
            Term::Times(a, b) => Term::Times(Box::new(self.term(a, bound)?), Box::new(self.term(b, bound)?)),
            Term::Div(a, b) => Term::Div(Box::new(self.term(a, bound)?), Box::new(self.term(b, bound)?)),
            Term::Min(a, b) => Term::Min(Box::new(self.term(a, bound)?), Box::new(self.term(b, bound)?)),
            Term::Max(a, b) => Term::Max(Box::new(self.term(a, bound)?), Box::new(self.term(b, bound)?)),
            Term::Neg(a) => Term::Neg(Box::new(self.term(a, bound)?)),
            Term::Sqrt(a) => Term::Sqrt(Box::new(self.term(a, bound)?)),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|a| self.term(a, bound)).collect::<R<_>>()?),
            // The differential of a substituted term is not the substituted
            // differential, so any occurrence under (.)' is rejected.
            Term::Differential(_) => return Err(self.fail("(.)'")),
        })
    }

    fn formula(&mut self, p: &Formula, bound: &VarSet) -> R<Formula> {
        if !free_vars_formula(p).contains(self.x) {
            return Ok(p.clone());
        }
        Ok(match p {
            Formula::Cmp(a, r, b) => {
                let a = self.at(0, |s| s.term(a, bound))?;
                let b = self.at(1, |s| s.term(b, bound))?;
                Formula::Cmp(a, *r, b)
            }
            Formula::Diamond(g, q) | Formula::Box(g, q) => {
                let g2 = self.at(0, |s| s.game(g, bound))?;
                let mut inner = bound.clone();
                inner.extend(bound_vars(g));
                let q2 = self.at(1, |s| s.formula(q, &inner))?;
                if matches!(p, Formula::Diamond(..)) {
                    diamond(g2, q2)
                } else {
                    boxf(g2, q2)
                }
            }
            Formula::True | Formula::False => p.clone(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                let a2 = Box::new(self.at(0, |s| s.formula(a, bound))?);
                let b2 = Box::new(self.at(1, |s| s.formula(b, bound))?);
                match p {
                    Formula::And(..) => Formula::And(a2, b2),
                    Formula::Or(..) => Formula::Or(a2, b2),
                    Formula::Imply(..) => Formula::Imply(a2, b2),
                    _ => Formula::Equiv(a2, b2),
                }
            }
            Formula::Not(a) => Formula::Not(Box::new(self.at(0, |s| s.formula(a, bound))?)),
            Formula::Forall(y, q) | Formula::Exists(y, q) => {
                let mut inner = bound.clone();
                inner.insert(y.clone());
                let q2 = Box::new(self.at(0, |s| s.formula(q, &inner))?);
                if matches!(p, Formula::Forall(..)) {
                    Formula::Forall(y.clone(), q2)
                } else {
                    Formula::Exists(y.clone(), q2)
                }
            }
        })
    }

    fn game(&mut self, g: &Game, bound: &VarSet) -> R<Game> {
        if !free_vars_game(g).contains(self.x) {
            return Ok(g.clone());
        }
        Ok(match g {
            Game::Test(p) => test(self.at(0, |s| s.formula(p, bound))?),
            Game::Assign(y, t) => Game::Assign(y.clone(), self.at(0, |s| s.term(t, bound))?),
            Game::AssignAny(_) => g.clone(),
            Game::Ode(eqs, dom) => {
                let mut inner = bound.clone();
                inner.extend(bound_vars(g));
                let mut out = Vec::new();
                for (i, (y, rhs)) in eqs.iter().enumerate() {
                    // The ODE variables themselves are free occurrences under
                    // the ODE's own binder.
                    if y == self.x {
                        return Err(self.fail(y));
                    }
                    out.push((y.clone(), self.at(i, |s| s.term(rhs, &inner))?));
                }
                let dom2 = self.at(eqs.len(), |s| s.formula(dom, &inner))?;
                Game::Ode(out, Box::new(dom2))
            }
            Game::Seq(a, b) => {
                let a2 = self.at(0, |s| s.game(a, bound))?;
                let mut inner = bound.clone();
                inner.extend(bound_vars(a));
                let b2 = self.at(1, |s| s.game(b, &inner))?;
                seq(a2, b2)
            }
            Game::Choice(a, b) | Game::DChoice(a, b) => {
                let a2 = Box::new(self.at(0, |s| s.game(a, bound))?);
                let b2 = Box::new(self.at(1, |s| s.game(b, bound))?);
                if matches!(g, Game::Choice(..)) {
                    Game::Choice(a2, b2)
                } else {
                    Game::DChoice(a2, b2)
                }
            }
            Game::Repeat(a) | Game::DRepeat(a) => {
                let mut inner = bound.clone();
                inner.extend(bound_vars(a));
                let a2 = Box::new(self.at(0, |s| s.game(a, &inner))?);
                if matches!(g, Game::Repeat(_)) {
                    Game::Repeat(a2)
                } else {
                    Game::DRepeat(a2)
                }
            }
            Game::Dual(a) => dual(self.at(0, |s| s.game(a, bound))?),
        })
    }
}

fn new_subst<'a>(x: &'a str, f: &'a Term) -> Subst<'a> {
    let mut danger = term_vars(f);
    danger.insert(x.to_string());
    Subst { x, f, danger, path: Vec::new() }
}

/// Replaces free occurrences of key `x` in `p` by `f`, failing instead of
/// capturing.
pub fn substitute(p: &Formula, x: &str, f: &Term) -> Result<Formula, AdmissibilityError> {
    new_subst(x, f).formula(p, &VarSet::new())
}

pub fn substitute_game(g: &Game, x: &str, f: &Term) -> Result<Game, AdmissibilityError> {
    new_subst(x, f).game(g, &VarSet::new())
}

pub fn substitute_term(t: &Term, x: &str, f: &Term) -> Result<Term, AdmissibilityError> {
    new_subst(x, f).term(t, &VarSet::new())
}
