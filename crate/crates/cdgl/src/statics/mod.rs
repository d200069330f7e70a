//! Free, bound and must-bound variables, renaming and admissible substitution.
//!
//! Variables are keys: `x` for a base variable, `x'` for its differential.

mod rename;
mod subst;

pub use rename::{rename_exact, rename_game_exact, rename_term_exact, Rename};
pub use subst::{substitute, substitute_game, substitute_term, AdmissibilityError};

use std::collections::BTreeSet;

use crate::syntax::*;

pub type VarSet = BTreeSet<String>;

fn set(items: impl IntoIterator<Item = String>) -> VarSet {
    items.into_iter().collect()
}

pub fn term_vars(t: &Term) -> VarSet {
    let mut out = VarSet::new();
    collect_term(t, &mut out);
    out
}

fn collect_term(t: &Term, out: &mut VarSet) {
    match t {
        Term::RealLit(_) => {}
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::PrimedVar(x) => {
            out.insert(primed(x));
        }
        Term::Plus(a, b) | Term::Times(a, b) | Term::Div(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
            collect_term(a, out);
            collect_term(b, out);
        }
        Term::Neg(a) | Term::Sqrt(a) => collect_term(a, out),
        Term::Differential(a) => {
            let inner = term_vars(a);
            for v in inner {
                if !is_primed(&v) {
                    out.insert(primed(&v));
                }
                out.insert(v);
            }
        }
        Term::Tuple(ts) => ts.iter().for_each(|x| collect_term(x, out)),
    }
}

pub fn free_vars_formula(f: &Formula) -> VarSet {
    match f {
        Formula::Cmp(a, _, b) => {
            let mut s = term_vars(a);
            s.extend(term_vars(b));
            s
        }
        Formula::Diamond(g, p) | Formula::Box(g, p) => {
            let mut s = free_vars_game(g);
            let mbv = must_bound_vars(g);
            s.extend(free_vars_formula(p).into_iter().filter(|v| !mbv.contains(v)));
            s
        }
        Formula::True | Formula::False => VarSet::new(),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            let mut s = free_vars_formula(a);
            s.extend(free_vars_formula(b));
            s
        }
        Formula::Not(a) => free_vars_formula(a),
        Formula::Forall(x, p) | Formula::Exists(x, p) => {
            let mut s = free_vars_formula(p);
            s.remove(x);
            s
        }
    }
}

pub fn free_vars_game(g: &Game) -> VarSet {
    match g {
        Game::Test(f) => free_vars_formula(f),
        Game::Assign(_, t) => term_vars(t),
        Game::AssignAny(_) => VarSet::new(),
        Game::Ode(eqs, dom) => {
            let mut s = set(eqs.iter().map(|(x, _)| x.clone()));
            for (_, rhs) in eqs {
                s.extend(term_vars(rhs));
            }
            s.extend(free_vars_formula(dom));
            s
        }
        Game::Seq(a, b) => {
            let mut s = free_vars_game(a);
            let mbv = must_bound_vars(a);
            s.extend(free_vars_game(b).into_iter().filter(|v| !mbv.contains(v)));
            s
        }
        Game::Choice(a, b) | Game::DChoice(a, b) => {
            let mut s = free_vars_game(a);
            s.extend(free_vars_game(b));
            s
        }
        Game::Repeat(a) | Game::Dual(a) | Game::DRepeat(a) => free_vars_game(a),
    }
}

pub fn bound_vars(g: &Game) -> VarSet {
    match g {
        Game::Test(_) => VarSet::new(),
        Game::Assign(x, _) | Game::AssignAny(x) => set([x.clone()]),
        Game::Ode(eqs, _) => set(eqs.iter().flat_map(|(x, _)| [x.clone(), primed(x)])),
        Game::Seq(a, b) | Game::Choice(a, b) | Game::DChoice(a, b) => {
            let mut s = bound_vars(a);
            s.extend(bound_vars(b));
            s
        }
        Game::Repeat(a) | Game::Dual(a) | Game::DRepeat(a) => bound_vars(a),
    }
}

pub fn must_bound_vars(g: &Game) -> VarSet {
    match g {
        Game::Test(_) => VarSet::new(),
        Game::Assign(x, _) | Game::AssignAny(x) => set([x.clone()]),
        Game::Ode(eqs, _) => set(eqs.iter().flat_map(|(x, _)| [x.clone(), primed(x)])),
        Game::Seq(a, b) => {
            let mut s = must_bound_vars(a);
            s.extend(must_bound_vars(b));
            s
        }
        Game::Choice(a, b) | Game::DChoice(a, b) => must_bound_vars(a).intersection(&must_bound_vars(b)).cloned().collect(),
        Game::Repeat(_) | Game::DRepeat(_) => VarSet::new(),
        Game::Dual(a) => must_bound_vars(a),
    }
}

/// Uniform access to the free variables of any syntactic category.
pub trait FreeVars {
    fn free_vars(&self) -> VarSet;
    /// Every variable key mentioned anywhere, bound or free.
    fn all_vars(&self) -> VarSet;
}

impl FreeVars for Term {
    fn free_vars(&self) -> VarSet {
        term_vars(self)
    }
    fn all_vars(&self) -> VarSet {
        term_vars(self)
    }
}

impl FreeVars for Formula {
    fn free_vars(&self) -> VarSet {
        free_vars_formula(self)
    }
    fn all_vars(&self) -> VarSet {
        match self {
            Formula::Cmp(a, _, b) => {
                let mut s = term_vars(a);
                s.extend(term_vars(b));
                s
            }
            Formula::Diamond(g, p) | Formula::Box(g, p) => {
                let mut s = g.all_vars();
                s.extend(p.all_vars());
                s
            }
            Formula::True | Formula::False => VarSet::new(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                let mut s = a.all_vars();
                s.extend(b.all_vars());
                s
            }
            Formula::Not(a) => a.all_vars(),
            Formula::Forall(x, p) | Formula::Exists(x, p) => {
                let mut s = p.all_vars();
                s.insert(x.clone());
                s
            }
        }
    }
}

impl FreeVars for Game {
    fn free_vars(&self) -> VarSet {
        free_vars_game(self)
    }
    fn all_vars(&self) -> VarSet {
        match self {
            Game::Test(f) => f.all_vars(),
            Game::Assign(x, t) => {
                let mut s = term_vars(t);
                s.insert(x.clone());
                s
            }
            Game::AssignAny(x) => set([x.clone()]),
            Game::Ode(eqs, dom) => {
                let mut s = dom.all_vars();
                for (x, rhs) in eqs {
                    s.insert(x.clone());
                    s.insert(primed(x));
                    s.extend(term_vars(rhs));
                }
                s
            }
            Game::Seq(a, b) | Game::Choice(a, b) | Game::DChoice(a, b) => {
                let mut s = a.all_vars();
                s.extend(b.all_vars());
                s
            }
            Game::Repeat(a) | Game::Dual(a) | Game::DRepeat(a) => a.all_vars(),
        }
    }
}

/// Least name of the form `base_0`, `base_1`, ... whose base and primed keys
/// are both outside `avoid`.
pub fn fresh_name(base: &str, avoid: &VarSet) -> String {
    let base = base_name(base);
    (0..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !avoid.contains(n) && !avoid.contains(&primed(n)))
        .expect("unbounded search")
}

/// True when neither `x` nor `x'` occurs in `avoid`.
pub fn is_fresh(x: &str, avoid: &VarSet) -> bool {
    let b = base_name(x);
    !avoid.contains(b) && !avoid.contains(&primed(b))
}
