use crate::syntax::*;

/// Transposition renaming: swaps `x` with `y` and `x'` with `y'` everywhere,
/// binders included.
pub trait Rename: Sized {
    fn map_keys(&self, f: &dyn Fn(&str) -> String) -> Self;

    fn rename(&self, x: &str, y: &str) -> Self {
        let (x, y) = (base_name(x).to_string(), base_name(y).to_string());
        let (xp, yp) = (primed(&x), primed(&y));
        self.map_keys(&|k: &str| {
            if k == x {
                y.clone()
            } else if k == y {
                x.clone()
            } else if k == xp {
                yp.clone()
            } else if k == yp {
                xp.clone()
            } else {
                k.to_string()
            }
        })
    }
}

fn key_term(k: String) -> Term {
    var(&k)
}

impl Rename for Term {
    fn map_keys(&self, f: &dyn Fn(&str) -> String) -> Term {
        match self {
            Term::RealLit(_) => self.clone(),
            Term::Var(x) => key_term(f(x)),
            Term::PrimedVar(x) => key_term(f(&primed(x))),
            Term::Plus(a, b) => Term::Plus(Box::new(a.map_keys(f)), Box::new(b.map_keys(f))),
            Term::Times(a, b) => Term::Times(Box::new(a.map_keys(f)), Box::new(b.map_keys(f))),
            Term::Div(a, b) => Term::Div(Box::new(a.map_keys(f)), Box::new(b.map_keys(f))),
            Term::Min(a, b) => Term::Min(Box::new(a.map_keys(f)), Box::new(b.map_keys(f))),
            Term::Max(a, b) => Term::Max(Box::new(a.map_keys(f)), Box::new(b.map_keys(f))),
            Term::Neg(a) => Term::Neg(Box::new(a.map_keys(f))),
            Term::Sqrt(a) => Term::Sqrt(Box::new(a.map_keys(f))),
            Term::Differential(a) => Term::Differential(Box::new(a.map_keys(f))),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.map_keys(f)).collect()),
        }
    }
}

impl Rename for Formula {
    fn map_keys(&self, f: &dyn Fn(&str) -> String) -> Formula {
        let bx = |p: &Formula| Box::new(p.map_keys(f));
        match self {
            Formula::Diamond(g, p) => Formula::Diamond(Box::new(g.map_keys(f)), bx(p)),
            Formula::Box(g, p) => Formula::Box(Box::new(g.map_keys(f)), bx(p)),
            Formula::Cmp(a, r, b) => Formula::Cmp(a.map_keys(f), *r, b.map_keys(f)),
            Formula::True | Formula::False => self.clone(),
            Formula::And(a, b) => Formula::And(bx(a), bx(b)),
            Formula::Or(a, b) => Formula::Or(bx(a), bx(b)),
            Formula::Imply(a, b) => Formula::Imply(bx(a), bx(b)),
            Formula::Equiv(a, b) => Formula::Equiv(bx(a), bx(b)),
            Formula::Not(a) => Formula::Not(bx(a)),
            Formula::Forall(x, p) => Formula::Forall(f(x), bx(p)),
            Formula::Exists(x, p) => Formula::Exists(f(x), bx(p)),
        }
    }
}

impl Rename for Game {
    fn map_keys(&self, f: &dyn Fn(&str) -> String) -> Game {
        let bx = |g: &Game| Box::new(g.map_keys(f));
        match self {
            Game::Test(p) => Game::Test(Box::new(p.map_keys(f))),
            Game::Assign(x, t) => Game::Assign(f(x), t.map_keys(f)),
            Game::AssignAny(x) => Game::AssignAny(f(x)),
            Game::Ode(eqs, dom) => Game::Ode(
                eqs.iter().map(|(x, rhs)| (f(x), rhs.map_keys(f))).collect(),
                Box::new(dom.map_keys(f)),
            ),
            Game::Choice(a, b) => Game::Choice(bx(a), bx(b)),
            Game::DChoice(a, b) => Game::DChoice(bx(a), bx(b)),
            Game::Seq(a, b) => Game::Seq(bx(a), bx(b)),
            Game::Repeat(a) => Game::Repeat(bx(a)),
            Game::Dual(a) => Game::Dual(bx(a)),
            Game::DRepeat(a) => Game::DRepeat(bx(a)),
        }
    }
}

/// One-directional renaming of a single key (`from` becomes `to`, nothing
/// else moves). Used where the calculus renames only primed copies.
pub fn rename_exact(f: &Formula, from: &str, to: &str) -> Formula {
    f.map_keys(&|k: &str| if k == from { to.to_string() } else { k.to_string() })
}

pub fn rename_term_exact(t: &Term, from: &str, to: &str) -> Term {
    t.map_keys(&|k: &str| if k == from { to.to_string() } else { k.to_string() })
}

pub fn rename_game_exact(g: &Game, from: &str, to: &str) -> Game {
    g.map_keys(&|k: &str| if k == from { to.to_string() } else { k.to_string() })
}
