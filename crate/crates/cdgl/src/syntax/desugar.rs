//! Rewrites sugar into the three core formula constructors.

use super::ast::*;

pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::Diamond(g, p) => diamond(desugar_game(g), desugar(p)),
        Formula::Box(g, p) => boxf(desugar_game(g), desugar(p)),
        Formula::Cmp(..) => f.clone(),
        Formula::True => tt(),
        Formula::False => ff(),
        Formula::And(a, b) => and(desugar(a), desugar(b)),
        Formula::Or(a, b) => or(desugar(a), desugar(b)),
        Formula::Imply(a, b) => imply(desugar(a), desugar(b)),
        Formula::Equiv(a, b) => {
            let (a, b) = (desugar(a), desugar(b));
            and(imply(a.clone(), b.clone()), imply(b, a))
        }
        Formula::Not(a) => imply(desugar(a), ff()),
        Formula::Forall(x, p) => forall(x, desugar(p)),
        Formula::Exists(x, p) => exists(x, desugar(p)),
    }
}

pub fn desugar_game(g: &Game) -> Game {
    match g {
        Game::Test(f) => test(desugar(f)),
        Game::Assign(..) | Game::AssignAny(_) => g.clone(),
        Game::Ode(eqs, dom) => Game::Ode(eqs.clone(), Box::new(desugar(dom))),
        Game::Choice(a, b) => choice(desugar_game(a), desugar_game(b)),
        Game::Seq(a, b) => seq(desugar_game(a), desugar_game(b)),
        Game::Repeat(a) => Game::Repeat(Box::new(desugar_game(a))),
        Game::Dual(a) => dual(desugar_game(a)),
        Game::DChoice(a, b) => dual(choice(dual(desugar_game(a)), dual(desugar_game(b)))),
        Game::DRepeat(a) => dual(Game::Repeat(Box::new(dual(desugar_game(a))))),
    }
}

/// True when only core constructors occur.
pub fn is_core(f: &Formula) -> bool {
    match f {
        Formula::Diamond(g, p) | Formula::Box(g, p) => is_core_game(g) && is_core(p),
        Formula::Cmp(..) => true,
        _ => false,
    }
}

pub fn is_core_game(g: &Game) -> bool {
    match g {
        Game::Test(f) => is_core(f),
        Game::Assign(..) | Game::AssignAny(_) => true,
        Game::Ode(_, dom) => is_core(dom),
        Game::Choice(a, b) | Game::Seq(a, b) => is_core_game(a) && is_core_game(b),
        Game::Repeat(a) | Game::Dual(a) => is_core_game(a),
        Game::DChoice(..) | Game::DRepeat(_) => false,
    }
}

/// Inverse of [`desugar`] for display: rebuilds connectives from their core
/// encodings. `desugar(&resugar(f)) == f` for core `f`.
pub fn resugar(f: &Formula) -> Formula {
    if *f == tt() {
        return Formula::True;
    }
    if *f == ff() {
        return Formula::False;
    }
    if let Some((a, b)) = f.as_imply() {
        if *b == ff() {
            return Formula::Not(Box::new(resugar(a)));
        }
        return Formula::Imply(Box::new(resugar(a)), Box::new(resugar(b)));
    }
    if let Some((a, b)) = f.as_or() {
        return Formula::Or(Box::new(resugar(a)), Box::new(resugar(b)));
    }
    if let Some((a, b)) = f.as_and() {
        return Formula::And(Box::new(resugar(a)), Box::new(resugar(b)));
    }
    match f {
        Formula::Box(g, p) if matches!(**g, Game::AssignAny(_)) => {
            let Game::AssignAny(x) = &**g else { unreachable!() };
            Formula::Forall(x.clone(), Box::new(resugar(p)))
        }
        Formula::Diamond(g, p) if matches!(**g, Game::AssignAny(_)) => {
            let Game::AssignAny(x) = &**g else { unreachable!() };
            Formula::Exists(x.clone(), Box::new(resugar(p)))
        }
        Formula::Diamond(g, p) => diamond(resugar_game(g), resugar(p)),
        Formula::Box(g, p) => boxf(resugar_game(g), resugar(p)),
        _ => f.clone(),
    }
}

pub fn resugar_game(g: &Game) -> Game {
    match g {
        Game::Test(f) => test(resugar(f)),
        Game::Ode(eqs, dom) => Game::Ode(eqs.clone(), Box::new(resugar(dom))),
        Game::Choice(a, b) => choice(resugar_game(a), resugar_game(b)),
        Game::Seq(a, b) => seq(resugar_game(a), resugar_game(b)),
        Game::Repeat(a) => Game::Repeat(Box::new(resugar_game(a))),
        Game::Dual(a) => dual(resugar_game(a)),
        Game::DChoice(a, b) => Game::DChoice(Box::new(resugar_game(a)), Box::new(resugar_game(b))),
        Game::DRepeat(a) => Game::DRepeat(Box::new(resugar_game(a))),
        Game::Assign(..) | Game::AssignAny(_) => g.clone(),
    }
}
