//! Compact printing that reparses to the same tree.

use std::fmt::{self, Display, Formatter, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::*;

/// Renders a rational as an integer, an exact decimal, or `p/q`.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        return q.numer().to_string();
    }
    let mut d = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() && twos.max(fives) <= 12 {
        let places = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10), places);
        let scaled = (q.abs() * BigRational::from_integer(scale.clone())).to_integer();
        let int = &scaled / &scale;
        let frac = (&scaled % &scale).to_string();
        let sign = if q.is_negative() { "-" } else { "" };
        return format!("{sign}{int}.{}{frac}", "0".repeat(places - frac.len()));
    }
    format!("{}/{}", q.numer(), q.denom())
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Plus(..) => 0,
        Term::Times(..) | Term::Div(..) => 1,
        Term::Neg(_) => 2,
        Term::RealLit(q) if q.is_negative() => 2,
        _ => 3,
    }
}

fn write_term(out: &mut String, t: &Term, min: u8) {
    if term_prec(t) < min {
        out.push('(');
        write_term(out, t, 0);
        out.push(')');
        return;
    }
    match t {
        Term::RealLit(q) => out.push_str(&fmt_rational(q)),
        Term::Var(x) => out.push_str(x),
        Term::PrimedVar(x) => {
            out.push_str(x);
            out.push('\'');
        }
        Term::Plus(a, b) => {
            write_term(out, a, 0);
            if let Term::Neg(inner) = &**b {
                out.push('-');
                write_term(out, inner, 1);
            } else {
                out.push('+');
                write_term(out, b, 1);
            }
        }
        Term::Times(a, b) => {
            write_term(out, a, 1);
            out.push('*');
            write_term(out, b, 2);
        }
        Term::Div(a, b) => {
            write_term(out, a, 1);
            out.push('/');
            if let Term::RealLit(_) = &**b {
                out.push('(');
                write_term(out, b, 0);
                out.push(')');
            } else {
                write_term(out, b, 2);
            }
        }
        Term::Neg(a) => {
            out.push('-');
            if let Term::RealLit(_) = &**a {
                out.push('(');
                write_term(out, a, 0);
                out.push(')');
            } else {
                write_term(out, a, 2);
            }
        }
        Term::Min(a, b) | Term::Max(a, b) => {
            out.push_str(if matches!(t, Term::Min(..)) { "min(" } else { "max(" });
            write_term(out, a, 0);
            out.push(',');
            write_term(out, b, 0);
            out.push(')');
        }
        Term::Sqrt(a) => {
            out.push_str("sqrt(");
            write_term(out, a, 0);
            out.push(')');
        }
        Term::Differential(a) => {
            out.push('(');
            write_term(out, a, 0);
            out.push_str(")'");
        }
        Term::Tuple(ts) => {
            out.push('(');
            for (i, x) in ts.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_term(out, x, 0);
            }
            out.push(')');
        }
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Equiv(..) => 0,
        Formula::Imply(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) | Formula::Box(..) | Formula::Diamond(..) | Formula::Forall(..) | Formula::Exists(..) => 4,
        Formula::Cmp(..) | Formula::True | Formula::False => 5,
    }
}

fn write_formula(out: &mut String, f: &Formula, min: u8) {
    if formula_prec(f) < min {
        out.push('(');
        write_formula(out, f, 0);
        out.push(')');
        return;
    }
    match f {
        Formula::True => out.push_str("tt"),
        Formula::False => out.push_str("ff"),
        Formula::Cmp(a, r, b) => {
            write_term(out, a, 0);
            out.push_str(r.symbol());
            write_term(out, b, 0);
        }
        Formula::Equiv(a, b) => bin_formula(out, a, "<->", b, 1, 0),
        Formula::Imply(a, b) => bin_formula(out, a, "->", b, 2, 1),
        Formula::Or(a, b) => bin_formula(out, a, "|", b, 2, 3),
        Formula::And(a, b) => bin_formula(out, a, "&", b, 3, 4),
        Formula::Not(a) => {
            out.push('!');
            write_formula(out, a, 4);
        }
        Formula::Box(g, p) => {
            out.push('[');
            write_game(out, g, 0);
            out.push(']');
            write_formula(out, p, 4);
        }
        Formula::Diamond(g, p) => {
            out.push('<');
            write_game(out, g, 0);
            out.push('>');
            write_formula(out, p, 4);
        }
        Formula::Forall(x, p) | Formula::Exists(x, p) => {
            out.push_str(if matches!(f, Formula::Forall(..)) { "forall " } else { "exists " });
            out.push_str(x);
            out.push('.');
            write_formula(out, p, 4);
        }
    }
}

fn bin_formula(out: &mut String, a: &Formula, op: &str, b: &Formula, la: u8, lb: u8) {
    write_formula(out, a, la);
    out.push_str(op);
    write_formula(out, b, lb);
}

fn game_prec(g: &Game) -> u8 {
    match g {
        Game::Choice(..) | Game::DChoice(..) => 0,
        Game::Seq(..) => 1,
        Game::Repeat(_) | Game::Dual(_) | Game::DRepeat(_) => 2,
        _ => 3,
    }
}

fn write_game(out: &mut String, g: &Game, min: u8) {
    if game_prec(g) < min {
        out.push('{');
        write_game(out, g, 0);
        out.push('}');
        return;
    }
    match g {
        Game::Test(f) => {
            out.push('?');
            write_formula(out, f, 0);
        }
        Game::Assign(x, t) => {
            out.push_str(x);
            out.push_str(":=");
            write_term(out, t, 0);
        }
        Game::AssignAny(x) => {
            out.push_str(x);
            out.push_str(":=*");
        }
        Game::Ode(eqs, dom) => {
            out.push('{');
            for (i, (x, rhs)) in eqs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x}'=");
                write_term(out, rhs, 0);
            }
            if **dom != Formula::True {
                out.push('&');
                write_formula(out, dom, 0);
            }
            out.push('}');
        }
        Game::Choice(a, b) | Game::DChoice(a, b) => {
            write_game(out, a, 1);
            out.push_str(if matches!(g, Game::Choice(..)) { "++" } else { "&&" });
            write_game(out, b, 0);
        }
        Game::Seq(a, b) => {
            write_game(out, a, 2);
            out.push(';');
            write_game(out, b, 1);
        }
        Game::Repeat(a) | Game::Dual(a) | Game::DRepeat(a) => {
            match &**a {
                Game::Ode(..) | Game::Repeat(_) | Game::Dual(_) | Game::DRepeat(_) => write_game(out, a, 2),
                _ => {
                    out.push('{');
                    write_game(out, a, 0);
                    out.push('}');
                }
            }
            out.push_str(match g {
                Game::Repeat(_) => "*",
                Game::Dual(_) => "^d",
                _ => "^X",
            });
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self, 0);
        f.write_str(&s)
    }
}

impl Display for Game {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_game(&mut s, self, 0);
        f.write_str(&s)
    }
}
