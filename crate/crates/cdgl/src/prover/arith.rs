//! Arithmetic oracle for first-order leaves: rewriting with context
//! equalities, three-valued interval evaluation, and seeded sampling for
//! counterexamples.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Sequent;
use crate::creal::{q, to_creal, CReal, State};
use crate::ode::expand_differentials;
use crate::statics::*;
use crate::syntax::*;

/// Kleene truth value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    fn or(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "witness")]
pub enum ArithVerdict {
    Proved,
    Assumed,
    /// A state satisfying the context but violating the goal.
    Refuted(Witness),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness(pub Vec<(String, String)>);

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("every state");
        }
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

/// Formulas whose games contain no ODEs or loops.
pub fn is_first_order(f: &Formula) -> bool {
    match f {
        Formula::Cmp(..) | Formula::True | Formula::False => true,
        Formula::Diamond(g, p) | Formula::Box(g, p) => fo_game(g) && is_first_order(p),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            is_first_order(a) && is_first_order(b)
        }
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => is_first_order(a),
    }
}

fn fo_game(g: &Game) -> bool {
    match g {
        Game::Test(f) => is_first_order(f),
        Game::Assign(..) | Game::AssignAny(_) => true,
        Game::Choice(a, b) | Game::Seq(a, b) | Game::DChoice(a, b) => fo_game(a) && fo_game(b),
        Game::Dual(a) => fo_game(a),
        Game::Ode(..) | Game::Repeat(_) | Game::DRepeat(_) => false,
    }
}

const PRECISIONS: [u32; 4] = [32, 64, 128, 256];

/// Values tried for quantified variables inside formulas.
fn quantifier_samples() -> Vec<BigRational> {
    let mut v: Vec<BigRational> = [0, 1, -1, 2, -2, 3, 5, 10, -10, 100].iter().map(|&n| q(n)).collect();
    v.push(BigRational::new(1.into(), 2.into()));
    v.push(BigRational::new((-1).into(), 2.into()));
    v.push(BigRational::new(1.into(), 1000.into()));
    v
}

fn sign_tri(d: &CReal, rel: Rel, kmax: u32) -> Tri {
    for &k in PRECISIONS.iter().filter(|&&k| k <= kmax.max(32)) {
        let Ok(i) = d.refine(k) else { return Tri::Unknown };
        let (pos, neg, zero) = (i.lo.is_positive(), i.hi.is_negative(), i.is_point() && i.lo == q(0));
        let nonneg = !i.lo.is_negative();
        let nonpos = !i.hi.is_positive();
        let t = match rel {
            Rel::Gt if pos => Tri::True,
            Rel::Gt if nonpos => Tri::False,
            Rel::Ge if nonneg => Tri::True,
            Rel::Ge if neg => Tri::False,
            Rel::Lt if neg => Tri::True,
            Rel::Lt if nonneg => Tri::False,
            Rel::Le if nonpos => Tri::True,
            Rel::Le if pos => Tri::False,
            Rel::Eq if zero => Tri::True,
            Rel::Eq if pos || neg => Tri::False,
            Rel::Ne if zero => Tri::False,
            Rel::Ne if pos || neg => Tri::True,
            _ => Tri::Unknown,
        };
        if t != Tri::Unknown {
            return t;
        }
    }
    Tri::Unknown
}

fn real(t: &Term, s: &State) -> Option<CReal> {
    let t = expand_differentials(t).ok()?;
    to_creal(&t, s).ok()
}

/// Three-valued truth of `f` in `s`, refining comparisons up to `kmax` bits.
/// True and False are certain; quantifiers are only ever refuted or
/// witnessed by sampling.
pub fn eval3(f: &Formula, s: &State, kmax: u32) -> Tri {
    match f {
        Formula::True => Tri::True,
        Formula::False => Tri::False,
        Formula::Cmp(a, r, b) => match (real(a, s), real(b, s)) {
            (Some(x), Some(y)) => sign_tri(&x.sub(&y), *r, kmax),
            _ => Tri::Unknown,
        },
        Formula::And(a, b) => eval3(a, s, kmax).and(eval3(b, s, kmax)),
        Formula::Or(a, b) => eval3(a, s, kmax).or(eval3(b, s, kmax)),
        Formula::Imply(a, b) => eval3(a, s, kmax).not().or(eval3(b, s, kmax)),
        Formula::Equiv(a, b) => {
            let (x, y) = (eval3(a, s, kmax), eval3(b, s, kmax));
            x.not().or(y).and(y.not().or(x))
        }
        Formula::Not(a) => eval3(a, s, kmax).not(),
        Formula::Forall(x, p) => quantify(x, p, s, kmax, false),
        Formula::Exists(x, p) => quantify(x, p, s, kmax, true),
        Formula::Diamond(g, p) => eval_game(g, p, s, kmax, true),
        Formula::Box(g, p) => eval_game(g, p, s, kmax, false),
    }
}

fn quantify(x: &str, p: &Formula, s: &State, kmax: u32, exists: bool) -> Tri {
    if !free_vars_formula(p).contains(x) {
        return eval3(p, s, kmax);
    }
    let kmax = kmax.min(64);
    for v in quantifier_samples() {
        let t = eval3(p, &s.set(x, CReal::from_rational(v)), kmax);
        if exists && t == Tri::True {
            return Tri::True;
        }
        if !exists && t == Tri::False {
            return Tri::False;
        }
    }
    Tri::Unknown
}

/// `⟨g⟩p` when `angel`, `[g]p` otherwise.
fn eval_game(g: &Game, p: &Formula, s: &State, kmax: u32, angel: bool) -> Tri {
    match g {
        Game::Test(q) => {
            let c = eval3(q, s, kmax);
            if angel {
                c.and(eval3(p, s, kmax))
            } else {
                c.not().or(eval3(p, s, kmax))
            }
        }
        Game::Assign(x, f) => match real(f, s) {
            Some(v) => eval3(p, &s.set(x, v), kmax),
            None => Tri::Unknown,
        },
        Game::AssignAny(x) => quantify(x, p, s, kmax, angel),
        Game::Choice(a, b) => {
            let (l, r) = (eval_game(a, p, s, kmax, angel), eval_game(b, p, s, kmax, angel));
            if angel {
                l.or(r)
            } else {
                l.and(r)
            }
        }
        Game::DChoice(a, b) => {
            let (l, r) = (eval_game(a, p, s, kmax, angel), eval_game(b, p, s, kmax, angel));
            if angel {
                l.and(r)
            } else {
                l.or(r)
            }
        }
        Game::Seq(a, b) => {
            let inner = if angel { diamond((**b).clone(), p.clone()) } else { boxf((**b).clone(), p.clone()) };
            eval_game(a, &inner, s, kmax, angel)
        }
        Game::Dual(a) => eval_game(a, p, s, kmax, !angel),
        Game::Ode(..) | Game::Repeat(_) | Game::DRepeat(_) => Tri::Unknown,
    }
}

fn flatten(f: &Formula, out: &mut Vec<Formula>) {
    if let Some((a, b)) = f.as_and() {
        flatten(a, out);
        flatten(b, out);
    } else if let Formula::And(a, b) = f {
        flatten(a, out);
        flatten(b, out);
    } else {
        out.push(f.clone());
    }
}

/// `x = t` or `t = x` with `x` not in `t`.
fn as_definition(f: &Formula) -> Option<(String, Term)> {
    let Formula::Cmp(a, Rel::Eq, b) = f else { return None };
    for (l, r) in [(a, b), (b, a)] {
        let key = match l {
            Term::Var(x) => x.clone(),
            Term::PrimedVar(x) => primed(x),
            _ => continue,
        };
        if !term_vars(r).contains(&key) {
            return Some((key, r.clone()));
        }
    }
    None
}

const SAMPLES: usize = 200;
const SAMPLE_SEED: u64 = 0x00cd_61a7;
const SAMPLE_PRECISION: u32 = 64;

fn random_value(rng: &mut ChaCha8Rng) -> BigRational {
    match rng.gen_range(0..3) {
        0 => q(rng.gen_range(-3..=12)),
        1 => BigRational::new(rng.gen_range(-40..=40).into(), 4.into()),
        _ => BigRational::new(rng.gen_range(-2000..=2000).into(), 64.into()),
    }
}

/// Decides a first-order sequent: Proved when interval evaluation certifies
/// the goal (or refutes the context) after rewriting with context
/// equalities, Refuted when a sampled state satisfies the context and
/// violates the goal, Assumed otherwise.
pub fn discharge_arith(seq: &Sequent) -> ArithVerdict {
    let mut atoms = Vec::new();
    for c in seq.ctx.iter().filter(|c| is_first_order(c)) {
        flatten(c, &mut atoms);
    }
    let original_atoms = atoms.clone();
    let mut goal = seq.goal.clone();
    let mut defs: Vec<(String, Term)> = Vec::new();
    // Eliminate defined variables one at a time.
    while let Some(i) = atoms.iter().position(|a| as_definition(a).is_some()) {
        let (x, t) = as_definition(&atoms.remove(i)).expect("checked");
        let sub = |f: &Formula| substitute(f, &x, &t).unwrap_or_else(|_| f.clone());
        atoms = atoms.iter().map(sub).collect();
        goal = sub(&goal);
        defs = defs.into_iter().map(|(y, u)| (y, substitute_term(&u, &x, &t).unwrap_or(u))).collect();
        defs.push((x, t));
    }
    let empty = State::new();
    let ground = |f: &Formula| free_vars_formula(f).is_empty();
    if atoms.iter().any(|a| ground(a) && eval3(a, &empty, 256) == Tri::False) {
        return ArithVerdict::Proved;
    }
    if ground(&goal) {
        match eval3(&goal, &empty, 256) {
            Tri::True => return ArithVerdict::Proved,
            Tri::False if atoms.iter().all(|a| ground(a) && eval3(a, &empty, 256) == Tri::True) => {
                return ArithVerdict::Refuted(Witness(vec![]));
            }
            _ => {}
        }
    }
    match sample_counterexample(seq, &original_atoms, &atoms, &goal, &defs) {
        Some(w) => ArithVerdict::Refuted(w),
        None => ArithVerdict::Assumed,
    }
}

fn sample_counterexample(
    seq: &Sequent,
    original_atoms: &[Formula],
    atoms: &[Formula],
    goal: &Formula,
    defs: &[(String, Term)],
) -> Option<Witness> {
    let mut vars = free_vars_formula(goal);
    for a in atoms {
        vars.extend(free_vars_formula(a));
    }
    for (_, t) in defs {
        vars.extend(term_vars(t));
    }
    for (x, _) in defs {
        vars.remove(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let rounds = if vars.is_empty() { 1 } else { SAMPLES };
    for _ in 0..rounds {
        let mut s = State::new();
        let mut shown = Vec::new();
        for v in &vars {
            let x = random_value(&mut rng);
            shown.push((v.clone(), x.to_string()));
            s = s.set(v, CReal::from_rational(x));
        }
        // Definition terms are free of every eliminated variable.
        let mut ok = true;
        for (x, t) in defs.iter().rev() {
            match real(t, &s) {
                Some(v) => s = s.set(x, v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let holds = |f: &Formula| eval3(f, &s, SAMPLE_PRECISION) == Tri::True;
        if original_atoms.iter().all(holds) && eval3(&seq.goal, &s, SAMPLE_PRECISION) == Tri::False {
            for (x, _) in defs {
                if let Ok(i) = s.get(x).refine(20) {
                    shown.push((x.clone(), format!("~{}", i.mid_f64())));
                }
            }
            return Some(Witness(shown));
        }
    }
    None
}
