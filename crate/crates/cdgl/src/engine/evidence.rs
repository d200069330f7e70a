//! Runtime evidence: the computational content of a proof.
//!
//! Evidence for `⟨α⟩φ` is Angel's plan for `α`; evidence for `[α]φ` is the
//! response to whatever the opponent does in `α`. Per formula:
//!
//! | formula            | evidence                                      |
//! |--------------------|-----------------------------------------------|
//! | comparison         | `Unit`                                        |
//! | `⟨?ψ⟩φ` / `[?ψ]φ`  | `Pair(ψ, φ)` / `Fun(Ev ψ ↦ φ)`                |
//! | `⟨α∪β⟩φ` / `[α∪β]φ`| `Inj` / `Pair`                                |
//! | `(x:=f)φ`          | evidence for `φ` after the assignment         |
//! | `⟨x:=*⟩φ` / `[x:=*]φ` | `Witness(v, φ)` / `Fun(Val v ↦ φ)`         |
//! | `(α;β)φ`           | evidence for `(α)(β)φ`                        |
//! | `(α^d)φ`           | evidence for the opposite modality of `α`     |
//! | `⟨α*⟩φ` / `[α*]φ`  | `Stop`/`Go` / `Loop { now, step }`            |
//! | `⟨ODE⟩φ` / `[ODE]φ`| `Ode { dur, sol, post }` / `Fun(Flow ↦ φ)`    |
//!
//! `Mapped(e, k)` is evidence for `(α)ψ` built from evidence `e` for `(α)φ`
//! and a continuation turning `φ` evidence into `ψ` evidence once `α` has
//! been played. [`push`] moves the continuation one construct inward.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::EngineError;
use crate::creal::{to_creal, CReal, State};
use crate::ode::{OdeSystem, Solution};
use crate::statics::bound_vars;
use crate::syntax::{Game, primed};

pub type EvResult = Result<Ev, EngineError>;
pub type Cont = Arc<dyn Fn(&State, Ev) -> EvResult + Send + Sync>;
type Func = Arc<dyn Fn(Input) -> EvResult + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Left,
    Right,
}

/// One ODE move as seen by the responding player.
#[derive(Clone, Debug)]
pub struct Flow {
    pub sys: OdeSystem,
    pub dur: CReal,
    pub sol: Solution,
    pub start: State,
    pub end: State,
}

#[derive(Clone)]
pub enum Input {
    Ev(Ev),
    Val(CReal),
    Flow(Arc<Flow>),
}

pub struct Memo {
    f: Box<dyn Fn() -> EvResult + Send + Sync>,
    v: OnceLock<EvResult>,
}

#[derive(Clone)]
pub enum Ev {
    Unit,
    Pair(Arc<Ev>, Arc<Ev>),
    Inj(Branch, Arc<Ev>),
    Witness(CReal, Arc<Ev>),
    Fun(Func),
    Ode { dur: CReal, sol: Solution, post: Arc<Ev> },
    Stop(Arc<Ev>),
    Go(Arc<Ev>),
    Loop { now: Arc<Ev>, step: Arc<Ev> },
    Mapped(Arc<Ev>, Cont),
    /// Computed on first use, then memoized.
    Lazy(Arc<Memo>),
}

impl fmt::Debug for Ev {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.shape())
    }
}

impl Ev {
    pub fn lazy(f: impl Fn() -> EvResult + Send + Sync + 'static) -> Ev {
        Ev::Lazy(Arc::new(Memo { f: Box::new(f), v: OnceLock::new() }))
    }

    pub fn fun(f: impl Fn(Input) -> EvResult + Send + Sync + 'static) -> Ev {
        Ev::Fun(Arc::new(f))
    }

    pub fn pair(a: Ev, b: Ev) -> Ev {
        Ev::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn mapped(e: Ev, k: impl Fn(&State, Ev) -> EvResult + Send + Sync + 'static) -> Ev {
        Ev::Mapped(Arc::new(e), Arc::new(k))
    }

    pub fn shape(&self) -> &'static str {
        match self {
            Ev::Unit => "unit",
            Ev::Pair(..) => "pair",
            Ev::Inj(..) => "injection",
            Ev::Witness(..) => "witness",
            Ev::Fun(_) => "function",
            Ev::Ode { .. } => "ODE plan",
            Ev::Stop(_) => "stop",
            Ev::Go(_) => "go",
            Ev::Loop { .. } => "loop",
            Ev::Mapped(..) => "mapped",
            Ev::Lazy(_) => "lazy",
        }
    }
}

pub(crate) fn mismatch(want: &str, got: &Ev) -> EngineError {
    EngineError::StrategyMismatch(format!("expected {want} evidence, found {}", got.shape()))
}

/// Runs pending thunks until a constructor appears.
pub fn force(mut ev: Ev) -> EvResult {
    while let Ev::Lazy(m) = &ev {
        let next = m.v.get_or_init(|| (m.f)()).clone()?;
        ev = next;
    }
    Ok(ev)
}

pub fn apply(ev: Ev, inp: Input) -> EvResult {
    match force(ev)? {
        Ev::Fun(f) => f(inp),
        other => Err(mismatch("function", &other)),
    }
}

impl Input {
    pub fn val(self) -> Result<CReal, EngineError> {
        match self {
            Input::Val(v) => Ok(v),
            _ => Err(EngineError::StrategyMismatch("expected a value".into())),
        }
    }

    pub fn flow(self) -> Result<Arc<Flow>, EngineError> {
        match self {
            Input::Flow(f) => Ok(f),
            _ => Err(EngineError::StrategyMismatch("expected an ODE flow".into())),
        }
    }

    pub fn ev(self) -> Result<Ev, EngineError> {
        match self {
            Input::Ev(e) => Ok(e),
            _ => Err(EngineError::StrategyMismatch("expected evidence".into())),
        }
    }
}

/// Copies the keys bound by `g` from `post` into `base`.
pub(crate) fn merge(base: &State, post: &State, g: &Game) -> State {
    bound_vars(g).iter().fold(base.clone(), |acc, x| acc.set(x, post.get(x)))
}

/// State after following `sol` for `dur`; only the system's variables and
/// their primes change.
pub(crate) fn ode_end(sys: &OdeSystem, s: &State, dur: &CReal, sol: &Solution, k: u32) -> Result<State, EngineError> {
    let st = sol.state_at(sys, s, dur, k)?;
    Ok(sys.vars().iter().fold(s.clone(), |acc, x| acc.set(x, st.get(x)).set(&primed(x), st.get(&primed(x)))))
}

fn lift(k: Cont) -> Cont {
    Arc::new(move |_s: &State, e: Ev| Ok(Ev::Mapped(Arc::new(e), k.clone())))
}

fn later(k: &Cont, s: State, e: Ev) -> Arc<Ev> {
    let k = k.clone();
    Arc::new(Ev::lazy(move || k(&s, e.clone())))
}

/// Head-normalizes evidence for `(g)φ` (`dia` selects the modality) so that
/// no continuation wraps the constructor for `g`. For assignments the
/// result is the evidence for `φ` in the post state.
pub fn push(ev: Ev, g: &Game, dia: bool, s: &State, k: u32) -> EvResult {
    let ev = force(ev)?;
    match g {
        Game::Assign(x, f) => match ev {
            Ev::Mapped(inner, cont) => {
                let inner = push((*inner).clone(), g, dia, s, k)?;
                cont(&s.set(x, to_creal(f, s)?), inner)
            }
            other => Ok(other),
        },
        Game::Seq(..) => match ev {
            Ev::Mapped(inner, cont) => Ok(Ev::Mapped(inner, lift(cont))),
            other => Ok(other),
        },
        Game::Dual(_) => Ok(ev),
        _ => match ev {
            Ev::Mapped(inner, cont) => {
                let inner = push((*inner).clone(), g, dia, s, k)?;
                distribute(inner, cont, g, dia, s, k)
            }
            other => Ok(other),
        },
    }
}

fn distribute(inner: Ev, cont: Cont, g: &Game, dia: bool, s: &State, k: u32) -> EvResult {
    Ok(match (g, dia, inner) {
        (Game::Test(_), true, Ev::Pair(a, b)) => Ev::Pair(a, later(&cont, s.clone(), (*b).clone())),
        (Game::Test(_), false, Ev::Fun(f)) => {
            let s = s.clone();
            Ev::fun(move |i| cont(&s, f(i)?))
        }
        (Game::AssignAny(x), true, Ev::Witness(v, e)) => {
            let post = s.set(x, v.clone());
            Ev::Witness(v, later(&cont, post, (*e).clone()))
        }
        (Game::AssignAny(x), false, Ev::Fun(f)) => {
            let (s, x) = (s.clone(), x.clone());
            Ev::fun(move |i| {
                let v = i.clone().val()?;
                cont(&s.set(&x, v), f(i)?)
            })
        }
        (Game::Choice(..), true, Ev::Inj(b, e)) => Ev::Inj(b, Arc::new(Ev::Mapped(e, cont))),
        (Game::Choice(..), false, Ev::Pair(a, b)) => {
            Ev::Pair(Arc::new(Ev::Mapped(a, cont.clone())), Arc::new(Ev::Mapped(b, cont)))
        }
        (Game::Ode(..), true, Ev::Ode { dur, sol, post }) => {
            let sys = OdeSystem::from_game(g).expect("ODE game");
            let end = ode_end(&sys, s, &dur, &sol, k)?;
            let post = later(&cont, end, (*post).clone());
            Ev::Ode { dur, sol, post }
        }
        (Game::Ode(..), false, Ev::Fun(f)) => Ev::fun(move |i| {
            let fl = i.clone().flow()?;
            cont(&fl.end, f(i)?)
        }),
        (Game::Repeat(_), true, Ev::Stop(e)) => Ev::Stop(later(&cont, s.clone(), (*e).clone())),
        (Game::Repeat(_), true, Ev::Go(e)) => Ev::Go(Arc::new(Ev::Mapped(e, lift(cont)))),
        (Game::Repeat(_), false, Ev::Loop { now, step }) => Ev::Loop {
            now: later(&cont, s.clone(), (*now).clone()),
            step: Arc::new(Ev::Mapped(step, lift(cont))),
        },
        (_, _, other) => {
            return Err(EngineError::StrategyMismatch(format!(
                "{} evidence does not fit the {} game {g}",
                other.shape(),
                if dia { "Angelic" } else { "Demonic" }
            )))
        }
    })
}
