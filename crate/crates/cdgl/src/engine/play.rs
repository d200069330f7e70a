//! Big-step interpreter pitting an Angel strategy against a Demon strategy.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::evidence::*;
use super::realize::{realize, view, Rz};
use super::relaxed::{fo_evidence, holds_relaxed};
use super::script::{Answer, Construct, ScriptRun};
use super::strategy::{decision_points, modal_core, Plan, Role, Strategy};
use super::EngineError;
use crate::creal::{pow2, sign_at, to_creal, CReal, Interval, State};
use crate::ode::{check_solves, picard_solve, solve_nilpotent, to_poly, OdeSystem, Poly, Solution, SolvesConfig};
use crate::statics::{fresh_name, FreeVars, VarSet};
use crate::syntax::*;

#[derive(Clone, Debug)]
pub struct PlayConfig {
    /// Trace precision `k`; relaxed comparisons use ε = 2^-k.
    pub precision: u32,
    pub repeat_cap: u64,
    pub solves: SolvesConfig,
    /// Record a state snapshot with every event.
    pub snapshots: bool,
}

impl Default for PlayConfig {
    fn default() -> Self {
        PlayConfig { precision: crate::creal::DEFAULT_PRECISION, repeat_cap: 1_000_000, solves: SolvesConfig::default(), snapshots: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub construct: String,
    pub decider: Option<Role>,
    pub choice: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub state: BTreeMap<String, Interval>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Completed,
    /// A player failed one of its own tests or could not start an ODE.
    Forfeit { loser: Role, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct PostRecord {
    pub strategy: String,
    pub postcondition: Option<String>,
    /// Relaxed truth of the postcondition in the final state.
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvidenceRecord {
    pub outcome: Outcome,
    pub angel: PostRecord,
    pub demon: PostRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlayTrace {
    pub events: Vec<TraceEvent>,
    #[serde(rename = "final")]
    pub final_snapshot: BTreeMap<String, Interval>,
    pub evidence: EvidenceRecord,
    #[serde(skip)]
    pub final_state: State,
}

impl PlayTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces serialize")
    }

    /// Both postconditions hold, or the play ended by forfeit.
    pub fn consistent(&self) -> bool {
        match self.evidence.outcome {
            Outcome::Forfeit { .. } => true,
            Outcome::Completed => [&self.evidence.angel, &self.evidence.demon].iter().all(|r| r.holds != Some(false)),
        }
    }
}

/// A side of the current (sub)game: who plays it and, for extracted
/// strategies, the evidence still to be used.
#[derive(Clone)]
struct Side {
    role: Role,
    ev: Option<Ev>,
}

enum Res {
    Done(State, Side, Side),
    Forfeit(State, Role, String),
}

struct Runner {
    cfg: PlayConfig,
    rz: Rz,
    scripts: BTreeMap<&'static str, ScriptRun>,
    events: Vec<TraceEvent>,
}

fn key(r: Role) -> &'static str {
    match r {
        Role::Angel => "angel",
        Role::Demon => "demon",
    }
}

fn approx(v: &CReal) -> String {
    format!("{:.9}", v.approx())
}

/// Plays `g` from `s`. `angel` must be an Angel strategy and `demon` a Demon
/// strategy; extracted strategies must be for `g` itself.
pub fn play(g: &Game, angel: &Strategy, demon: &Strategy, s: &State, cfg: &PlayConfig) -> Result<PlayTrace, EngineError> {
    let g = desugar_game(g);
    if angel.role != Role::Angel || demon.role != Role::Demon {
        return Err(EngineError::StrategyMismatch("expected an Angel and a Demon strategy".into()));
    }
    let rz = Rz { eps: Arc::new(pow2(-(cfg.precision as i64))), k: cfg.precision };
    let mut run = Runner { cfg: cfg.clone(), rz: rz.clone(), scripts: BTreeMap::new(), events: Vec::new() };
    let a = prepare(angel, &g, s, &rz, &mut run)?;
    let d = prepare(demon, &g, s, &rz, &mut run)?;
    let res = run.game(&g, a, d, s.clone())?;
    let (state, outcome) = match res {
        Res::Done(st, _, _) => (st, Outcome::Completed),
        Res::Forfeit(st, loser, reason) => (st, Outcome::Forfeit { loser, reason }),
    };
    let record = |st: &Strategy| {
        let post = st.postcondition().cloned();
        let holds = match (&outcome, &post) {
            (Outcome::Completed, Some(p)) => holds_relaxed(p, &state, &rz.eps).ok(),
            _ => None,
        };
        PostRecord { strategy: st.provenance.to_string(), postcondition: post.map(|p| resugar(&p).to_string()), holds }
    };
    let evidence = EvidenceRecord { angel: record(angel), demon: record(demon), outcome: outcome.clone() };
    Ok(PlayTrace { events: run.events, final_snapshot: state.snapshot(cfg.precision)?, evidence, final_state: state })
}

fn prepare(st: &Strategy, g: &Game, s: &State, rz: &Rz, run: &mut Runner) -> Result<Side, EngineError> {
    match &st.plan {
        Plan::Script(script) => {
            let own = decision_points(g, st.role == Role::Angel);
            if let Some(d) = script.decisions.iter().find(|d| !own.contains(&d.construct)) {
                return Err(EngineError::StrategyMismatch(format!(
                    "{} script answers {} decisions, which {} never makes in this game",
                    st.role,
                    d.construct.name(),
                    st.role
                )));
            }
            run.scripts.insert(key(st.role), ScriptRun::new(script.clone()));
            Ok(Side { role: st.role, ev: None })
        }
        Plan::Proof { root, goal } => {
            let (pres, game, _, _) = modal_core(goal).expect("extracted goals are modal");
            if game != g {
                return Err(EngineError::StrategyMismatch(format!("strategy plays {game}, not {g}")));
            }
            let mut ev = realize(root, s.clone(), Vec::new(), rz)?;
            let mut f = goal.clone();
            for pre in pres {
                if !holds_relaxed(&pre, s, &rz.eps)? {
                    return Err(EngineError::EvidenceRefuted(format!("precondition {pre} fails in the initial state")));
                }
                ev = apply(view(ev, &f, s, rz)?, Input::Ev(fo_evidence(pre.clone(), s.clone(), rz.eps.clone())))?;
                f = f.as_imply().expect("peeled").1.clone();
            }
            Ok(Side { role: st.role, ev: Some(ev) })
        }
    }
}

impl Runner {
    fn event(&mut self, construct: String, decider: Option<Role>, choice: String, s: &State) -> Result<(), EngineError> {
        let state = if self.cfg.snapshots { s.snapshot(self.cfg.precision)? } else { BTreeMap::new() };
        self.events.push(TraceEvent { step: self.events.len(), construct, decider, choice, state });
        Ok(())
    }

    fn script(&mut self, r: Role, c: Construct) -> Result<Answer, EngineError> {
        match self.scripts.get_mut(key(r)) {
            Some(run) => run.next(c),
            None => Err(EngineError::StrategyMismatch(format!("{r} has no script for {}", c.name()))),
        }
    }

    fn push(&self, ev: Ev, g: &Game, dia: bool, s: &State) -> EvResult {
        force(push(ev, g, dia, s, self.rz.k)?)
    }

    fn game(&mut self, g: &Game, mut dia: Side, mut bx: Side, s: State) -> Result<Res, EngineError> {
        match g {
            Game::Test(q) => {
                let ok = holds_relaxed(q, &s, &self.rz.eps);
                let given = match dia.ev.take() {
                    Some(e) => match self.push(e, g, true, &s)? {
                        Ev::Pair(a, b) => {
                            if let Ok(false) = ok {
                                return Err(EngineError::EvidenceRefuted(format!("{} claims ?{q} but it fails", dia.role)));
                            }
                            dia.ev = Some((*b).clone());
                            (*a).clone()
                        }
                        other => return Err(mismatch("pair", &other)),
                    },
                    None => {
                        if !ok? {
                            self.event(format!("?{}", resugar(q)), Some(dia.role), "fail".into(), &s)?;
                            return Ok(Res::Forfeit(s, dia.role, format!("test ?{q} failed")));
                        }
                        fo_evidence((**q).clone(), s.clone(), self.rz.eps.clone())
                    }
                };
                if let Some(e) = bx.ev.take() {
                    bx.ev = Some(apply(self.push(e, g, false, &s)?, Input::Ev(given))?);
                }
                self.event(format!("?{}", resugar(q)), Some(dia.role), "pass".into(), &s)?;
                Ok(Res::Done(s, dia, bx))
            }
            Game::Assign(x, f) => {
                let v = to_creal(f, &s)?;
                for (side, d) in [(&mut dia, true), (&mut bx, false)] {
                    if let Some(e) = side.ev.take() {
                        side.ev = Some(push(e, g, d, &s, self.rz.k)?);
                    }
                }
                let s2 = s.set(x, v.clone());
                self.event(format!("{x}:={f}"), None, approx(&v), &s2)?;
                Ok(Res::Done(s2, dia, bx))
            }
            Game::AssignAny(x) => {
                let v = match dia.ev.take() {
                    Some(e) => match self.push(e, g, true, &s)? {
                        Ev::Witness(v, e2) => {
                            dia.ev = Some((*e2).clone());
                            v
                        }
                        other => return Err(mismatch("witness", &other)),
                    },
                    None => match self.script(dia.role, Construct::AssignAny)? {
                        Answer::Value(q) => CReal::from_rational(q),
                        _ => unreachable!("validated"),
                    },
                };
                if let Some(e) = bx.ev.take() {
                    bx.ev = Some(apply(self.push(e, g, false, &s)?, Input::Val(v.clone()))?);
                }
                let s2 = s.set(x, v.clone());
                self.event(format!("{x}:=*"), Some(dia.role), approx(&v), &s2)?;
                Ok(Res::Done(s2, dia, bx))
            }
            Game::Choice(a, b) => {
                let right = match dia.ev.take() {
                    Some(e) => match self.push(e, g, true, &s)? {
                        Ev::Inj(br, e2) => {
                            dia.ev = Some((*e2).clone());
                            br == Branch::Right
                        }
                        other => return Err(mismatch("injection", &other)),
                    },
                    None => match self.script(dia.role, Construct::Choice)? {
                        Answer::Branch(r) => r,
                        _ => unreachable!("validated"),
                    },
                };
                if let Some(e) = bx.ev.take() {
                    match self.push(e, g, false, &s)? {
                        Ev::Pair(l, r) => bx.ev = Some((*if right { r } else { l }).clone()),
                        other => return Err(mismatch("pair", &other)),
                    }
                }
                self.event("∪".into(), Some(dia.role), if right { "right" } else { "left" }.into(), &s)?;
                self.game(if right { b } else { a }, dia, bx, s)
            }
            Game::Seq(a, b) => {
                for (side, d) in [(&mut dia, true), (&mut bx, false)] {
                    if let Some(e) = side.ev.take() {
                        side.ev = Some(push(e, g, d, &s, self.rz.k)?);
                    }
                }
                match self.game(a, dia, bx, s)? {
                    Res::Done(s1, d1, b1) => self.game(b, d1, b1, s1),
                    f => Ok(f),
                }
            }
            Game::Dual(a) => {
                self.event("d".into(), None, format!("{} now plays the Angel side", bx.role), &s)?;
                match self.game(a, bx, dia, s)? {
                    Res::Done(s1, b1, d1) => Ok(Res::Done(s1, d1, b1)),
                    f => Ok(f),
                }
            }
            Game::Repeat(body) => self.repeat(g, body, dia, bx, s),
            Game::Ode(..) => self.ode(g, dia, bx, s),
            Game::DChoice(..) | Game::DRepeat(_) => self.game(&desugar_game(g), dia, bx, s),
        }
    }

    fn repeat(&mut self, g: &Game, body: &Game, mut dia: Side, mut bx: Side, mut s: State) -> Result<Res, EngineError> {
        for round in 0.. {
            if round >= self.cfg.repeat_cap {
                return Err(EngineError::NonTermination(self.cfg.repeat_cap));
            }
            let (stop, next) = match dia.ev.take() {
                Some(e) => match self.push(e, g, true, &s)? {
                    Ev::Stop(e2) => (true, Some((*e2).clone())),
                    Ev::Go(e2) => (false, Some((*e2).clone())),
                    other => return Err(mismatch("stop/go", &other)),
                },
                None => match self.script(dia.role, Construct::Repeat)? {
                    Answer::Stop(b) => (b, None),
                    _ => unreachable!("validated"),
                },
            };
            dia.ev = next;
            if let Some(e) = bx.ev.take() {
                match self.push(e, g, false, &s)? {
                    Ev::Loop { now, step } => bx.ev = Some((*if stop { now } else { step }).clone()),
                    other => return Err(mismatch("loop", &other)),
                }
            }
            self.event("*".into(), Some(dia.role), format!("{} (round {round})", if stop { "stop" } else { "go" }), &s)?;
            if stop {
                return Ok(Res::Done(s, dia, bx));
            }
            match self.game(body, dia, bx, s)? {
                Res::Done(s1, d1, b1) => {
                    s = s1;
                    dia = d1;
                    bx = b1;
                }
                f => return Ok(f),
            }
        }
        unreachable!()
    }

    fn ode(&mut self, g: &Game, mut dia: Side, mut bx: Side, s: State) -> Result<Res, EngineError> {
        let sys = OdeSystem::from_game(g).expect("ODE game");
        let k = self.rz.k;
        let (dur, sol) = match dia.ev.take() {
            Some(e) => match self.push(e, g, true, &s)? {
                Ev::Ode { dur, sol, post } => {
                    self.validate_plan(&sys, &s, &dur, &sol, dia.role)?;
                    dia.ev = Some((*post).clone());
                    (dur, sol)
                }
                other => return Err(mismatch("ODE plan", &other)),
            },
            None => {
                let want = match self.script(dia.role, Construct::Ode)? {
                    Answer::Value(q) => q,
                    _ => unreachable!("validated"),
                };
                match self.scripted_flow(&sys, &s, &want)? {
                    Some(plan) => plan,
                    None => {
                        self.event(format!("{g}"), Some(dia.role), "domain fails initially".into(), &s)?;
                        return Ok(Res::Forfeit(s, dia.role, "ODE domain fails in the initial state".into()));
                    }
                }
            }
        };
        let end = ode_end(&sys, &s, &dur, &sol, k)?;
        if let Some(e) = bx.ev.take() {
            let flow = Flow { sys: sys.clone(), dur: dur.clone(), sol, start: s.clone(), end: end.clone() };
            bx.ev = Some(apply(self.push(e, g, false, &s)?, Input::Flow(Arc::new(flow)))?);
        }
        self.event(format!("{}", resugar_game(&sys.to_game())), Some(dia.role), format!("duration {}", approx(&dur)), &end)?;
        Ok(Res::Done(end, dia, bx))
    }

    /// Checks an extracted ODE plan: nonnegative duration, a valid solution
    /// and the domain at sampled times.
    fn validate_plan(&self, sys: &OdeSystem, s: &State, dur: &CReal, sol: &Solution, who: Role) -> Result<(), EngineError> {
        let eps = &self.rz.eps;
        let iv = dur.refine(self.rz.k)?;
        if iv.hi < -(**eps).clone() {
            return Err(EngineError::SolutionRejected(format!("{who} chose a negative duration")));
        }
        let d = iv.lo.max(BigRational::zero());
        if !check_solves(sol, s, &d, sys, &self.cfg.solves) {
            return Err(EngineError::SolutionRejected(format!("{who}'s solution does not solve {}", sys.to_game())));
        }
        for j in 0..=8 {
            let tau = dur.mul(&CReal::from_rational(BigRational::new(j.into(), 8.into())));
            let st = ode_end(sys, s, &tau, sol, self.rz.k)?;
            if let Ok(false) = holds_relaxed(&sys.domain, &st, eps) {
                return Err(EngineError::EvidenceRefuted(format!("{who}'s flow leaves the domain {}", sys.domain)));
            }
        }
        Ok(())
    }

    /// Solution and duration for a scripted ODE move: the requested time,
    /// shortened to stay inside the domain. `None` when the domain fails
    /// at the start.
    fn scripted_flow(&self, sys: &OdeSystem, s: &State, want: &BigRational) -> Result<Option<(CReal, Solution)>, EngineError> {
        let eps = &self.rz.eps;
        if !holds_relaxed(&sys.domain, s, eps)? {
            return Ok(None);
        }
        let mut avoid: VarSet = g_vars(sys);
        avoid.extend(s.keys().cloned());
        let time = fresh_name("time", &avoid);
        if let Ok(sym) = solve_nilpotent(sys, &time) {
            let dur = self.clip_symbolic(sys, &sym, s, want)?;
            return Ok(Some((dur, Solution::Symbolic(sym))));
        }
        let samp = picard_solve(sys, s, want, self.rz.k.min(30))?;
        let sol = Solution::Sampled(samp);
        let dom = sys.domain.clone();
        let bound = first_exit(want, |t| {
            let st = ode_end(sys, s, &CReal::from_rational(t.clone()), &sol, self.rz.k)?;
            holds_relaxed(&dom, &st, eps)
        })?;
        Ok(Some((CReal::from_rational(bound), sol)))
    }

    fn clip_symbolic(&self, sys: &OdeSystem, sym: &crate::ode::SymbolicSolution, s: &State, want: &BigRational) -> Result<CReal, EngineError> {
        let mut dur = CReal::from_rational(want.clone());
        let mut atoms = Vec::new();
        conjuncts(&sys.domain, &mut atoms);
        let vars = sys.var_set();
        for atom in atoms {
            let Formula::Cmp(a, r, b) = &atom else { continue };
            let h = match r {
                Rel::Ge | Rel::Gt => minus(a.clone(), b.clone()),
                Rel::Le | Rel::Lt => minus(b.clone(), a.clone()),
                Rel::Eq | Rel::Ne => continue,
            };
            let along = to_poly(&h, &vars).ok().map(|p| p.compose(&sym.polys).by_power(&sym.time));
            let linear = along.as_ref().filter(|c| c.keys().all(|&e| e <= 1));
            match linear {
                Some(coef) => {
                    let c = |e: u32| -> Result<CReal, EngineError> {
                        Ok(to_creal(&coef.get(&e).cloned().unwrap_or_else(Poly::zero).to_term(), s)?)
                    };
                    let (c0, c1) = (c(0)?, c(1)?);
                    if sign_at(&c1, self.rz.k)? == Some(std::cmp::Ordering::Less) {
                        let root = c0.div(&c1.neg())?.max(&CReal::zero());
                        dur = dur.min(&root);
                    }
                }
                None => {
                    let eps = &self.rz.eps;
                    let sol = Solution::Symbolic(sym.clone());
                    let bound = first_exit(want, |t| {
                        let st = ode_end(sys, s, &CReal::from_rational(t.clone()), &sol, self.rz.k)?;
                        holds_relaxed(&atom, &st, eps)
                    })?;
                    dur = dur.min(&CReal::from_rational(bound));
                }
            }
        }
        Ok(dur)
    }
}

fn g_vars(sys: &OdeSystem) -> VarSet {
    sys.to_game().all_vars()
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f.as_and() {
        Some((a, b)) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        None => match f {
            Formula::And(a, b) => {
                conjuncts(a, out);
                conjuncts(b, out);
            }
            _ => out.push(f.clone()),
        },
    }
}

/// Largest grid time in `[0, want]` up to which `ok` holds, refined by
/// bisection after the first failing sample.
fn first_exit(want: &BigRational, ok: impl Fn(&BigRational) -> Result<bool, EngineError>) -> Result<BigRational, EngineError> {
    const GRID: i64 = 64;
    let mut prev = BigRational::zero();
    for i in 1..=GRID {
        let t = want * BigRational::new(i.into(), GRID.into());
        if !ok(&t)? {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..48 {
                let mid = (&lo + &hi) / BigRational::from_integer(2.into());
                if ok(&mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(lo);
        }
        prev = t;
    }
    Ok(want.clone().max(BigRational::zero()).abs())
}
