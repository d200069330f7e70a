//! Turns a checked proof tree into evidence, rule by rule.
//!
//! `realize(n, σ, env)` builds evidence for the goal of `n` when the proof
//! state is `σ` and `env` holds evidence for the context. The proof state
//! extends the game state with ghosts the proof introduced (old values kept
//! by assignment rules, metric snapshots, renamed copies). After a game is
//! played, only the variables it binds are copied back into `σ`.

use std::sync::Arc;

use num_rational::BigRational;

use super::evidence::*;
use super::relaxed::{fo_evidence, holds_relaxed};
use super::EngineError;
use crate::creal::{to_creal, CReal, State};
use crate::ode::{picard_solve, OdeSystem, Solution};
use crate::prover::{Arg, Aux, CheckedNode, Rule};
use crate::syntax::*;

/// Proof node shared between closures.
#[derive(Debug)]
pub(crate) struct PNode {
    pub rule: Rule,
    pub args: Vec<Arg>,
    pub goal: Formula,
    pub aux: Aux,
    pub path: String,
    pub children: Vec<Arc<PNode>>,
}

impl PNode {
    pub fn build(n: &CheckedNode) -> Arc<PNode> {
        Arc::new(PNode {
            rule: n.rule,
            args: n.args.clone(),
            goal: n.seq.goal.clone(),
            aux: n.aux.clone(),
            path: n.path.clone(),
            children: n.children.iter().map(PNode::build).collect(),
        })
    }

    fn child(&self, i: usize) -> Arc<PNode> {
        self.children[i].clone()
    }

    fn name(&self, i: usize) -> String {
        match &self.args[i] {
            Arg::Name(n) => n.clone(),
            _ => unreachable!("checked signature"),
        }
    }

    fn term(&self, i: usize) -> Term {
        match &self.args[i] {
            Arg::Term(t) => t.clone(),
            _ => unreachable!("checked signature"),
        }
    }
}

/// Runtime parameters shared by all closures of one extraction.
#[derive(Clone, Debug)]
pub(crate) struct Rz {
    pub eps: Arc<BigRational>,
    pub k: u32,
}

fn modal(f: &Formula) -> Option<(&Game, &Formula, bool)> {
    match f {
        Formula::Diamond(g, p) => Some((g, p, true)),
        Formula::Box(g, p) => Some((g, p, false)),
        _ => None,
    }
}

/// Forces `ev` and pushes pending continuations past the head of `f`.
pub(crate) fn view(ev: Ev, f: &Formula, s: &State, rz: &Rz) -> EvResult {
    match modal(f) {
        Some((g, _, dia)) => force(push(ev, g, dia, s, rz.k)?),
        None => force(ev),
    }
}

fn first(ev: Ev) -> EvResult {
    match ev {
        Ev::Pair(a, _) => Ok((*a).clone()),
        other => Err(mismatch("pair", &other)),
    }
}

fn second(ev: Ev) -> EvResult {
    match ev {
        Ev::Pair(_, b) => Ok((*b).clone()),
        other => Err(mismatch("pair", &other)),
    }
}

fn with(env: &[Ev], e: Ev) -> Vec<Ev> {
    let mut v = env.to_vec();
    v.push(e);
    v
}

/// Follows a chain of assignments `(x:=f)...φ`, returning the evidence for
/// `φ`, the state after the chain and `φ` itself.
fn through_assigns(mut ev: Ev, f: &Formula, s: &State, rz: &Rz) -> Result<(Ev, State, Formula), EngineError> {
    let (mut f, mut s) = (f.clone(), s.clone());
    while let Some((Game::Assign(x, t), p, dia)) = modal(&f) {
        ev = push(ev, &assign(x, t.clone()), dia, &s, rz.k)?;
        s = s.set(x, to_creal(t, &s)?);
        f = p.clone();
    }
    Ok((ev, s, f))
}

fn unsupported(n: &PNode, why: &str) -> EngineError {
    EngineError::ExtractionUnsupported(format!("{} at {}: {why}", n.rule.symbol(), n.path))
}

pub(crate) fn realize(n: &Arc<PNode>, s: State, env: Vec<Ev>, rz: &Rz) -> EvResult {
    let goal = n.goal.clone();
    let c = |i: usize| n.child(i);
    let (n2, rz2) = (n.clone(), rz.clone());
    match n.rule {
        Rule::Hyp => {
            let Arg::Index(i) = n.args[0] else { unreachable!() };
            Ok(env[i].clone())
        }
        Rule::Arith => Ok(fo_evidence(goal, s, rz.eps.clone())),
        Rule::DiaTestI | Rule::BoxChoiceI => {
            Ok(Ev::pair(realize(&c(0), s.clone(), env.clone(), rz)?, realize(&c(1), s, env, rz)?))
        }
        Rule::DiaTestE1 | Rule::DiaTestE2 | Rule::BoxChoiceE1 | Rule::BoxChoiceE2 => {
            let take_first = matches!(n.rule, Rule::DiaTestE1 | Rule::BoxChoiceE1);
            Ok(Ev::lazy(move || {
                let e = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
                if take_first {
                    first(e)
                } else {
                    second(e)
                }
            }))
        }
        Rule::BoxTestI => Ok(Ev::fun(move |i| realize(&n2.child(0), s.clone(), with(&env, i.ev()?), &rz2))),
        Rule::BoxTestE => Ok(Ev::lazy(move || {
            let f = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
            let a = realize(&n2.child(1), s.clone(), env.clone(), &rz2)?;
            apply(f, Input::Ev(a))
        })),
        Rule::DiaChoiceI1 => Ok(Ev::Inj(Branch::Left, Arc::new(realize(&c(0), s, env, rz)?))),
        Rule::DiaChoiceI2 => Ok(Ev::Inj(Branch::Right, Arc::new(realize(&c(0), s, env, rz)?))),
        Rule::DiaChoiceE => Ok(Ev::lazy(move || {
            let e = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
            match e {
                Ev::Inj(Branch::Left, e) => realize(&n2.child(1), s.clone(), with(&env, (*e).clone()), &rz2),
                Ev::Inj(Branch::Right, e) => realize(&n2.child(2), s.clone(), with(&env, (*e).clone()), &rz2),
                other => Err(mismatch("injection", &other)),
            }
        })),
        Rule::BoxRandomI => {
            let Some((Game::AssignAny(x), _, _)) = modal(&goal) else { unreachable!("checked") };
            let (x, y) = (x.clone(), n.name(0));
            Ok(Ev::fun(move |i| {
                let s2 = s.set(&y, s.get(&x)).set(&x, i.val()?);
                realize(&n2.child(0), s2, env.clone(), &rz2)
            }))
        }
        Rule::BoxRandomE => {
            let f = n.term(1);
            Ok(Ev::lazy(move || {
                let fe = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
                let v = to_creal(&f, &s)?;
                apply(fe, Input::Val(v))
            }))
        }
        Rule::DiaRandomI => {
            let v = to_creal(&n.term(0), &s)?;
            Ok(Ev::Witness(v, Arc::new(realize(&c(0), s, env, rz)?)))
        }
        Rule::DiaRandomE => {
            let Some((Game::AssignAny(x), phi, _)) = modal(&n.children[0].goal) else { unreachable!("checked") };
            let (x, phi) = (x.clone(), phi.clone());
            Ok(Ev::lazy(move || {
                let w = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
                let Ev::Witness(v, e) = w else { return Err(mismatch("witness", &w)) };
                let all = view(realize(&n2.child(1), s.clone(), env.clone(), &rz2)?, &n2.children[1].goal, &s, &rz2)?;
                let s2 = s.set(&x, v.clone());
                let imp = apply(all, Input::Val(v))?;
                let imp = view(imp, &imply(phi.clone(), n2.goal.clone()), &s2, &rz2)?;
                apply(imp, Input::Ev((*e).clone()))
            }))
        }
        Rule::SeqI | Rule::DualI => realize(&c(0), s, env, rz),
        Rule::AsgnI => {
            let Some((Game::Assign(x, f), _, _)) = modal(&goal) else { unreachable!("checked") };
            let (x, f, y) = (x.clone(), f.clone(), n.name(0));
            Ok(Ev::lazy(move || {
                let v = to_creal(&f, &s)?;
                let s2 = s.set(&y, s.get(&x)).set(&x, v);
                realize(&n2.child(0), s2, with(&env, Ev::Unit), &rz2)
            }))
        }
        Rule::Mon => {
            let Some((g, _, _)) = modal(&goal) else { unreachable!("checked") };
            let g = g.clone();
            let Aux::Renaming(ren) = n.aux.clone() else { unreachable!("mon records its renaming") };
            let e1 = realize(&c(0), s.clone(), env.clone(), rz)?;
            Ok(Ev::mapped(e1, move |post, ephi| {
                let mut s2 = s.clone();
                for (b, fresh) in &ren {
                    s2 = s2.set(fresh, s.get(b)).set(&primed(fresh), s.get(&primed(b)));
                }
                realize(&n2.child(1), merge(&s2, post, &g), with(&env, ephi), &rz2)
            }))
        }
        Rule::Gv => {
            let p = realize(&c(0), s.clone(), env.clone(), rz)?;
            let q = realize(&c(1), s, env, rz)?;
            Ok(Ev::mapped(q, move |_, _| Ok(p.clone())))
        }
        Rule::DiaLoopE => Ok(Ev::lazy(move || {
            let e = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
            match e {
                Ev::Stop(e) => realize(&n2.child(1), s.clone(), with(&env, (*e).clone()), &rz2),
                Ev::Go(e) => realize(&n2.child(2), s.clone(), with(&env, (*e).clone()), &rz2),
                other => Err(mismatch("stop/go", &other)),
            }
        })),
        Rule::DiaLoopS => Ok(Ev::Stop(Arc::new(realize(&c(0), s, env, rz)?))),
        Rule::DiaLoopG => Ok(Ev::Go(Arc::new(realize(&c(0), s, env, rz)?))),
        Rule::BoxLoopE => Ok(Ev::lazy(move || {
            match view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)? {
                Ev::Loop { now, step } => Ok(Ev::Pair(now, step)),
                other => Err(mismatch("loop", &other)),
            }
        })),
        Rule::BoxLoopR => Ok(Ev::lazy(move || {
            match view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)? {
                Ev::Pair(now, step) => Ok(Ev::Loop { now, step }),
                other => Err(mismatch("pair", &other)),
            }
        })),
        Rule::Loop => {
            let ej = realize(&c(0), s.clone(), env, rz)?;
            Ok(invariant_loop(n.clone(), ej, s, rz.clone()))
        }
        Rule::Fp => {
            let e = realize(&c(0), s.clone(), env, rz)?;
            Ok(fixpoint(n.clone(), e, s, rz.clone()))
        }
        Rule::DiaLoopI => {
            let e_inv = realize(&c(0), s.clone(), env, rz)?;
            Ok(converge(n.clone(), e_inv, s, rz.clone()))
        }
        Rule::Di | Rule::Dw => {
            let Some((g, phi, _)) = modal(&goal) else { unreachable!("checked") };
            let (g, phi) = (g.clone(), phi.clone());
            let eps = rz.eps.clone();
            Ok(Ev::fun(move |i| {
                let fl = i.flow()?;
                Ok(fo_evidence(phi.clone(), merge(&s, &fl.end, &g), eps.clone()))
            }))
        }
        Rule::Dc => Ok(Ev::fun(move |i| {
            let e = view(realize(&n2.child(1), s.clone(), env.clone(), &rz2)?, &n2.children[1].goal, &s, &rz2)?;
            apply(e, i)
        })),
        Rule::Dg => {
            let y = n.name(0);
            Ok(Ev::fun(move |i| {
                let fl = i.flow()?;
                let w = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &n2.children[0].goal, &s, &rz2)?;
                let Ev::Witness(y0, e) = w else { return Err(mismatch("witness", &w)) };
                let Some((_, inner, _)) = modal(&n2.children[0].goal) else { unreachable!() };
                let Some((ghost, _, _)) = modal(inner) else { unreachable!() };
                let sys = OdeSystem::from_game(ghost).expect("ghost ODE");
                let s_y = s.set(&y, y0);
                let aug = ghost_flow(&sys, &fl, &s_y, &y, &rz2).map_err(|m| unsupported(&n2, &m))?;
                let e = view((*e).clone(), inner, &s_y, &rz2)?;
                apply(e, Input::Flow(Arc::new(aug)))
            }))
        }
        Rule::Dv => Ok(Ev::lazy(move || {
            let Some((g, _, _)) = modal(&n2.goal) else { unreachable!("checked") };
            let sys = OdeSystem::from_game(g).expect("ODE goal");
            let t = n2.name(4);
            let p1 = n2.children[0].goal.clone();
            let e = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &p1, &s, &rz2)?;
            let Some((Game::Seq(start, timed), post, _)) = modal(&p1) else { unreachable!("DV premise shape") };
            let after_start = diamond((**start).clone(), diamond((**timed).clone(), post.clone()));
            let (e, s0, rest) = through_assigns(e, &after_start, &s, &rz2)?;
            let e = view(e, &rest, &s0, &rz2)?;
            let Ev::Ode { dur, sol, .. } = e else { return Err(mismatch("ODE plan", &e)) };
            let clocked = OdeSystem::from_game(timed).expect("clocked ODE");
            let end = ode_end(&clocked, &s0, &dur, &sol, rz2.k)?;
            let sol = drop_var(sol, &t);
            let eps = rz2.eps.clone();
            let dom = fo_evidence(sys.domain.clone(), end.clone(), eps.clone());
            let (h, gt) = (n2.term(2), n2.term(3));
            let hg = fo_evidence(cmp(h, Rel::Ge, gt), end.clone(), eps);
            let post = realize(&n2.child(2), end, vec![dom, hg], &rz2)?;
            Ok(Ev::Ode { dur, sol, post: Arc::new(post) })
        })),
        Rule::Bsolve => {
            let Aux::Solve(_) = &n.aux else { unreachable!("bsolve records its solution") };
            let t = n.name(0);
            Ok(Ev::fun(move |i| {
                let fl = i.flow()?;
                let p = n2.children[0].goal.clone();
                let e = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &p, &s, &rz2)?;
                let s1 = s.set(&t, fl.dur.clone());
                let e = apply(e, Input::Val(fl.dur.clone()))?;
                // ∀t (t≥0 → (dom → end))
                let Some((_, body, _)) = modal(&p) else { unreachable!() };
                let (nonneg, rest) = body.as_imply().expect("bsolve premise shape");
                let e = apply(view(e, body, &s1, &rz2)?, Input::Ev(fo_evidence(nonneg.clone(), s1.clone(), rz2.eps.clone())))?;
                let (dom, end) = rest.as_imply().expect("bsolve premise shape");
                let e = apply(
                    view(e, rest, &s1, &rz2)?,
                    Input::Ev(fo_evidence(dom.clone(), s1.clone(), rz2.eps.clone())),
                )?;
                let (e, _, _) = through_assigns(e, end, &s1, &rz2)?;
                Ok(e)
            }))
        }
        Rule::Dsolve => {
            let Aux::Solve(aux) = n.aux.clone() else { unreachable!("dsolve records its solution") };
            Ok(Ev::lazy(move || {
                let p = n2.children[0].goal.clone();
                let w = view(realize(&n2.child(0), s.clone(), env.clone(), &rz2)?, &p, &s, &rz2)?;
                let Ev::Witness(dur, e) = w else { return Err(mismatch("witness", &w)) };
                let s1 = s.set(&aux.sol.time, dur.clone());
                let Some((_, body, _)) = modal(&p) else { unreachable!() };
                let e = second(view((*e).clone(), body, &s1, &rz2)?)?;
                let (_, rest) = body.as_and().expect("dsolve premise shape");
                let e = second(view(e, rest, &s1, &rz2)?)?;
                let (_, end) = rest.as_and().expect("dsolve premise shape");
                let (post, _, _) = through_assigns(e, end, &s1, &rz2)?;
                Ok(Ev::Ode { dur, sol: Solution::Symbolic(aux.sol.clone()), post: Arc::new(post) })
            }))
        }
    }
}

fn invariant_loop(n: Arc<PNode>, ej: Ev, s: State, rz: Rz) -> Ev {
    Ev::lazy(move || {
        let Some((Game::Repeat(body), _, _)) = modal(&n.goal) else { unreachable!("checked") };
        let body = (**body).clone();
        let now = realize(&n.child(2), s.clone(), vec![ej.clone()], &rz)?;
        let step = realize(&n.child(1), s.clone(), vec![ej.clone()], &rz)?;
        let (n2, s2, rz2) = (n.clone(), s.clone(), rz.clone());
        let step = Ev::mapped(step, move |post, ej2| Ok(invariant_loop(n2.clone(), ej2, merge(&s2, post, &body), rz2.clone())));
        Ok(Ev::Loop { now: Arc::new(now), step: Arc::new(step) })
    })
}

fn fixpoint(n: Arc<PNode>, e: Ev, s: State, rz: Rz) -> Ev {
    Ev::lazy(move || {
        let p = n.children[0].goal.clone();
        let Some((Game::Repeat(body), _, _)) = modal(&p) else { unreachable!("checked") };
        let body = (**body).clone();
        match view(e.clone(), &p, &s, &rz)? {
            Ev::Stop(ephi) => realize(&n.child(1), s.clone(), vec![(*ephi).clone()], &rz),
            Ev::Go(e2) => {
                let (n2, s2, rz2) = (n.clone(), s.clone(), rz.clone());
                let m = Ev::Mapped(
                    e2,
                    Arc::new(move |post: &State, e3: Ev| Ok(fixpoint(n2.clone(), e3, merge(&s2, post, &body), rz2.clone()))),
                );
                realize(&n.child(2), s.clone(), vec![m], &rz)
            }
            other => Err(mismatch("stop/go", &other)),
        }
    })
}

/// Angel stops once the metric is within ε of zero, otherwise plays one
/// more round of the descent proof.
fn converge(n: Arc<PNode>, e_inv: Ev, s: State, rz: Rz) -> Ev {
    Ev::lazy(move || {
        let Aux::Metric(m) = &n.aux else { unreachable!("⟨*⟩I records its metric") };
        let Some((Game::Repeat(body), _, _)) = modal(&n.goal) else { unreachable!("checked") };
        let body = (**body).clone();
        if holds_relaxed(&m.at_zero(), &s, &rz.eps)? {
            let z = fo_evidence(m.at_zero(), s.clone(), rz.eps.clone());
            return Ok(Ev::Stop(Arc::new(realize(&n.child(2), s.clone(), vec![e_inv.clone(), z], &rz)?)));
        }
        let mut s0 = s.clone();
        for (ghost, t) in m.m0.iter().zip(&m.m) {
            s0 = s0.set(ghost, to_creal(t, &s)?);
        }
        let pos = fo_evidence(and(m.positive(), m.remember()), s0.clone(), rz.eps.clone());
        let step = realize(&n.child(1), s0.clone(), vec![e_inv.clone(), pos], &rz)?;
        let Some((_, post_goal, _)) = modal(&n.children[1].goal) else { unreachable!("checked") };
        let post_goal = post_goal.clone();
        let (n2, rz2) = (n.clone(), rz.clone());
        Ok(Ev::Go(Arc::new(Ev::mapped(step, move |post, e| {
            let s1 = merge(&s0, post, &body);
            let inv = first(view(e, &post_goal, &s1, &rz2)?)?;
            Ok(converge(n2.clone(), inv, s1, rz2.clone()))
        }))))
    })
}

fn drop_var(sol: Solution, t: &str) -> Solution {
    match sol {
        Solution::Symbolic(mut sym) => {
            sym.sol.retain(|(x, _)| x != t);
            sym.polys.remove(t);
            Solution::Symbolic(sym)
        }
        other => other,
    }
}

/// Extends a flow with the ghost `y` by integrating the augmented system.
fn ghost_flow(sys: &OdeSystem, fl: &Flow, start: &State, y: &str, rz: &Rz) -> Result<Flow, String> {
    let d = fl.dur.refine(rz.k + 8).map_err(|e| e.to_string())?.mid();
    let s0 = fl.start.set(y, start.get(y));
    let samp = picard_solve(sys, &s0, &d, rz.k.min(30)).map_err(|e| e.to_string())?;
    let y_end = samp.sample_var(y, &d).ok_or("ghost missing from the enclosure")?.mid();
    let with_y = fl.end.set(y, CReal::from_rational(y_end));
    let rhs = sys.rhs(y).ok_or("ghost has no equation")?;
    let yp = to_creal(rhs, &with_y).map_err(|e| e.to_string())?;
    let end = with_y.set(&primed(y), yp);
    Ok(Flow { sys: sys.clone(), dur: fl.dur.clone(), sol: Solution::Sampled(samp), start: s0, end })
}
