//! Premise computation for every rule.

use std::collections::BTreeSet;

use super::arith::{eval3, is_first_order, Tri};
use super::metric::Metric;
use super::{check_args, Arg, ProofTerm, Rule, RuleError, RuleInstance, Sequent};
use crate::creal::State;
use crate::ode::{differential, solve_nilpotent, OdeSystem, SymbolicSolution};
use crate::statics::*;
use crate::syntax::*;

/// Data computed while applying a rule, kept for strategy extraction.
#[derive(Clone, Debug, Default)]
pub enum Aux {
    #[default]
    None,
    /// Base names of bound variables and the fresh names they were moved to.
    Renaming(Vec<(String, String)>),
    Metric(Metric),
    Solve(SolveAux),
}

/// Closed-form solution used by bsolve and dsolve.
#[derive(Clone, Debug)]
pub struct SolveAux {
    pub sys: OdeSystem,
    pub sol: SymbolicSolution,
    /// Assignment order of the solution; no term reads a variable that was
    /// already overwritten.
    pub order: Vec<String>,
}

/// Premises of `rule` applied backwards to `seq`.
pub fn apply_rule(seq: &Sequent, inst: &RuleInstance) -> Result<Vec<Sequent>, RuleError> {
    let seq = Sequent::new(seq.ctx.clone(), seq.goal.clone());
    apply(&seq, inst).map(|(p, _)| p)
}

type Applied = (Vec<Sequent>, Aux);

fn only(ps: Vec<Sequent>) -> Result<Applied, RuleError> {
    Ok((ps, Aux::None))
}

enum Modal<'a> {
    Dia(&'a Game, &'a Formula),
    Box(&'a Game, &'a Formula),
}

impl Modal<'_> {
    fn of(f: &Formula) -> Option<Modal<'_>> {
        match f {
            Formula::Diamond(g, p) => Some(Modal::Dia(g, p)),
            Formula::Box(g, p) => Some(Modal::Box(g, p)),
            _ => None,
        }
    }

    fn parts(&self) -> (&Game, &Formula) {
        match self {
            Modal::Dia(g, p) | Modal::Box(g, p) => (g, p),
        }
    }

    fn is_dia(&self) -> bool {
        matches!(self, Modal::Dia(..))
    }

    fn rebuild(&self, g: Game, p: Formula) -> Formula {
        if self.is_dia() {
            diamond(g, p)
        } else {
            boxf(g, p)
        }
    }
}

fn modal_of(f: &Formula, diamond_wanted: bool) -> Option<(&Game, &Formula)> {
    match (f, diamond_wanted) {
        (Formula::Diamond(g, p), true) | (Formula::Box(g, p), false) => Some((g, p)),
        _ => None,
    }
}

fn sequent_vars(seq: &Sequent) -> VarSet {
    let mut s = seq.goal.all_vars();
    for c in &seq.ctx {
        s.extend(c.all_vars());
    }
    s
}

fn ensure_fresh(rule: Rule, y: &str, avoid: &VarSet) -> Result<(), RuleError> {
    if y.is_empty() || is_primed(y) || !y.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(RuleError::new(rule, format!("`{y}` is not a plain variable name")));
    }
    if !is_fresh(y, avoid) {
        return Err(RuleError::new(rule, format!("`{y}` is not fresh")));
    }
    Ok(())
}

fn ode_parts(rule: Rule, f: &Formula, want_dia: bool) -> Result<(OdeSystem, &Formula), RuleError> {
    let shape = if want_dia { "⟨x'=f&ψ⟩φ" } else { "[x'=f&ψ]φ" };
    let (g, p) = modal_of(f, want_dia).ok_or_else(|| RuleError::new(rule, format!("goal is not of the form {shape}")))?;
    let sys = OdeSystem::from_game(g).ok_or_else(|| RuleError::new(rule, format!("goal is not of the form {shape}")))?;
    sys.validate().map_err(|e| RuleError::new(rule, e.to_string()))?;
    Ok((sys, p))
}

fn arg_name(args: &[Arg], i: usize) -> &str {
    match &args[i] {
        Arg::Name(n) => n,
        _ => unreachable!("signature checked"),
    }
}

fn arg_term(args: &[Arg], i: usize) -> &Term {
    match &args[i] {
        Arg::Term(t) => t,
        _ => unreachable!("signature checked"),
    }
}

fn arg_formula(args: &[Arg], i: usize) -> Formula {
    match &args[i] {
        Arg::Formula(f) => desugar(f),
        _ => unreachable!("signature checked"),
    }
}

/// Differential formula `(φ)'` for comparisons, conjunctions and
/// disjunctions. `≤` and `<` are mirrored to `≥`.
pub(crate) fn diff_formula(f: &Formula) -> Result<Formula, String> {
    if let Some((a, b)) = f.as_or().or_else(|| f.as_and()) {
        return Ok(and(diff_formula(a)?, diff_formula(b)?));
    }
    match f {
        Formula::Cmp(a, r, b) => {
            for t in [a, b] {
                differential(t).map_err(|e| e.to_string())?;
            }
            let (da, db) = (Term::Differential(Box::new(a.clone())), Term::Differential(Box::new(b.clone())));
            Ok(match r {
                Rel::Ge | Rel::Gt => cmp(da, Rel::Ge, db),
                Rel::Le | Rel::Lt => cmp(db, Rel::Ge, da),
                Rel::Eq => cmp(da, Rel::Eq, db),
                Rel::Ne => return Err("no differential formula for ≠".into()),
            })
        }
        _ => Err(format!("no differential formula for {f}")),
    }
}

/// `[y1':=0]...[yk':=0]p` for the non-ODE variables of `vars`: outside the
/// system every variable is constant along the flow.
fn zero_constants(vars: &VarSet, sys: &OdeSystem, p: Formula, diamond_form: bool) -> Formula {
    let odes = sys.var_set();
    vars.iter().rev().filter(|v| !is_primed(v) && !odes.contains(*v)).fold(p, |acc, c| {
        let g = assign(&primed(c), lit_int(0));
        if diamond_form {
            diamond(g, acc)
        } else {
            boxf(g, acc)
        }
    })
}

fn chain(assigns: &[(String, Term)], p: Formula, dia: bool) -> Formula {
    assigns.iter().rev().fold(p, |acc, (x, t)| {
        let g = assign(x, t.clone());
        if dia {
            diamond(g, acc)
        } else {
            boxf(g, acc)
        }
    })
}

/// Orders the solution so that `x_j := s_j` runs before any `x_i` that
/// `s_j` reads is overwritten.
pub(crate) fn assignment_order(sol: &SymbolicSolution, sys: &OdeSystem) -> Result<Vec<String>, String> {
    let vars = sys.vars();
    let reads: Vec<BTreeSet<String>> = vars
        .iter()
        .map(|x| {
            let t = sol.get(x).cloned().unwrap_or_else(|| var(x));
            term_vars(&t).into_iter().filter(|v| v != x && vars.contains(v)).collect()
        })
        .collect();
    let mut done: Vec<String> = Vec::new();
    let mut left: Vec<usize> = (0..vars.len()).collect();
    while !left.is_empty() {
        // x_i may go once every variable that still needs to read it is done.
        let ready = left.iter().position(|&i| {
            left.iter().all(|&j| j == i || !reads[j].contains(&vars[i]))
        });
        match ready {
            Some(p) => done.push(vars[left.remove(p)].clone()),
            None => {
                let cyc: Vec<_> = left.iter().map(|&i| vars[i].clone()).collect();
                return Err(format!("solution assignments are cyclic over {{{}}}", cyc.join(", ")));
            }
        }
    }
    Ok(done)
}

pub(crate) fn apply(seq: &Sequent, inst: &RuleInstance) -> Result<Applied, RuleError> {
    let rule = inst.rule;
    check_args(&ProofTerm::new(rule, inst.args.clone(), vec![]))?;
    let args = &inst.args;
    let goal = &seq.goal;
    let e = |msg: &str| RuleError::new(rule, msg.to_string());
    let shape = |want: &str| RuleError::new(rule, format!("goal {goal} is not of the form {want}"));
    match rule {
        Rule::BoxChoiceI => match goal {
            Formula::Box(g, p) => match &**g {
                Game::Choice(a, b) => only(vec![
                    seq.same_ctx(boxf((**a).clone(), (**p).clone())),
                    seq.same_ctx(boxf((**b).clone(), (**p).clone())),
                ]),
                _ => Err(shape("[α∪β]φ")),
            },
            _ => Err(shape("[α∪β]φ")),
        },
        Rule::BoxChoiceE1 | Rule::BoxChoiceE2 => {
            let (a, p) = modal_of(goal, false).ok_or_else(|| shape("[α]φ"))?;
            let other = match &args[0] {
                Arg::Game(g) => desugar_game(g),
                _ => unreachable!(),
            };
            let g = if rule == Rule::BoxChoiceE1 { choice(a.clone(), other) } else { choice(other, a.clone()) };
            only(vec![seq.same_ctx(boxf(g, p.clone()))])
        }
        Rule::DiaChoiceI1 | Rule::DiaChoiceI2 => match goal {
            Formula::Diamond(g, p) => match &**g {
                Game::Choice(a, b) => {
                    let side = if rule == Rule::DiaChoiceI1 { a } else { b };
                    only(vec![seq.same_ctx(diamond((**side).clone(), (**p).clone()))])
                }
                _ => Err(shape("⟨α∪β⟩φ")),
            },
            _ => Err(shape("⟨α∪β⟩φ")),
        },
        Rule::DiaChoiceE => {
            let pay = arg_formula(args, 0);
            let Formula::Diamond(g, p) = &pay else { return Err(e("payload is not of the form ⟨α∪β⟩φ")) };
            let Game::Choice(a, b) = &**g else { return Err(e("payload is not of the form ⟨α∪β⟩φ")) };
            only(vec![
                seq.same_ctx(pay.clone()),
                seq.with(diamond((**a).clone(), (**p).clone()), goal.clone()),
                seq.with(diamond((**b).clone(), (**p).clone()), goal.clone()),
            ])
        }
        Rule::DiaTestI => {
            let (phi, psi) = goal.as_and().ok_or_else(|| shape("⟨?φ⟩ψ"))?;
            only(vec![seq.same_ctx(phi.clone()), seq.same_ctx(psi.clone())])
        }
        Rule::DiaTestE1 => only(vec![seq.same_ctx(and(goal.clone(), arg_formula(args, 0)))]),
        Rule::DiaTestE2 => only(vec![seq.same_ctx(and(arg_formula(args, 0), goal.clone()))]),
        Rule::BoxTestI => {
            let (phi, psi) = goal.as_imply().ok_or_else(|| shape("[?φ]ψ"))?;
            only(vec![seq.with(phi.clone(), psi.clone())])
        }
        Rule::BoxTestE => {
            let phi = arg_formula(args, 0);
            only(vec![seq.same_ctx(imply(phi.clone(), goal.clone())), seq.same_ctx(phi)])
        }
        Rule::Hyp => {
            let Arg::Index(i) = args[0] else { unreachable!() };
            match seq.ctx.get(i) {
                Some(h) if h == goal => only(vec![]),
                Some(h) => Err(e(&format!("hypothesis {i} is {h}, not the goal"))),
                None => Err(e(&format!("no hypothesis {i} (context has {})", seq.ctx.len()))),
            }
        }
        Rule::BoxRandomI => {
            let (g, p) = modal_of(goal, false).ok_or_else(|| shape("[x:=*]φ"))?;
            let Game::AssignAny(x) = g else { return Err(shape("[x:=*]φ")) };
            let y = arg_name(args, 0);
            ensure_fresh(rule, y, &sequent_vars(seq))?;
            let ctx = seq.ctx.iter().map(|c| rename_exact(c, x, y)).collect();
            only(vec![Sequent { ctx, goal: p.clone() }])
        }
        Rule::BoxRandomE => {
            let pay = arg_formula(args, 0);
            let f = arg_term(args, 1);
            let (g, p) = modal_of(&pay, false).ok_or_else(|| e("payload is not of the form [x:=*]φ"))?;
            let Game::AssignAny(x) = g else { return Err(e("payload is not of the form [x:=*]φ")) };
            let inst = substitute(p, x, f).map_err(|a| e(&a.to_string()))?;
            if &inst != goal {
                return Err(e(&format!("instance {inst} does not match the goal")));
            }
            only(vec![seq.same_ctx(pay.clone())])
        }
        Rule::DiaRandomI => {
            let (g, p) = modal_of(goal, true).ok_or_else(|| shape("⟨x:=*⟩φ"))?;
            let Game::AssignAny(x) = g else { return Err(shape("⟨x:=*⟩φ")) };
            let f = arg_term(args, 0);
            substitute(p, x, f).map_err(|a| e(&a.to_string()))?;
            only(vec![seq.same_ctx(diamond(assign(x, f.clone()), p.clone()))])
        }
        Rule::DiaRandomE => {
            let pay = arg_formula(args, 0);
            let (g, p) = modal_of(&pay, true).ok_or_else(|| e("payload is not of the form ⟨x:=*⟩φ"))?;
            let Game::AssignAny(x) = g else { return Err(e("payload is not of the form ⟨x:=*⟩φ")) };
            if free_vars_formula(goal).contains(x) {
                return Err(e(&format!("{x} is free in the goal")));
            }
            only(vec![seq.same_ctx(pay.clone()), seq.same_ctx(forall(x, imply(p.clone(), goal.clone())))])
        }
        Rule::SeqI => {
            let m = Modal::of(goal).ok_or_else(|| shape("⟨α;β⟩φ or [α;β]φ"))?;
            let (g, p) = m.parts();
            let Game::Seq(a, b) = g else { return Err(shape("⟨α;β⟩φ or [α;β]φ")) };
            let inner = m.rebuild((**b).clone(), p.clone());
            only(vec![seq.same_ctx(m.rebuild((**a).clone(), inner))])
        }
        Rule::AsgnI => {
            let m = Modal::of(goal).ok_or_else(|| shape("⟨x:=f⟩φ or [x:=f]φ"))?;
            let (g, p) = m.parts();
            let Game::Assign(x, f) = g else { return Err(shape("⟨x:=f⟩φ or [x:=f]φ")) };
            let y = arg_name(args, 0);
            ensure_fresh(rule, y, &sequent_vars(seq))?;
            let mut ctx: Vec<Formula> = seq.ctx.iter().map(|c| rename_exact(c, x, y)).collect();
            ctx.push(cmp(var(x), Rel::Eq, rename_term_exact(f, x, y)));
            only(vec![Sequent { ctx, goal: p.clone() }])
        }
        Rule::Mon => {
            let m = Modal::of(goal).ok_or_else(|| shape("⟨α⟩ψ or [α]ψ"))?;
            let (g, psi) = m.parts();
            let phi = arg_formula(args, 0);
            let mut avoid = sequent_vars(seq);
            avoid.extend(phi.all_vars());
            let bases: BTreeSet<String> = bound_vars(g).iter().map(|v| base_name(v).to_string()).collect();
            let mut ren = Vec::new();
            for b in bases {
                let n = fresh_name(&b, &avoid);
                avoid.insert(n.clone());
                avoid.insert(primed(&n));
                ren.push((b, n));
            }
            let mut ctx: Vec<Formula> =
                seq.ctx.iter().map(|c| ren.iter().fold(c.clone(), |acc, (b, n)| acc.rename(b, n))).collect();
            ctx.push(phi.clone());
            Ok((
                vec![seq.same_ctx(m.rebuild(g.clone(), phi)), Sequent { ctx, goal: psi.clone() }],
                Aux::Renaming(ren),
            ))
        }
        Rule::DualI => {
            let m = Modal::of(goal).ok_or_else(|| shape("⟨α^d⟩φ or [α^d]φ"))?;
            let (g, p) = m.parts();
            let Game::Dual(a) = g else { return Err(shape("⟨α^d⟩φ or [α^d]φ")) };
            let prem = if m.is_dia() { boxf((**a).clone(), p.clone()) } else { diamond((**a).clone(), p.clone()) };
            only(vec![seq.same_ctx(prem)])
        }
        Rule::DiaLoopE | Rule::Fp => {
            let pay = arg_formula(args, 0);
            let (g, phi) = modal_of(&pay, true).ok_or_else(|| e("payload is not of the form ⟨α*⟩φ"))?;
            let Game::Repeat(a) = g else { return Err(e("payload is not of the form ⟨α*⟩φ")) };
            if rule == Rule::DiaLoopE {
                only(vec![
                    seq.same_ctx(pay.clone()),
                    seq.with(phi.clone(), goal.clone()),
                    seq.with(diamond((**a).clone(), pay.clone()), goal.clone()),
                ])
            } else {
                only(vec![
                    seq.same_ctx(pay.clone()),
                    Sequent { ctx: vec![phi.clone()], goal: goal.clone() },
                    Sequent { ctx: vec![diamond((**a).clone(), goal.clone())], goal: goal.clone() },
                ])
            }
        }
        Rule::BoxLoopE => {
            let (phi, rest) = goal.as_and().ok_or_else(|| shape("φ ∧ [α][α*]φ"))?;
            let (a, inner) = modal_of(rest, false).ok_or_else(|| shape("φ ∧ [α][α*]φ"))?;
            let (r, phi2) = modal_of(inner, false).ok_or_else(|| shape("φ ∧ [α][α*]φ"))?;
            match r {
                Game::Repeat(a2) if **a2 == *a && phi2 == phi => only(vec![seq.same_ctx(inner.clone())]),
                _ => Err(shape("φ ∧ [α][α*]φ")),
            }
        }
        Rule::DiaLoopS | Rule::DiaLoopG => {
            let (g, phi) = modal_of(goal, true).ok_or_else(|| shape("⟨α*⟩φ"))?;
            let Game::Repeat(a) = g else { return Err(shape("⟨α*⟩φ")) };
            let prem = if rule == Rule::DiaLoopS { phi.clone() } else { diamond((**a).clone(), goal.clone()) };
            only(vec![seq.same_ctx(prem)])
        }
        Rule::BoxLoopR | Rule::Loop => {
            let (g, phi) = modal_of(goal, false).ok_or_else(|| shape("[α*]φ"))?;
            let Game::Repeat(a) = g else { return Err(shape("[α*]φ")) };
            if rule == Rule::BoxLoopR {
                return only(vec![seq.same_ctx(and(phi.clone(), boxf((**a).clone(), goal.clone())))]);
            }
            let j = arg_formula(args, 0);
            only(vec![
                seq.same_ctx(j.clone()),
                Sequent { ctx: vec![j.clone()], goal: boxf((**a).clone(), j.clone()) },
                Sequent { ctx: vec![j], goal: phi.clone() },
            ])
        }
        Rule::DiaLoopI => {
            let (g, phi) = modal_of(goal, true).ok_or_else(|| shape("⟨α*⟩φ"))?;
            let Game::Repeat(a) = g else { return Err(shape("⟨α*⟩φ")) };
            let inv = arg_formula(args, 0);
            let (m, zero, delta) = (arg_term(args, 1), arg_term(args, 2), arg_term(args, 3));
            let base = arg_name(args, 4);
            if !term_vars(delta).is_empty() {
                return Err(e("margin δ must be a closed term"));
            }
            let pos = cmp(delta.clone(), Rel::Gt, lit_int(0));
            if eval3(&pos, &State::new(), 256) != Tri::True {
                return Err(e(&format!("margin δ = {delta} is not certified positive")));
            }
            let metric = Metric::new(m, zero, delta, base).map_err(|m| e(&m))?;
            let mut avoid = sequent_vars(seq);
            avoid.extend(inv.all_vars());
            for t in metric.m.iter().chain(&metric.zero) {
                avoid.extend(term_vars(t));
            }
            for n in &metric.m0 {
                ensure_fresh(rule, n, &avoid)?;
            }
            let prems = vec![
                seq.same_ctx(inv.clone()),
                Sequent {
                    ctx: vec![inv.clone(), and(metric.positive(), metric.remember())],
                    goal: diamond((**a).clone(), and(inv.clone(), metric.descended())),
                },
                Sequent { ctx: vec![inv, metric.at_zero()], goal: phi.clone() },
            ];
            Ok((prems, Aux::Metric(metric)))
        }
        Rule::Di => {
            let (sys, phi) = ode_parts(rule, goal, false)?;
            if free_vars_formula(phi).iter().any(|v| is_primed(v)) {
                return Err(e("postcondition mentions a primed variable"));
            }
            let dphi = diff_formula(phi).map_err(|m| e(&m))?;
            let primes: Vec<(String, Term)> = sys.eqs.iter().map(|(x, f)| (primed(x), f.clone())).collect();
            let body = chain(&primes, zero_constants(&free_vars_formula(phi), &sys, dphi, false), false);
            let q = sys.vars().iter().rev().fold(imply(sys.domain.clone(), body), |acc, x| forall(x, acc));
            only(vec![seq.same_ctx(phi.clone()), seq.same_ctx(q)])
        }
        Rule::Dc => {
            let (sys, phi) = ode_parts(rule, goal, false)?;
            let r = arg_formula(args, 0);
            let inner = OdeSystem::new(sys.eqs.clone(), and(sys.domain.clone(), r.clone()));
            only(vec![seq.same_ctx(boxf(sys.to_game(), r)), seq.same_ctx(boxf(inner.to_game(), phi.clone()))])
        }
        Rule::Dw => {
            let (sys, phi) = ode_parts(rule, goal, false)?;
            let mut keys: Vec<String> = sys.vars();
            keys.extend(sys.vars().iter().map(|x| primed(x)));
            let q = keys.iter().rev().fold(imply(sys.domain.clone(), phi.clone()), |acc, x| forall(x, acc));
            only(vec![seq.same_ctx(q)])
        }
        Rule::Dg => {
            let (sys, phi) = ode_parts(rule, goal, false)?;
            let y = arg_name(args, 0);
            ensure_fresh(rule, y, &sequent_vars(seq))?;
            let (a, b) = (arg_term(args, 1), arg_term(args, 2));
            for t in [a, b] {
                let vs = term_vars(t);
                if vs.contains(y) || vs.contains(&primed(y)) {
                    return Err(e(&format!("ghost coefficient {t} mentions {y}")));
                }
                if vs.iter().any(|v| is_primed(v)) || contains_differential(t) {
                    return Err(e(&format!("ghost coefficient {t} mentions a differential")));
                }
            }
            let mut eqs = sys.eqs.clone();
            eqs.push((y.to_string(), plus(times(a.clone(), var(y)), b.clone())));
            let ghost = OdeSystem::new(eqs, sys.domain.clone());
            only(vec![seq.same_ctx(exists(y, boxf(ghost.to_game(), phi.clone())))])
        }
        Rule::Dv => {
            let (sys, phi) = ode_parts(rule, goal, true)?;
            let (d, eps, h, g) = (arg_term(args, 0), arg_term(args, 1), arg_term(args, 2), arg_term(args, 3));
            let t = arg_name(args, 4);
            let mut avoid = sequent_vars(seq);
            for x in [d, eps, h, g] {
                avoid.extend(term_vars(x));
            }
            ensure_fresh(rule, t, &avoid)?;
            let mut banned: BTreeSet<String> = sys.vars().into_iter().flat_map(|x| [primed(&x), x]).collect();
            banned.insert(t.to_string());
            banned.insert(primed(t));
            for x in [d, eps] {
                if let Some(v) = term_vars(x).intersection(&banned).next() {
                    return Err(e(&format!("{v} is free in {x}")));
                }
            }
            for x in [h, g] {
                if term_vars(x).iter().any(|v| is_primed(v)) || contains_differential(x) {
                    return Err(e(&format!("{x} mentions a differential")));
                }
            }
            let mut clock = vec![(t.to_string(), lit_int(1))];
            clock.extend(sys.eqs.clone());
            let timed = Game::Ode(clock, Box::new(sys.domain.clone()));
            let p1 = diamond(seq_game(assign(t, lit_int(0)), timed), cmp(var(t), Rel::Ge, d.clone()));
            let rate = cmp(
                minus(Term::Differential(Box::new(h.clone())), Term::Differential(Box::new(g.clone()))),
                Rel::Ge,
                eps.clone(),
            );
            let mut hg = term_vars(h);
            hg.extend(term_vars(g));
            let free = OdeSystem::new(sys.eqs.clone(), tt());
            let p2 = boxf(free.to_game(), zero_constants(&hg, &sys, rate, false));
            let p3 = Sequent { ctx: vec![sys.domain.clone(), cmp(h.clone(), Rel::Ge, g.clone())], goal: phi.clone() };
            let p4 = and(
                cmp(d.clone(), Rel::Gt, lit_int(0)),
                and(
                    cmp(eps.clone(), Rel::Gt, lit_int(0)),
                    cmp(minus(h.clone(), g.clone()), Rel::Ge, neg(times(d.clone(), eps.clone()))),
                ),
            );
            only(vec![seq.same_ctx(p1), seq.same_ctx(p2), p3, seq.same_ctx(p4)])
        }
        Rule::Bsolve | Rule::Dsolve => {
            let dia = rule == Rule::Dsolve;
            let (sys, phi) = ode_parts(rule, goal, dia)?;
            let (t, r) = (arg_name(args, 0), arg_name(args, 1));
            let avoid = sequent_vars(seq);
            ensure_fresh(rule, t, &avoid)?;
            ensure_fresh(rule, r, &avoid)?;
            if base_name(t) == base_name(r) {
                return Err(e("time and range names must differ"));
            }
            let fv = free_vars_formula(phi);
            if let Some(x) = sys.vars().iter().find(|x| fv.contains(&primed(x))) {
                return Err(e(&format!("{x}' is free in the postcondition")));
            }
            let sol = solve_nilpotent(&sys, t).map_err(|m| e(&m.to_string()))?;
            let order = assignment_order(&sol, &sys).map_err(|m| e(&m))?;
            let sln: Vec<(String, Term)> =
                order.iter().map(|x| (x.clone(), sol.get(x).cloned().unwrap_or_else(|| var(x)))).collect();
            let primes: Vec<(String, Term)> = sys.eqs.iter().map(|(x, f)| (primed(x), f.clone())).collect();
            let range = and(cmp(lit_int(0), Rel::Le, var(r)), cmp(var(r), Rel::Le, var(t)));
            let at_r = if dia { diamond(assign(t, var(r)), chain(&sln, sys.domain.clone(), true)) } else { boxf(assign(t, var(r)), chain(&sln, sys.domain.clone(), false)) };
            let dom_all = forall(r, imply(range, at_r));
            let end = chain(&sln, chain(&primes, phi.clone(), dia), dia);
            let nonneg = cmp(var(t), Rel::Ge, lit_int(0));
            let prem = if dia {
                exists(t, and(nonneg, and(dom_all, end)))
            } else {
                forall(t, imply(nonneg, imply(dom_all, end)))
            };
            Ok((vec![seq.same_ctx(prem)], Aux::Solve(SolveAux { sys, sol, order })))
        }
        Rule::Gv => {
            let m = Modal::of(goal).ok_or_else(|| shape("⟨α⟩p or [α]p"))?;
            let (g, p) = m.parts();
            let bv = bound_vars(g);
            if let Some(v) = free_vars_formula(p).intersection(&bv).next() {
                return Err(e(&format!("{v} is free in {p} and bound by the game")));
            }
            only(vec![seq.same_ctx(p.clone()), seq.same_ctx(m.rebuild(g.clone(), arg_formula(args, 0)))])
        }
        Rule::Arith => {
            if !is_first_order(goal) {
                return Err(e(&format!("goal {goal} is not first-order")));
            }
            only(vec![])
        }
    }
}

fn seq_game(a: Game, b: Game) -> Game {
    seq(a, b)
}

fn contains_differential(t: &Term) -> bool {
    match t {
        Term::Differential(_) => true,
        Term::RealLit(_) | Term::Var(_) | Term::PrimedVar(_) => false,
        Term::Plus(a, b) | Term::Times(a, b) | Term::Div(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
            contains_differential(a) || contains_differential(b)
        }
        Term::Neg(a) | Term::Sqrt(a) => contains_differential(a),
        Term::Tuple(ts) => ts.iter().any(contains_differential),
    }
}
