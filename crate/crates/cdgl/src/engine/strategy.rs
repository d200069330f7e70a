use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::realize::PNode;
use super::script::{Construct, DemonScript};
use super::EngineError;
use crate::prover::CheckResult;
use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Role {
    Angel,
    Demon,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Angel => Role::Demon,
            Role::Demon => Role::Angel,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Angel => "Angel",
            Role::Demon => "Demon",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Extracted(String),
    Scripted(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Extracted(id) => write!(f, "extracted from {id}"),
            Provenance::Scripted(id) => write!(f, "scripted ({id})"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Plan {
    Proof { root: Arc<PNode>, goal: Formula },
    Script(DemonScript),
}

/// A player's decision procedure for a game.
#[derive(Clone, Debug)]
pub struct Strategy {
    pub role: Role,
    pub provenance: Provenance,
    pub(crate) plan: Plan,
}

/// Peels `[?pre]` and returns the modal core of an extracted goal.
pub(crate) fn modal_core(goal: &Formula) -> Option<(Vec<Formula>, &Game, &Formula, bool)> {
    let mut pres = Vec::new();
    let mut f = goal;
    while let Some((pre, rest)) = f.as_imply() {
        pres.push(pre.clone());
        f = rest;
    }
    match f {
        Formula::Diamond(g, p) => Some((pres, g, p, true)),
        Formula::Box(g, p) => Some((pres, g, p, false)),
        _ => None,
    }
}

impl Strategy {
    /// The game an extracted strategy plays, if any.
    pub fn game(&self) -> Option<&Game> {
        match &self.plan {
            Plan::Proof { goal, .. } => modal_core(goal).map(|(_, g, _, _)| g),
            Plan::Script(_) => None,
        }
    }

    /// Postcondition an extracted strategy guarantees.
    pub fn postcondition(&self) -> Option<&Formula> {
        match &self.plan {
            Plan::Proof { goal, .. } => modal_core(goal).map(|(_, _, p, _)| p),
            Plan::Script(_) => None,
        }
    }

    pub fn is_extracted(&self) -> bool {
        matches!(self.plan, Plan::Proof { .. })
    }

    /// A scripted player that never decides anything.
    pub fn passive(role: Role) -> Strategy {
        Strategy { role, provenance: Provenance::Scripted("passive".into()), plan: Plan::Script(DemonScript::default()) }
    }

    pub fn scripted(role: Role, script: DemonScript, id: &str) -> Result<Strategy, EngineError> {
        script.validate()?;
        Ok(Strategy { role, provenance: Provenance::Scripted(id.into()), plan: Plan::Script(script) })
    }
}

/// Demon strategy from a script.
pub fn script_demon(script: DemonScript) -> Result<Strategy, EngineError> {
    let id = format!("seed {}", script.seed);
    Strategy::scripted(Role::Demon, script, &id)
}

/// Strategy for the player the goal speaks about: Angel for `⟨α⟩φ`, Demon
/// for `[α]φ`, possibly under preconditions `pre → ...`.
pub fn extract(result: &CheckResult, goal: &Formula, id: &str) -> Result<Strategy, EngineError> {
    let tree = result
        .tree
        .as_ref()
        .ok_or_else(|| EngineError::NotChecked(format!("{id} did not check: {:?}", result.verdict)))?;
    let goal = desugar(goal);
    if tree.seq.goal != goal {
        return Err(EngineError::StrategyMismatch(format!("proof of {} does not prove {goal}", tree.seq.goal)));
    }
    let (_, _, _, dia) = modal_core(&goal)
        .ok_or_else(|| EngineError::ExtractionUnsupported(format!("{goal} is not a game formula")))?;
    let role = if dia { Role::Angel } else { Role::Demon };
    Ok(Strategy { role, provenance: Provenance::Extracted(id.into()), plan: Plan::Proof { root: PNode::build(tree), goal } })
}

/// Constructs at which `role` decides when playing `g` as the Angel side.
pub fn decision_points(g: &Game, angel_side: bool) -> Vec<Construct> {
    let mut out = Vec::new();
    collect(g, angel_side, &mut out);
    out.sort();
    out.dedup();
    out
}

fn collect(g: &Game, dia: bool, out: &mut Vec<Construct>) {
    match g {
        Game::Test(_) | Game::Assign(..) => {}
        Game::AssignAny(_) if dia => out.push(Construct::AssignAny),
        Game::Ode(..) if dia => out.push(Construct::Ode),
        Game::AssignAny(_) | Game::Ode(..) => {}
        Game::Choice(a, b) => {
            if dia {
                out.push(Construct::Choice);
            }
            collect(a, dia, out);
            collect(b, dia, out);
        }
        Game::Seq(a, b) => {
            collect(a, dia, out);
            collect(b, dia, out);
        }
        Game::Repeat(a) => {
            if dia {
                out.push(Construct::Repeat);
            }
            collect(a, dia, out);
        }
        Game::Dual(a) => collect(a, !dia, out),
        Game::DChoice(..) | Game::DRepeat(_) => collect(&desugar_game(g), dia, out),
    }
}

