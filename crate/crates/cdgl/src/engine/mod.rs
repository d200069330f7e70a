//! Strategy extraction and play.
//!
//! A checked proof of `⟨α⟩φ` or `[α]φ` is turned into evidence (see
//! [`evidence`]) that a player consults at each decision point. `play` runs
//! the game between two such strategies, or against a scripted opponent.

mod evidence;
mod play;
mod realize;
mod relaxed;
mod script;
mod strategy;

use thiserror::Error;

use crate::creal::CRealError;
use crate::ode::OdeError;

pub use evidence::{apply, force, Branch, Ev, Flow, Input};
pub use play::{play, EvidenceRecord, Outcome, PlayConfig, PlayTrace, PostRecord, TraceEvent};
pub use relaxed::{fo_evidence, holds_relaxed};
pub use script::{Answer, Construct, Decision, DecisionRule, DemonScript, ScriptRun};
pub use strategy::{decision_points, extract, script_demon, Provenance, Role, Strategy};

#[derive(Clone, Debug, Error)]
pub enum EngineError {
    #[error("strategy mismatch: {0}")]
    StrategyMismatch(String),
    #[error("solution rejected: {0}")]
    SolutionRejected(String),
    #[error("no termination after {0} loop rounds")]
    NonTermination(u64),
    #[error("script exhausted: {0}")]
    ScriptExhausted(String),
    #[error("evidence refuted: {0}")]
    EvidenceRefuted(String),
    #[error("extraction unsupported: {0}")]
    ExtractionUnsupported(String),
    #[error("proof not checked: {0}")]
    NotChecked(String),
    #[error(transparent)]
    Eval(#[from] CRealError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}
