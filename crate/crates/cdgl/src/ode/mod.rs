//! ODE systems: closed-form solutions of nilpotent systems, validated
//! Taylor-Picard enclosures, solution checking and differential terms.

mod diff;
mod nilpotent;
mod picard;
mod poly;
mod solves;

pub use diff::{differential, differential_eval, expand_differentials};
pub use nilpotent::{solve_nilpotent, SymbolicSolution, NILPOTENCY_STEP_BOUND};
pub use picard::{picard_solve, PicardStep, SampleRow, SampledSolution};
pub use poly::{to_poly, NotPolynomial, Poly};
pub use solves::{check_solves, Solution, SolvesConfig};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::creal::CRealError;
use crate::statics::{free_vars_formula, term_vars};
use crate::syntax::{is_primed, Formula, Game, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OdeError {
    #[error("system is not nilpotent in {0}")]
    NotNilpotent(String),
    #[error("right-hand side is not polynomial: {0}")]
    NonPolynomial(String),
    #[error("time symbol {0} is not fresh")]
    TimeNotFresh(String),
    #[error("symbolic solution failed verification")]
    VerificationFailed,
    #[error("term is not differentiable: {0}")]
    NonDifferentiable(String),
    #[error("no Lipschitz bound found on the enclosure box")]
    LipschitzBoundFailure,
    #[error("negative duration")]
    NegativeDuration,
    #[error("ill-formed system: {0}")]
    IllFormed(String),
    #[error(transparent)]
    Eval(#[from] CRealError),
}

/// Explicit-form system `x1'=f1, ..., xn'=fn & domain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub eqs: Vec<(String, Term)>,
    pub domain: Formula,
}

impl OdeSystem {
    pub fn new(eqs: Vec<(String, Term)>, domain: Formula) -> Self {
        OdeSystem { eqs, domain }
    }

    pub fn from_game(g: &Game) -> Option<Self> {
        match g {
            Game::Ode(eqs, dom) => Some(OdeSystem { eqs: eqs.clone(), domain: (**dom).clone() }),
            _ => None,
        }
    }

    pub fn to_game(&self) -> Game {
        Game::Ode(self.eqs.clone(), Box::new(self.domain.clone()))
    }

    pub fn vars(&self) -> Vec<String> {
        self.eqs.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.eqs.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn rhs(&self, x: &str) -> Option<&Term> {
        self.eqs.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let mut seen = BTreeSet::new();
        for (x, f) in &self.eqs {
            if is_primed(x) {
                return Err(OdeError::IllFormed(format!("primed ODE variable {x}")));
            }
            if !seen.insert(x.clone()) {
                return Err(OdeError::IllFormed(format!("duplicate ODE variable {x}")));
            }
            if let Some(p) = term_vars(f).into_iter().find(|v| is_primed(v)) {
                return Err(OdeError::IllFormed(format!("right-hand side of {x}' mentions {p}")));
            }
        }
        if let Some(p) = free_vars_formula(&self.domain).into_iter().find(|v| is_primed(v)) {
            return Err(OdeError::IllFormed(format!("domain mentions {p}")));
        }
        Ok(())
    }
}
