use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::nilpotent::{rhs_polys, SymbolicSolution};
use super::picard::SampledSolution;
use super::poly::{to_poly, Poly};
use super::{OdeError, OdeSystem};
use crate::creal::{ceil_log2, eval_term, pow2, to_creal, CReal, State};
use crate::syntax::*;

/// Tolerances for sampled solution checks.
#[derive(Clone, Debug)]
pub struct SolvesConfig {
    /// Number of uniform grid intervals; endpoints are always included.
    pub grid: u32,
    pub tol: BigRational,
    /// Finite-difference step is `2^-fd_bits · d`.
    pub fd_bits: u32,
}

impl Default for SolvesConfig {
    fn default() -> Self {
        SolvesConfig { grid: 128, tol: pow2(-10), fd_bits: 16 }
    }
}

/// A solution handed over by Angel for an ODE move.
#[derive(Clone, Debug)]
pub enum Solution {
    Symbolic(SymbolicSolution),
    Sampled(SampledSolution),
}

impl SymbolicSolution {
    /// Builds a solution from terms in `time`. Other variables are read in
    /// the initial state.
    pub fn from_terms(time: &str, sol: Vec<(String, Term)>, sys: &OdeSystem) -> Result<Self, OdeError> {
        let mut vars: BTreeSet<String> = sys.var_set();
        vars.insert(time.to_string());
        let mut polys = BTreeMap::new();
        for (x, t) in &sol {
            let p = to_poly(t, &vars).map_err(|e| OdeError::NonPolynomial(e.0.to_string()))?;
            polys.insert(x.clone(), p);
        }
        Ok(SymbolicSolution { time: time.to_string(), sol, polys })
    }
}

impl Solution {
    /// State reached after following the solution for time `t` from `s`.
    /// Primed ODE variables are set to the right-hand side at the end point.
    pub fn state_at(&self, sys: &OdeSystem, s: &State, t: &CReal, k: u32) -> Result<State, OdeError> {
        let mut out = s.clone();
        match self {
            Solution::Symbolic(sym) => {
                let st = s.set(&sym.time, t.clone());
                for (x, term) in &sym.sol {
                    out = out.set(x, to_creal(term, &st)?);
                }
            }
            Solution::Sampled(samp) => {
                let tq = t.refine(k + 8)?.mid();
                out = samp.state_at(s, &tq);
            }
        }
        let ends = out.clone();
        for (x, f) in &sys.eqs {
            out = out.set(&primed(x), to_creal(f, &ends)?);
        }
        Ok(out)
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Solution::Symbolic(_))
    }
}

fn within(a: &CReal, b: &CReal, tol: &BigRational) -> bool {
    let bits = (-ceil_log2(tol)).max(0) as u32 + 4;
    match a.sub(b).refine(bits) {
        Ok(i) => i.mag() <= *tol,
        Err(_) => false,
    }
}

fn check_symbolic(sol: &SymbolicSolution, s: &State, d: &BigRational, sys: &OdeSystem, tol: &BigRational) -> bool {
    let Ok(rhs) = rhs_polys(sys) else { return false };
    for (x, fx) in &rhs {
        let Some(p) = sol.polys.get(x) else { return false };
        let at0 = p.by_power(&sol.time).remove(&0).unwrap_or_default();
        if at0.terms != Poly::atom(x).terms {
            let Ok(v0) = to_creal(&at0.to_term(), s) else { return false };
            if !within(&v0, &s.get(x), tol) {
                return false;
            }
        }
        if d.is_zero() {
            continue;
        }
        let lhs = p.deriv(&sol.time);
        let along = fx.compose(&sol.polys);
        if lhs.terms != along.terms {
            return false;
        }
    }
    true
}

fn check_sampled(sol: &SampledSolution, s: &State, d: &BigRational, sys: &OdeSystem, cfg: &SolvesConfig) -> bool {
    if d > &sol.duration || sys.vars().iter().any(|x| !sol.vars.contains(x)) {
        return false;
    }
    let init_tol = &cfg.tol + &sol.error_bound;
    // Variables outside the system (clocks added by the prover) are ignored.
    for (x, iv) in sol.vars.iter().zip(sol.sample(&BigRational::zero())) {
        if sys.rhs(x).is_none() {
            continue;
        }
        if !within(&CReal::from_rational(iv.mid()), &s.get(x), &init_tol) {
            return false;
        }
    }
    if d.is_zero() {
        return true;
    }
    let delta = d * pow2(-(cfg.fd_bits as i64));
    let n = cfg.grid.max(1);
    let bits = (-ceil_log2(&cfg.tol)).max(0) as u32 + 4;
    for i in 0..=n {
        let t = d * BigRational::new((i as i64).into(), (n as i64).into());
        let lo = (&t - &delta).max(BigRational::zero());
        let hi = (&t + &delta).min(d.clone());
        let (a, b) = (sol.sample(&lo), sol.sample(&hi));
        let at = sol.state_at(s, &t);
        for (j, x) in sol.vars.iter().enumerate() {
            let Some(f) = sys.rhs(x) else { continue };
            let fd = (b[j].mid() - a[j].mid()) / (&hi - &lo);
            let Ok(v) = eval_term(f, &at, bits) else { return false };
            if (fd - v.mid()).abs() > cfg.tol {
                return false;
            }
        }
    }
    true
}

/// Whether `sol` solves the system from `s` for duration `d`: it starts at
/// `s` and its derivative matches the right-hand side. Symbolic solutions
/// are checked by exact polynomial identity, sampled ones on a grid.
pub fn check_solves(sol: &Solution, s: &State, d: &BigRational, sys: &OdeSystem, cfg: &SolvesConfig) -> bool {
    if d.is_negative() || sys.validate().is_err() {
        return false;
    }
    match sol {
        Solution::Symbolic(sym) => check_symbolic(sym, s, d, sys, &cfg.tol),
        Solution::Sampled(samp) => check_sampled(samp, s, d, sys, cfg),
    }
}
