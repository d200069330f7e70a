use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::poly::{to_poly, Poly};
use super::{OdeError, OdeSystem};
use crate::syntax::*;

/// Lie-derivative steps attempted before a system is declared not nilpotent.
pub const NILPOTENCY_STEP_BOUND: usize = 64;
const TERM_LIMIT: usize = 20_000;

/// Polynomial solution in a time symbol. Variable names inside the
/// coefficients denote initial values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolicSolution {
    pub time: String,
    #[serde(serialize_with = "ser_terms")]
    pub sol: Vec<(String, Term)>,
    #[serde(skip)]
    pub polys: BTreeMap<String, Poly>,
}

fn ser_terms<S: serde::Serializer>(v: &[(String, Term)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(v.len()))?;
    for (x, t) in v {
        m.serialize_entry(x, &t.to_string())?;
    }
    m.end()
}

impl SymbolicSolution {
    pub fn get(&self, x: &str) -> Option<&Term> {
        self.sol.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    /// Solution terms with the time symbol replaced by `tau`.
    pub fn at(&self, tau: &Term) -> Vec<(String, Term)> {
        self.sol
            .iter()
            .map(|(x, t)| {
                let t2 = crate::statics::substitute_term(t, &self.time, tau).expect("time symbol is never bound in terms");
                (x.clone(), t2)
            })
            .collect()
    }

    /// Degree in the time symbol.
    pub fn degree(&self) -> u32 {
        let ts: BTreeSet<String> = [self.time.clone()].into();
        self.polys.values().map(|p| p.degree_in(&ts)).max().unwrap_or(0)
    }
}

pub(crate) fn rhs_polys(sys: &OdeSystem) -> Result<BTreeMap<String, Poly>, OdeError> {
    let vars = sys.var_set();
    let mut out = BTreeMap::new();
    for (x, rhs) in &sys.eqs {
        let p = to_poly(rhs, &vars).map_err(|e| OdeError::NonPolynomial(e.0.to_string()))?;
        out.insert(x.clone(), p);
    }
    Ok(out)
}

fn lie(p: &Poly, rhs: &BTreeMap<String, Poly>) -> Poly {
    let mut acc = Poly::zero();
    for (y, fy) in rhs {
        let d = p.deriv(y);
        if !d.is_zero() {
            acc = acc.add(&d.mul(fy));
        }
    }
    acc
}

/// Solves a system whose iterated Lie derivatives vanish, verifying the
/// result by differentiation.
pub fn solve_nilpotent(sys: &OdeSystem, time: &str) -> Result<SymbolicSolution, OdeError> {
    sys.validate()?;
    let rhs = rhs_polys(sys)?;
    if sys.eqs.iter().any(|(x, _)| x == time) || rhs.values().any(|p| p.atoms().contains(time)) {
        return Err(OdeError::TimeNotFresh(time.to_string()));
    }
    let tau = Poly::atom(time);
    let mut polys = BTreeMap::new();
    for (x, _) in &sys.eqs {
        let mut p = Poly::atom(x);
        let mut sol = p.clone();
        let mut fact = BigRational::one();
        let mut tpow = Poly::constant(BigRational::one());
        let mut done = false;
        for i in 1..=NILPOTENCY_STEP_BOUND {
            p = lie(&p, &rhs);
            if p.is_zero() {
                done = true;
                break;
            }
            if p.terms.len() > TERM_LIMIT {
                break;
            }
            fact *= BigRational::from_integer(i.into());
            tpow = tpow.mul(&tau);
            sol = sol.add(&p.mul(&tpow).scale(&fact.recip()));
        }
        if !done {
            return Err(OdeError::NotNilpotent(x.clone()));
        }
        polys.insert(x.clone(), sol);
    }
    let out = SymbolicSolution {
        time: time.to_string(),
        sol: sys.eqs.iter().map(|(x, _)| (x.clone(), polys[x].to_term())).collect(),
        polys,
    };
    if !verify_symbolic(&out, &rhs) {
        return Err(OdeError::VerificationFailed);
    }
    Ok(out)
}

/// Exact check: each component starts at its own variable and its time
/// derivative equals the right-hand side along the solution.
pub(crate) fn verify_symbolic(sol: &SymbolicSolution, rhs: &BTreeMap<String, Poly>) -> bool {
    let sub: BTreeMap<String, Poly> = sol.polys.clone();
    for (x, fx) in rhs {
        let Some(p) = sol.polys.get(x) else { return false };
        let at0 = p.by_power(&sol.time).remove(&0).unwrap_or_default();
        if at0.terms != Poly::atom(x).terms {
            return false;
        }
        let lhs = p.deriv(&sol.time);
        let rhs_along = fx.compose(&sub);
        if lhs.terms != rhs_along.terms {
            return false;
        }
    }
    true
}
