//! Termination metrics for Angelic loops.
//!
//! A metric is a term or a tuple of terms compared lexicographically against
//! a zero of the same shape. Descent must be by at least a closed margin
//! `δ > 0` in the first component that changes, unless the new value has
//! already reached zero.

use crate::syntax::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    pub m: Vec<Term>,
    pub zero: Vec<Term>,
    pub delta: Term,
    /// Ghost names remembering the metric, one per component.
    pub m0: Vec<String>,
}

fn components(t: &Term) -> Vec<Term> {
    match t {
        Term::Tuple(ts) => ts.clone(),
        _ => vec![t.clone()],
    }
}

impl Metric {
    /// `base` names the ghost; tuples get `base_0`, `base_1`, ...
    pub fn new(m: &Term, zero: &Term, delta: &Term, base: &str) -> Result<Metric, String> {
        let (m, zero) = (components(m), components(zero));
        if m.len() != zero.len() {
            return Err(format!("metric has {} components but zero has {}", m.len(), zero.len()));
        }
        if m.iter().chain(&zero).any(|t| matches!(t, Term::Tuple(_))) {
            return Err("nested tuples are not supported in metrics".into());
        }
        let m0 = if m.len() == 1 { vec![base.to_string()] } else { (0..m.len()).map(|i| format!("{base}_{i}")).collect() };
        Ok(Metric { m, zero, delta: delta.clone(), m0 })
    }

    fn m0_terms(&self) -> Vec<Term> {
        self.m0.iter().map(|n| var(n)).collect()
    }

    /// `M ≻ 0`: lexicographically strictly above zero.
    pub fn positive(&self) -> Formula {
        lex(&self.m, &self.zero, &|a, b| cmp(a.clone(), Rel::Gt, b.clone()), &|a, b| cmp(a.clone(), Rel::Gt, b.clone()))
    }

    /// `0 ≽ M`: the negation of `M ≻ 0`, stated positively.
    pub fn at_zero(&self) -> Formula {
        lex(&self.zero, &self.m, &|a, b| cmp(a.clone(), Rel::Gt, b.clone()), &|a, b| cmp(a.clone(), Rel::Ge, b.clone()))
    }

    /// `M0 = M`, component-wise.
    pub fn remember(&self) -> Formula {
        and_all(self.m0_terms().into_iter().zip(&self.m).map(|(a, b)| cmp(a, Rel::Eq, b.clone())).collect())
    }

    /// `M0 ≻ M`: descent by δ in the first differing component, or arrival at zero.
    pub fn descended(&self) -> Formula {
        let d = &self.delta;
        let step = |a: &Term, b: &Term| cmp(a.clone(), Rel::Ge, plus(b.clone(), d.clone()));
        or(lex(&self.m0_terms(), &self.m, &step, &step), self.at_zero())
    }
}

/// `a₁ R b₁ ∨ (a₁ = b₁ ∧ (a₂ R b₂ ∨ ...))`, with `last` used at the final
/// component.
fn lex(a: &[Term], b: &[Term], strict: &dyn Fn(&Term, &Term) -> Formula, last: &dyn Fn(&Term, &Term) -> Formula) -> Formula {
    if a.len() == 1 {
        return last(&a[0], &b[0]);
    }
    let rest = lex(&a[1..], &b[1..], strict, last);
    or(strict(&a[0], &b[0]), and(cmp(a[0].clone(), Rel::Eq, b[0].clone()), rest))
}
