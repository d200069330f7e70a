use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;

use super::interval::Interval;
use super::real::CReal;
use super::CRealError;

/// Total map from variable keys to reals; unassigned keys read as 0.
/// Updates are persistent: the old state stays valid.
#[derive(Clone, Debug, Default)]
pub struct State {
    vals: Arc<BTreeMap<String, CReal>>,
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn from_rationals<'a>(items: impl IntoIterator<Item = (&'a str, BigRational)>) -> Self {
        let mut s = State::new();
        for (k, v) in items {
            s = s.set(k, CReal::from_rational(v));
        }
        s
    }

    pub fn get(&self, key: &str) -> CReal {
        self.vals.get(key).cloned().unwrap_or_else(CReal::zero)
    }

    pub fn set(&self, key: &str, v: CReal) -> State {
        let mut vals = self.vals.clone();
        Arc::make_mut(&mut vals).insert(key.to_string(), v);
        State { vals }
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.vals.contains_key(key)
    }

    /// Explicitly assigned keys in order.
    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.vals.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CReal)> {
        self.vals.iter()
    }

    /// Snapshot of every assigned key at precision k.
    pub fn snapshot(&self, k: u32) -> Result<BTreeMap<String, Interval>, CRealError> {
        self.vals.iter().map(|(x, v)| Ok((x.clone(), v.refine(k)?))).collect()
    }

    /// True when both states hold the very same real for `key`.
    pub fn same_value(&self, other: &State, key: &str) -> bool {
        match (self.vals.get(key), other.vals.get(key)) {
            (Some(a), Some(b)) => a.ptr_eq(b) || (a.as_exact().is_some() && a.as_exact() == b.as_exact()),
            (None, None) => true,
            (Some(a), None) | (None, Some(a)) => a.as_exact().map(num_traits::Zero::is_zero).unwrap_or(false),
        }
    }
}
