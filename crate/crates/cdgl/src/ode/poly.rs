//! Multivariate polynomials with rational coefficients over atoms.
//!
//! An atom is a variable key or an opaque term that mentions none of the
//! variables being differentiated (for example `sqrt(2*C)` or `1/T`).

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::statics::term_vars;
use crate::syntax::*;

/// Sorted (atom, exponent) pairs with positive exponents.
pub type Mono = Vec<(String, u32)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<Mono, BigRational>,
    /// Opaque atom key to the term it stands for.
    pub opaque: BTreeMap<String, Term>,
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut m: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (x, e) in b {
        *m.entry(x.clone()).or_insert(0) += e;
    }
    m.into_iter().collect()
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn atom(x: &str) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(vec![(x.to_string(), 1)], BigRational::one());
        p
    }

    fn opaque_atom(t: &Term) -> Poly {
        let key = format!("#{t}");
        let mut p = Poly::atom(&key);
        p.opaque.insert(key, t.clone());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn merge_opaque(&mut self, o: &Poly) {
        for (k, v) in &o.opaque {
            self.opaque.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        r.merge_opaque(o);
        for (m, c) in &o.terms {
            let e = r.terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *e += c;
            if e.is_zero() {
                r.terms.remove(m);
            }
        }
        r
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            let mut z = Poly::zero();
            z.opaque = self.opaque.clone();
            return z;
        }
        let mut r = self.clone();
        for v in r.terms.values_mut() {
            *v *= c;
        }
        r
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-BigRational::one())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        r.opaque = self.opaque.clone();
        r.merge_opaque(o);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = mono_mul(ma, mb);
                let e = r.terms.entry(m.clone()).or_insert_with(BigRational::zero);
                *e += ca * cb;
                if e.is_zero() {
                    r.terms.remove(&m);
                }
            }
        }
        r
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut r = Poly::constant(BigRational::one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Partial derivative with respect to atom `x`.
    pub fn deriv(&self, x: &str) -> Poly {
        let mut r = Poly::zero();
        r.opaque = self.opaque.clone();
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|(a, _)| a == x) {
                let e = m[pos].1;
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(pos);
                } else {
                    m2[pos].1 = e - 1;
                }
                let e2 = r.terms.entry(m2.clone()).or_insert_with(BigRational::zero);
                *e2 += c * BigRational::from_integer(e.into());
                if e2.is_zero() {
                    r.terms.remove(&m2);
                }
            }
        }
        r
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.iter().map(|(a, _)| a.clone())).collect()
    }

    /// Highest total degree in the given atoms.
    pub fn degree_in(&self, xs: &BTreeSet<String>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|(a, _)| xs.contains(a)).map(|(_, e)| *e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Simultaneous substitution of atoms by polynomials.
    pub fn compose(&self, sub: &BTreeMap<String, Poly>) -> Poly {
        let mut r = Poly::zero();
        r.opaque = self.opaque.clone();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (a, e) in m {
                let base = match sub.get(a) {
                    Some(p) => p.clone(),
                    None => {
                        let mut p = Poly::atom(a);
                        p.opaque = self.opaque.clone();
                        p
                    }
                };
                t = t.mul(&base.pow(*e));
            }
            r = r.add(&t);
        }
        r
    }

    /// Coefficients by power of atom `x`, each free of `x`.
    pub fn by_power(&self, x: &str) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.iter().find(|(a, _)| a == x).map(|(_, e)| *e).unwrap_or(0);
            let rest: Mono = m.iter().filter(|(a, _)| a != x).cloned().collect();
            let entry = out.entry(e).or_insert_with(|| {
                let mut p = Poly::zero();
                p.opaque = self.opaque.clone();
                p
            });
            entry.terms.insert(rest, c.clone());
        }
        out
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (m, c) in &self.terms {
            let mut factors: Vec<Term> = Vec::new();
            for (a, e) in m {
                let base = match self.opaque.get(a) {
                    Some(t) => t.clone(),
                    None => var(a),
                };
                for _ in 0..*e {
                    factors.push(base.clone());
                }
            }
            let negative = c < &BigRational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            let mut mono: Option<Term> = if mag.is_one() && !factors.is_empty() { None } else { Some(lit(mag)) };
            for f in factors {
                mono = Some(match mono {
                    None => f,
                    Some(t) => times(t, f),
                });
            }
            let mono = mono.expect("nonempty monomial");
            acc = Some(match (acc, negative) {
                (None, false) => mono,
                (None, true) => neg(mono),
                (Some(t), false) => plus(t, mono),
                (Some(t), true) => minus(t, mono),
            });
        }
        acc.unwrap_or_else(|| lit_int(0))
    }
}

/// The term is not polynomial in the listed variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotPolynomial(pub Term);

/// Reads `t` as a polynomial whose non-polynomial subterms mention none of
/// `vars`. Other variables become atoms.
pub fn to_poly(t: &Term, vars: &BTreeSet<String>) -> Result<Poly, NotPolynomial> {
    let mentions = |u: &Term| term_vars(u).iter().any(|v| vars.contains(v));
    Ok(match t {
        Term::RealLit(q) => Poly::constant(q.clone()),
        Term::Var(x) => Poly::atom(x),
        Term::PrimedVar(x) => Poly::atom(&primed(x)),
        Term::Plus(a, b) => to_poly(a, vars)?.add(&to_poly(b, vars)?),
        Term::Times(a, b) => to_poly(a, vars)?.mul(&to_poly(b, vars)?),
        Term::Neg(a) => to_poly(a, vars)?.neg(),
        Term::Div(a, b) => {
            let pa = to_poly(a, vars)?;
            match &**b {
                Term::RealLit(q) if !q.is_zero() => pa.scale(&q.recip()),
                _ if !mentions(b) => pa.mul(&Poly::opaque_atom(&div(lit_int(1), (**b).clone()))),
                _ => return Err(NotPolynomial(t.clone())),
            }
        }
        Term::Min(..) | Term::Max(..) | Term::Sqrt(_) if !mentions(t) => Poly::opaque_atom(t),
        _ => return Err(NotPolynomial(t.clone())),
    })
}
