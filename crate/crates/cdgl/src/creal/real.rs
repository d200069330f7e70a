use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::interval::{ceil_log2, pow2, q, Interval};
use super::CRealError;

/// Extra bits a reciprocal may request while trying to separate its argument
/// from zero.
static DIV_EFFORT: AtomicU32 = AtomicU32::new(256);

pub fn set_division_effort(bits: u32) {
    DIV_EFFORT.store(bits, Ordering::Relaxed);
}

pub fn division_effort() -> u32 {
    DIV_EFFORT.load(Ordering::Relaxed)
}

pub type RefineFn = dyn Fn(u32) -> Result<Interval, CRealError> + Send + Sync;

enum Kind {
    Exact(BigRational),
    Add(CReal, CReal),
    Neg(CReal),
    Mul(CReal, CReal),
    Recip(CReal),
    Min(CReal, CReal),
    Max(CReal, CReal),
    Sqrt(CReal),
    /// Caller-supplied refinement; must return intervals of width <= 2^-k
    /// containing the value.
    Custom(Arc<RefineFn>),
}

struct Node {
    kind: Kind,
    memo: Mutex<Option<Interval>>,
}

/// A real number given by nested rational interval refinements.
#[derive(Clone)]
pub struct CReal(Arc<Node>);

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.refine(20) {
            Ok(i) => write!(f, "CReal(~{})", i.mid_f64()),
            Err(e) => write!(f, "CReal(<{e}>)"),
        }
    }
}

fn mk(kind: Kind) -> CReal {
    CReal(Arc::new(Node { kind, memo: Mutex::new(None) }))
}

impl CReal {
    pub fn from_rational(x: BigRational) -> CReal {
        mk(Kind::Exact(x))
    }

    pub fn from_int(n: i64) -> CReal {
        CReal::from_rational(q(n))
    }

    pub fn zero() -> CReal {
        CReal::from_int(0)
    }

    pub fn from_fn(f: impl Fn(u32) -> Result<Interval, CRealError> + Send + Sync + 'static) -> CReal {
        mk(Kind::Custom(Arc::new(f)))
    }

    /// Exact value when the real was built from rationals only.
    pub fn as_exact(&self) -> Option<&BigRational> {
        match &self.0.kind {
            Kind::Exact(x) => Some(x),
            _ => None,
        }
    }

    pub fn ptr_eq(&self, other: &CReal) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn add(&self, o: &CReal) -> CReal {
        match (self.as_exact(), o.as_exact()) {
            (Some(a), Some(b)) => CReal::from_rational(a + b),
            (Some(a), _) if a.is_zero() => o.clone(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ => mk(Kind::Add(self.clone(), o.clone())),
        }
    }

    pub fn neg(&self) -> CReal {
        match self.as_exact() {
            Some(a) => CReal::from_rational(-a),
            None => mk(Kind::Neg(self.clone())),
        }
    }

    pub fn sub(&self, o: &CReal) -> CReal {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CReal) -> CReal {
        match (self.as_exact(), o.as_exact()) {
            (Some(a), Some(b)) => CReal::from_rational(a * b),
            (Some(a), _) | (_, Some(a)) if a.is_zero() => CReal::zero(),
            _ => mk(Kind::Mul(self.clone(), o.clone())),
        }
    }

    pub fn recip(&self) -> Result<CReal, CRealError> {
        match self.as_exact() {
            Some(a) if a.is_zero() => Err(CRealError::DivisionNearZero),
            Some(a) => Ok(CReal::from_rational(a.recip())),
            None => Ok(mk(Kind::Recip(self.clone()))),
        }
    }

    pub fn div(&self, o: &CReal) -> Result<CReal, CRealError> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn min(&self, o: &CReal) -> CReal {
        match (self.as_exact(), o.as_exact()) {
            (Some(a), Some(b)) => CReal::from_rational(a.clone().min(b.clone())),
            _ => mk(Kind::Min(self.clone(), o.clone())),
        }
    }

    pub fn max(&self, o: &CReal) -> CReal {
        match (self.as_exact(), o.as_exact()) {
            (Some(a), Some(b)) => CReal::from_rational(a.clone().max(b.clone())),
            _ => mk(Kind::Max(self.clone(), o.clone())),
        }
    }

    pub fn sqrt(&self) -> Result<CReal, CRealError> {
        if let Some(a) = self.as_exact() {
            if a.is_negative() {
                return Err(CRealError::SqrtOfNegative);
            }
            if let Some(r) = exact_sqrt(a) {
                return Ok(CReal::from_rational(r));
            }
        }
        Ok(mk(Kind::Sqrt(self.clone())))
    }

    /// Interval of width <= 2^-k containing the value. Successive calls
    /// return nested intervals.
    pub fn refine(&self, k: u32) -> Result<Interval, CRealError> {
        if let Kind::Exact(x) = &self.0.kind {
            return Ok(Interval::point(x.clone()));
        }
        let target = pow2(-(k as i64));
        if let Some(m) = self.0.memo.lock().unwrap().as_ref() {
            if m.width() <= target {
                return Ok(m.clone());
            }
        }
        let fresh = self.compute(k)?;
        let mut memo = self.0.memo.lock().unwrap();
        let best = match memo.as_ref() {
            // Both are sound enclosures, so they intersect.
            Some(m) => m.intersect(&fresh).unwrap_or(fresh),
            None => fresh,
        };
        *memo = Some(best.clone());
        Ok(best)
    }

    fn compute(&self, k: u32) -> Result<Interval, CRealError> {
        let grid = k + 2;
        Ok(match &self.0.kind {
            Kind::Exact(x) => Interval::point(x.clone()),
            Kind::Add(a, b) => a.refine(k + 2)?.add(&b.refine(k + 2)?).round_out(grid),
            Kind::Neg(a) => a.refine(k)?.neg(),
            Kind::Mul(a, b) => {
                let ma = a.refine(0)?.mag();
                let mb = b.refine(0)?.mag();
                let ka = prec_for(k + 3, &mb);
                let kb = prec_for(k + 3, &ma);
                a.refine(ka)?.mul(&b.refine(kb)?).round_out(grid)
            }
            Kind::Recip(a) => {
                let limit = k.saturating_add(division_effort());
                let mut j = 0u32;
                let sep = loop {
                    let i = a.refine(j)?;
                    if !i.contains_zero() {
                        break i.mig();
                    }
                    if j >= limit {
                        return Err(CRealError::DivisionNearZero);
                    }
                    j = (j * 2 + 4).min(limit);
                };
                // width(1/I) <= width(I) / mig(I)^2
                let need = prec_for(k + 1, &(sep.clone() * sep).recip());
                let i = a.refine(need)?;
                i.recip().ok_or(CRealError::DivisionNearZero)?.round_out(grid)
            }
            Kind::Min(a, b) => a.refine(k)?.min(&b.refine(k)?),
            Kind::Max(a, b) => a.refine(k)?.max(&b.refine(k)?),
            Kind::Sqrt(a) => {
                // Away from zero sqrt is Lipschitz with constant 1/(2 sqrt(lo)),
                // which avoids doubling the requested precision.
                let coarse = a.refine(k + 2)?;
                let j = if coarse.lo.is_positive() {
                    let e = ceil_log2(&coarse.lo.recip()).max(0) as u32;
                    k + 2 + e.div_ceil(2)
                } else {
                    2 * k + 4
                };
                let i = a.refine(j)?;
                if i.hi.is_negative() {
                    return Err(CRealError::SqrtOfNegative);
                }
                let lo = if i.lo.is_negative() { BigRational::zero() } else { i.lo.clone() };
                Interval::new(sqrt_floor(&lo, grid), sqrt_ceil(&i.hi, grid))
            }
            Kind::Custom(f) => {
                let i = f(k)?;
                debug_assert!(i.width() <= pow2(-(k as i64)), "custom refinement too wide");
                i
            }
        })
    }

    /// f64 approximation, for diagnostics only.
    pub fn approx(&self) -> f64 {
        self.refine(60).map(|i| i.mid_f64()).unwrap_or(f64::NAN)
    }
}

/// Precision j such that m * 2^-j <= 2^-k.
fn prec_for(k: u32, m: &BigRational) -> u32 {
    let e = ceil_log2(m).max(0);
    k + e as u32
}

fn exact_sqrt(x: &BigRational) -> Option<BigRational> {
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Largest multiple of 2^-bits that is <= sqrt(x).
fn sqrt_floor(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::from(1) << (2 * bits as usize);
    let scaled = (x * BigRational::from_integer(scale)).floor().to_integer();
    BigRational::new(scaled.sqrt(), BigInt::from(1) << bits as usize)
}

/// Smallest multiple of 2^-bits that is >= sqrt(x).
fn sqrt_ceil(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::from(1) << (2 * bits as usize);
    let scaled = (x * BigRational::from_integer(scale)).ceil().to_integer();
    let mut r = scaled.sqrt();
    if &r * &r < scaled {
        r += 1;
    }
    BigRational::new(r, BigInt::from(1) << bits as usize)
}

/// Result of comparing up to a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum EpsCmp {
    /// The left value is strictly greater.
    Gt,
    /// The left value is below right + ε.
    LtPlusEps,
}

/// Decides `a > b` or `a < b + eps`; at least one holds and the answer is
/// always correct for the one returned.
pub fn cmp_eps_real(a: &CReal, b: &CReal, eps: &BigRational) -> Result<EpsCmp, CRealError> {
    assert!(eps.is_positive(), "epsilon must be positive");
    let d = a.sub(b);
    let kmax = (-ceil_log2(eps)).max(0) as u32 + 2;
    let mut k = 0;
    loop {
        let i = d.refine(k)?;
        if i.lo.is_positive() {
            return Ok(EpsCmp::Gt);
        }
        if &i.hi < eps {
            return Ok(EpsCmp::LtPlusEps);
        }
        if k >= kmax {
            // width < eps and lo <= 0 force hi < eps above; unreachable.
            unreachable!("interval of width below epsilon straddles both bounds");
        }
        k = (k + 8).min(kmax);
    }
}

/// Three-valued sign test at a given precision.
pub fn sign_at(x: &CReal, k: u32) -> Result<Option<std::cmp::Ordering>, CRealError> {
    let i = x.refine(k)?;
    Ok(if i.lo.is_positive() {
        Some(std::cmp::Ordering::Greater)
    } else if i.hi.is_negative() {
        Some(std::cmp::Ordering::Less)
    } else if i.is_point() {
        Some(std::cmp::Ordering::Equal)
    } else {
        None
    })
}
