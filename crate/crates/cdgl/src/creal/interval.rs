use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << (k as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-k) as usize))
    }
}

/// Smallest e with |x| <= 2^e, for x != 0; 0 for x = 0.
pub fn ceil_log2(x: &BigRational) -> i64 {
    let x = x.abs();
    if x.is_zero() {
        return 0;
    }
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    let mut e = n - d;
    while pow2(e) < x {
        e += 1;
    }
    while pow2(e - 1) >= x {
        e -= 1;
    }
    e
}

pub fn floor_to_grid(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.numer().div_floor(scaled.denom()), scale)
}

pub fn ceil_to_grid(x: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.numer().div_ceil(scaled.denom()), scale)
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / q(2)
    }

    /// max(|lo|, |hi|)
    pub fn mag(&self) -> BigRational {
        self.lo.abs().max(self.hi.abs())
    }

    /// min |v| over the interval.
    pub fn mig(&self) -> BigRational {
        if self.contains_zero() {
            BigRational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= BigRational::zero() && self.hi >= BigRational::zero()
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then(|| Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// Reciprocal; `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Interval> {
        if self.contains_zero() {
            return None;
        }
        Some(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().min(o.hi.clone()) }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().max(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    pub fn scale(&self, c: &BigRational) -> Interval {
        self.mul(&Interval::point(c.clone()))
    }

    /// Rounds outward onto the dyadic grid 2^-bits; points stay exact.
    pub fn round_out(&self, bits: u32) -> Interval {
        if self.is_point() {
            return self.clone();
        }
        Interval { lo: floor_to_grid(&self.lo, bits), hi: ceil_to_grid(&self.hi, bits) }
    }

    /// Lossy conversion for display and plotting.
    pub fn mid_f64(&self) -> f64 {
        to_f64(&self.mid())
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        let e = ceil_log2(x);
        let scaled = x / pow2(e);
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(e as i32)
    })
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lo: String,
            hi: String,
        }
        let r = Raw::deserialize(d)?;
        let parse = |s: &str| {
            crate::syntax::parse_rational(s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
        };
        let (lo, hi) = (parse(&r.lo)?, parse(&r.hi)?);
        if lo > hi {
            return Err(serde::de::Error::custom("lo exceeds hi"));
        }
        Ok(Interval { lo, hi })
    }
}
