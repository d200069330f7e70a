//! Validated integration by Taylor-Picard steps.
//!
//! Each step of length h encloses the flow from a box `m ± r`:
//! the Taylor polynomial of the solution through the rounded centre `m`
//! (coefficients from the Picard recurrence `x[i+1] = f(x)[i] / (i+1)`),
//! a Lagrange remainder evaluated over an a priori enclosure `B`,
//! and the spread `(1 + Lτ + (Lτ)²)·r` where `L` is the Lipschitz constant of
//! the right-hand side over `B`. Steps are uniform with `L·h <= 1/2`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::nilpotent::rhs_polys;
use super::{OdeError, OdeSystem};
use crate::creal::{pow2, q, to_creal, CReal, Interval, State};

const MAX_ORDER: usize = 40;
const MAX_HALVINGS: u32 = 24;

/// Right-hand side with all non-ODE atoms evaluated: coefficient and
/// exponent vector over the ODE variables.
#[derive(Clone, Debug)]
struct IPoly {
    monos: Vec<(Interval, Vec<u32>)>,
}

impl IPoly {
    fn eval(&self, x: &[Interval], grid: u32) -> Interval {
        let mut acc = Interval::point(BigRational::zero());
        for (c, es) in &self.monos {
            let mut t = c.clone();
            for (xi, e) in x.iter().zip(es) {
                for _ in 0..*e {
                    t = t.mul(xi).round_out(grid);
                }
            }
            acc = acc.add(&t);
        }
        acc.round_out(grid)
    }

    fn deriv(&self, j: usize) -> IPoly {
        let mut monos = Vec::new();
        for (c, es) in &self.monos {
            if es[j] > 0 {
                let mut es2 = es.clone();
                es2[j] -= 1;
                monos.push((c.scale(&q(es[j] as i64)), es2));
            }
        }
        IPoly { monos }
    }
}

/// Taylor coefficients of the solution through the box `x0`, order by order.
struct TaylorSeries<'a> {
    rhs: &'a [IPoly],
    /// Per variable, coefficients computed so far.
    coeffs: Vec<Vec<Interval>>,
    /// Per equation and monomial, the running partial products: entry `p`
    /// holds the series of the product of the first `p + 1` factors.
    partial: Vec<Vec<Vec<Vec<Interval>>>>,
    factors: Vec<Vec<Vec<usize>>>,
    grid: u32,
}

impl<'a> TaylorSeries<'a> {
    fn new(rhs: &'a [IPoly], x0: &[Interval], grid: u32) -> Self {
        let factors: Vec<Vec<Vec<usize>>> = rhs
            .iter()
            .map(|p| {
                p.monos
                    .iter()
                    .map(|(_, es)| es.iter().enumerate().flat_map(|(j, e)| std::iter::repeat_n(j, *e as usize)).collect())
                    .collect()
            })
            .collect();
        let partial = factors.iter().map(|ms| ms.iter().map(|fs: &Vec<usize>| vec![Vec::new(); fs.len()]).collect()).collect();
        TaylorSeries { rhs, coeffs: x0.iter().map(|x| vec![x.clone()]).collect(), partial, factors, grid }
    }

    fn order(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Computes coefficient `order()+1` for every variable.
    fn extend(&mut self) {
        let m = self.order();
        let mut next = Vec::with_capacity(self.rhs.len());
        for (i, p) in self.rhs.iter().enumerate() {
            let mut fi = Interval::point(BigRational::zero());
            for (mi, (c, _)) in p.monos.iter().enumerate() {
                let fs = &self.factors[i][mi];
                let coef_m = if fs.is_empty() {
                    if m == 0 {
                        c.clone()
                    } else {
                        continue;
                    }
                } else {
                    let chain = &mut self.partial[i][mi];
                    for (pi, &var) in fs.iter().enumerate() {
                        let v = if pi == 0 {
                            self.coeffs[var][m].clone()
                        } else {
                            let prev = &chain[pi - 1];
                            let mut s = Interval::point(BigRational::zero());
                            for r in 0..=m {
                                s = s.add(&prev[r].mul(&self.coeffs[var][m - r]));
                            }
                            s.round_out(self.grid)
                        };
                        chain[pi].push(v);
                    }
                    c.mul(chain[fs.len() - 1].last().unwrap()).round_out(self.grid)
                };
                fi = fi.add(&coef_m);
            }
            next.push(fi.scale(&BigRational::new(1.into(), ((m + 1) as i64).into())).round_out(self.grid));
        }
        for (i, v) in next.into_iter().enumerate() {
            self.coeffs[i].push(v);
        }
    }
}

fn horner(coeffs: &[Interval], tau: &BigRational, grid: u32) -> Interval {
    let mut acc = Interval::point(BigRational::zero());
    for c in coeffs.iter().rev() {
        acc = acc.scale(tau).add(c).round_out(grid);
    }
    acc
}

fn spread(l: &BigRational, tau: &BigRational) -> BigRational {
    let lt = l * tau;
    BigRational::one() + &lt + &lt * &lt
}

#[derive(Clone, Debug)]
pub struct PicardStep {
    pub t0: BigRational,
    pub h: BigRational,
    /// Taylor coefficients through the centre, orders `0..n`.
    centre: Vec<Vec<Interval>>,
    /// Order-n coefficient enclosure over the a priori box.
    remainder: Vec<Interval>,
    n: usize,
    radius: BigRational,
    lipschitz: BigRational,
}

impl PicardStep {
    fn enclose(&self, tau: &BigRational, grid: u32) -> Vec<Interval> {
        let tn = num_traits::pow(tau.clone(), self.n);
        let g = spread(&self.lipschitz, tau) * &self.radius;
        let dev = Interval::new(-g.clone(), g);
        self.centre
            .iter()
            .zip(&self.remainder)
            .map(|(c, rem)| horner(c, tau, grid).add(&rem.scale(&tn)).add(&dev).round_out(grid))
            .collect()
    }
}

/// Enclosure of an ODE solution on `[0, duration]`.
#[derive(Clone, Debug)]
pub struct SampledSolution {
    pub vars: Vec<String>,
    pub duration: BigRational,
    pub steps: Vec<PicardStep>,
    /// Largest enclosure width over the whole interval.
    pub error_bound: BigRational,
    /// Largest Lipschitz constant used.
    pub lipschitz: BigRational,
    pub precision: u32,
    grid: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub time: String,
    pub values: BTreeMap<String, Interval>,
}

impl SampledSolution {
    /// Enclosures of every variable at time `t` (clamped to the duration).
    pub fn sample(&self, t: &BigRational) -> Vec<Interval> {
        let t = t.clone().max(BigRational::zero()).min(self.duration.clone());
        if self.steps.is_empty() {
            return Vec::new();
        }
        let idx = self.steps.iter().position(|s| t <= &s.t0 + &s.h).unwrap_or(self.steps.len() - 1);
        let st = &self.steps[idx];
        let tau = (&t - &st.t0).max(BigRational::zero());
        st.enclose(&tau, self.grid)
    }

    pub fn sample_var(&self, x: &str, t: &BigRational) -> Option<Interval> {
        let i = self.vars.iter().position(|v| v == x)?;
        Some(self.sample(t).swap_remove(i))
    }

    /// State at time `t` with each variable set to its enclosure midpoint.
    pub fn state_at(&self, base: &State, t: &BigRational) -> State {
        let mut s = base.clone();
        for (x, v) in self.vars.iter().zip(self.sample(t)) {
            s = s.set(x, CReal::from_rational(v.mid()));
        }
        s
    }

    /// Rows at `n + 1` uniformly spaced times.
    pub fn rows(&self, n: usize) -> Vec<SampleRow> {
        let n = n.max(1);
        (0..=n)
            .map(|i| {
                let t = &self.duration * BigRational::new((i as i64).into(), (n as i64).into());
                let values = self.vars.iter().cloned().zip(self.sample(&t)).collect();
                SampleRow { time: t.to_string(), values }
            })
            .collect()
    }
}

enum StepFailure {
    TooLarge,
    Order,
}

fn build_rhs(sys: &OdeSystem, s0: &State, grid: u32) -> Result<Vec<IPoly>, OdeError> {
    let polys = rhs_polys(sys)?;
    let vars: Vec<String> = sys.eqs.iter().map(|(x, _)| x.clone()).collect();
    let mut out = Vec::new();
    for (x, _) in &sys.eqs {
        let p = &polys[x];
        let mut monos = Vec::new();
        for (m, c) in &p.terms {
            let mut coef = Interval::point(c.clone());
            let mut es = vec![0u32; vars.len()];
            for (a, e) in m {
                if let Some(j) = vars.iter().position(|v| v == a) {
                    es[j] = *e;
                } else {
                    let val = match p.opaque.get(a) {
                        Some(t) => to_creal(t, s0)?,
                        None => s0.get(a),
                    };
                    let iv = val.refine(grid)?;
                    for _ in 0..*e {
                        coef = coef.mul(&iv).round_out(grid);
                    }
                }
            }
            monos.push((coef, es));
        }
        out.push(IPoly { monos });
    }
    Ok(out)
}

fn in_interior(inner: &Interval, outer: &Interval) -> bool {
    outer.lo < inner.lo && inner.hi < outer.hi
}

/// Box B with X + [0,h]·f(B) ⊆ B, if one is found quickly.
fn a_priori(rhs: &[IPoly], x: &[Interval], h: &BigRational, grid: u32) -> Option<Vec<Interval>> {
    let hs = Interval::new(BigRational::zero(), h.clone());
    let step = |b: &[Interval]| -> Vec<Interval> {
        rhs.iter().zip(x).map(|(f, xi)| xi.add(&hs.mul(&f.eval(b, grid))).round_out(grid)).collect()
    };
    let tiny = pow2(-(grid as i64) + 4);
    let mut b: Vec<Interval> = step(x);
    for _ in 0..12 {
        b = b
            .iter()
            .map(|i| {
                let pad = i.width() / q(2) + &tiny;
                Interval::new(&i.lo - &pad, &i.hi + &pad)
            })
            .collect();
        let nb = step(&b);
        if nb.iter().zip(&b).all(|(n, o)| in_interior(n, o)) {
            return Some(nb);
        }
        b = nb.iter().zip(&b).map(|(n, o)| n.hull(o)).collect();
    }
    None
}

fn lipschitz(jac: &[Vec<IPoly>], b: &[Interval], grid: u32) -> BigRational {
    jac.iter()
        .map(|row| row.iter().map(|d| d.eval(b, grid).mag()).fold(BigRational::zero(), |a, m| a + m))
        .fold(BigRational::zero(), |a, m| a.max(m))
}

#[allow(clippy::too_many_arguments)]
fn run(
    rhs: &[IPoly],
    jac: &[Vec<IPoly>],
    x0: &[Interval],
    d: &BigRational,
    n_steps: u64,
    budget: &BigRational,
    grid: u32,
) -> Result<(Vec<PicardStep>, BigRational, BigRational), StepFailure> {
    let h = d / BigRational::from_integer(n_steps.into());
    let half = BigRational::new(1.into(), 2.into());
    let mut centre: Vec<BigRational> = x0.iter().map(|i| crate::creal::Interval::mid(i)).collect();
    let mut radius = x0
        .iter()
        .zip(&centre)
        .map(|(i, m)| (&i.hi - m).max(m - &i.lo))
        .fold(BigRational::zero(), |a, r| a.max(r));
    let mut steps = Vec::new();
    let (mut max_l, mut max_w) = (BigRational::zero(), BigRational::zero());
    for j in 0..n_steps {
        let xbox: Vec<Interval> = centre.iter().map(|m| Interval::new(m - &radius, m + &radius)).collect();
        let b = a_priori(rhs, &xbox, &h, grid).ok_or(StepFailure::TooLarge)?;
        let l = lipschitz(jac, &b, grid);
        if &l * &h > half {
            return Err(StepFailure::TooLarge);
        }
        let mut over_b = TaylorSeries::new(rhs, &b, grid);
        let mut n = 0;
        loop {
            over_b.extend();
            n += 1;
            let hn = num_traits::pow(h.clone(), n);
            let w = over_b.coeffs.iter().map(|c| c[n].mag()).fold(BigRational::zero(), |a, m| a.max(m)) * hn;
            if &w <= budget {
                break;
            }
            if n >= MAX_ORDER {
                return Err(StepFailure::Order);
            }
        }
        let point: Vec<Interval> = centre.iter().map(|m| Interval::point(m.clone())).collect();
        let mut at_c = TaylorSeries::new(rhs, &point, grid);
        for _ in 1..n {
            at_c.extend();
        }
        let remainder: Vec<Interval> = over_b.coeffs.iter().map(|c| c[n].clone()).collect();
        let step = PicardStep {
            t0: &h * BigRational::from_integer(j.into()),
            h: h.clone(),
            centre: at_c.coeffs.clone(),
            remainder,
            n,
            radius: radius.clone(),
            lipschitz: l.clone(),
        };
        let end = step.enclose(&h, grid);
        let w = end.iter().map(Interval::width).fold(BigRational::zero(), |a, w| a.max(w));
        // Widths inside a step never exceed the hull of the end enclosure and
        // the spread start box, both bounded below.
        max_w = max_w.max(w).max(&radius * q(2) * spread(&l, &h));
        max_l = max_l.max(l);
        centre = end.iter().map(|i| crate::creal::Interval::mid(i).round_to(grid)).collect();
        radius = end
            .iter()
            .zip(&centre)
            .map(|(i, m)| (&i.hi - m).max(m - &i.lo))
            .fold(BigRational::zero(), |a, r| a.max(r));
        steps.push(step);
    }
    Ok((steps, max_l, max_w))
}

trait RoundTo {
    fn round_to(&self, grid: u32) -> BigRational;
}

impl RoundTo for BigRational {
    fn round_to(&self, grid: u32) -> BigRational {
        let scale = BigRational::from_integer(num_bigint::BigInt::one() << grid as usize);
        (self * &scale).round() / scale
    }
}

/// Encloses the solution from `s0` over `[0, d]` to width at most 2^-k.
pub fn picard_solve(sys: &OdeSystem, s0: &State, d: &BigRational, k: u32) -> Result<SampledSolution, OdeError> {
    sys.validate()?;
    if d.is_negative() {
        return Err(OdeError::NegativeDuration);
    }
    let vars: Vec<String> = sys.eqs.iter().map(|(x, _)| x.clone()).collect();
    let target = pow2(-(k as i64));
    let mut extra = 4u32;
    for _attempt in 0..6 {
        let grid = k + extra + 24;
        let rhs = build_rhs(sys, s0, grid)?;
        let jac: Vec<Vec<IPoly>> = rhs.iter().map(|f| (0..vars.len()).map(|j| f.deriv(j)).collect()).collect();
        let x0: Vec<Interval> = vars.iter().map(|x| s0.get(x).refine(grid)).collect::<Result<_, _>>()?;
        if d.is_zero() {
            let step = PicardStep {
                t0: BigRational::zero(),
                h: BigRational::zero(),
                centre: x0.iter().map(|i| vec![i.clone()]).collect(),
                remainder: vec![Interval::point(BigRational::zero()); vars.len()],
                n: 1,
                radius: BigRational::zero(),
                lipschitz: BigRational::zero(),
            };
            let w = x0.iter().map(Interval::width).fold(BigRational::zero(), |a, w| a.max(w));
            return Ok(SampledSolution { vars, duration: d.clone(), steps: vec![step], error_bound: w, lipschitz: BigRational::zero(), precision: k, grid });
        }
        let mut n_steps: u64 = 1;
        let mut halvings = 0;
        loop {
            let budget = pow2(-((k + extra) as i64)) / BigRational::from_integer(n_steps.into());
            match run(&rhs, &jac, &x0, d, n_steps, &budget, grid) {
                Ok((steps, l, w)) => {
                    if w <= target {
                        return Ok(SampledSolution { vars, duration: d.clone(), steps, error_bound: w, lipschitz: l, precision: k, grid });
                    }
                    let over = crate::creal::ceil_log2(&(w / &target)).max(1) as u32;
                    extra += over + 1;
                    break;
                }
                Err(_) if halvings < MAX_HALVINGS => {
                    n_steps *= 2;
                    halvings += 1;
                }
                Err(_) => return Err(OdeError::LipschitzBoundFailure),
            }
        }
    }
    Err(OdeError::LipschitzBoundFailure)
}
