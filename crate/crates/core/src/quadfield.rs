//! Exact arithmetic in Q(sqrt d).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::is_squarefree;
use crate::error::{invalid, Result};

/// u + v sqrt(d) with rational u, v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticFieldElement {
    pub d: i64,
    pub u: BigRational,
    pub v: BigRational,
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let m = q.denom().sqrt();
    (&n * &n == *q.numer() && &m * &m == *q.denom()).then(|| BigRational::new(n, m))
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl QuadraticFieldElement {
    pub fn new(d: i64, u: BigRational, v: BigRational) -> Result<Self> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return invalid(format!("d = {d} must be squarefree and not 0 or 1"));
        }
        Ok(Self { d, u, v })
    }

    pub fn from_ints(d: i64, u: i64, v: i64) -> Result<Self> {
        Self::new(d, rat(u), rat(v))
    }

    pub fn rational(d: i64, u: BigRational) -> Self {
        Self { d, u, v: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { d: self.d, u: &self.u + &o.u, v: &self.v + &o.v }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = rat(self.d);
        Self { d: self.d, u: &self.u * &o.u + d * &self.v * &o.v, v: &self.u * &o.v + &self.v * &o.u }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self { d: self.d, u: &self.u * q, v: &self.v * q }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn norm(&self) -> BigRational {
        &self.u * &self.u - rat(self.d) * &self.v * &self.v
    }

    /// Horner evaluation of sum coeffs[i] x^i.
    pub fn eval_poly(coeffs: &[i64], x: &Self) -> Self {
        let mut acc = Self::rational(x.d, BigRational::zero());
        for &c in coeffs.iter().rev() {
            acc = acc.mul(x).add(&Self::rational(x.d, rat(c)));
        }
        acc
    }
}

impl fmt::Display for QuadraticFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.u, self.v, self.d)
    }
}

/// Serialized as decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementRecord {
    pub d: i64,
    pub u: String,
    pub v: String,
}

impl From<&QuadraticFieldElement> for ElementRecord {
    fn from(e: &QuadraticFieldElement) -> Self {
        Self { d: e.d, u: e.u.to_string(), v: e.v.to_string() }
    }
}

/// s + t sqrt(d) with (s + t sqrt d)^2 = w, if w is a square.
pub fn sqrt_in_quadratic_field(w: &QuadraticFieldElement) -> Option<QuadraticFieldElement> {
    let d = rat(w.d);
    let zero = BigRational::zero();
    let two = rat(2);
    let found = |s: BigRational, t: BigRational| QuadraticFieldElement { d: w.d, u: s, v: t };
    if w.v.is_zero() {
        if let Some(s) = rational_sqrt(&w.u) {
            return Some(found(s, zero));
        }
        return rational_sqrt(&(&w.u / &d)).map(|t| found(zero, t));
    }
    // s^2 + d t^2 = u, 2 s t = v  =>  s^2 = (u +- sqrt(u^2 - d v^2)) / 2
    let n = rational_sqrt(&w.norm())?;
    for s2 in [(&w.u + &n) / &two, (&w.u - &n) / &two] {
        if s2.is_zero() {
            continue;
        }
        if let Some(s) = rational_sqrt(&s2) {
            let t = &w.v / (&two * &s);
            let r = found(s, t);
            if r.square() == *w {
                return Some(r);
            }
        }
    }
    None
}
