use std::collections::HashMap;

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{factor, isqrt, jacobi};
use crate::error::Result;

use super::curve::EllipticCurve;
use super::point::{CurveModP, ReducedPoint};

/// Primes below this are counted exhaustively by default.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 10_000;

const MAX_ORDER_SAMPLES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    /// Exhaustive below the threshold, order finding above it.
    Auto { exhaustive_below: u64 },
    Exhaustive,
    OrderFinding,
}

impl Default for CountMethod {
    fn default() -> Self {
        CountMethod::Auto { exhaustive_below: DEFAULT_EXHAUSTIVE_THRESHOLD }
    }
}

/// #E(F_p) including the point at infinity, for a good prime p.
pub fn count_points(curve: &EllipticCurve, p: u64) -> Result<u64> {
    count_points_with(curve, p, CountMethod::default())
}

pub fn count_points_with(curve: &EllipticCurve, p: u64, method: CountMethod) -> Result<u64> {
    curve.require_good(p)?;
    let exhaustive = match method {
        CountMethod::Exhaustive => true,
        CountMethod::OrderFinding => false,
        CountMethod::Auto { exhaustive_below } => p < exhaustive_below,
    };
    // The Hasse interval pins the order down only once it is shorter than small group exponents.
    if exhaustive || p <= 3 {
        return Ok(exhaustive_count(curve, p));
    }
    Ok(order_finding_count(curve, p).unwrap_or_else(|| exhaustive_count(curve, p)))
}

/// a_p for any prime p: p + 1 - #E(F_p) when good, the reduction sign when bad.
pub fn ap(curve: &EllipticCurve, p: u64) -> Result<i64> {
    if let Some(b) = curve.bad_prime(p) {
        return Ok(b.ap);
    }
    Ok(p as i64 + 1 - count_points(curve, p)? as i64)
}

/// Number of points on the reduced model, singular or not.
pub(crate) fn exhaustive_count(curve: &EllipticCurve, p: u64) -> u64 {
    let c = CurveModP::new(curve, p);
    if p <= 3 {
        return c.all_points().len() as u64;
    }
    let mut n = 1u64;
    for x in 0..p {
        n += (1 + jacobi(c.two_torsion_poly(x) as i128, p) as i64) as u64;
    }
    n
}

pub(crate) fn hasse_interval(p: u64) -> (u64, u64) {
    let w = isqrt(4 * p);
    (p + 1 - w, p + 1 + w)
}

/// Some k in [lo, hi] with kP = O, by baby-step giant-step.
fn bsgs_annihilator(c: &CurveModP, pt: ReducedPoint, lo: u64, hi: u64) -> Option<u64> {
    let width = hi - lo + 1;
    let m = isqrt(width) + 1;
    let mut baby: HashMap<ReducedPoint, u64> = HashMap::with_capacity(m as usize);
    let mut cur = ReducedPoint::Infinity;
    for j in 0..m {
        baby.entry(cur).or_insert(j);
        cur = c.add(cur, pt);
    }
    let step = c.mul(m, pt);
    let mut giant = c.mul(lo, pt);
    let mut base = lo;
    while base <= hi {
        // giant + j P = O  <=>  j P = -giant
        if let Some(&j) = baby.get(&c.neg(giant)) {
            if base + j <= hi {
                return Some(base + j);
            }
        }
        giant = c.add(giant, step);
        base += m;
    }
    None
}

pub(crate) fn point_order(c: &CurveModP, pt: ReducedPoint, multiple: u64) -> u64 {
    let mut ord = multiple;
    for (q, _) in factor(multiple) {
        while ord % q == 0 && c.mul(ord / q, pt) == ReducedPoint::Infinity {
            ord /= q;
        }
    }
    ord
}

/// Group order from the lcm of random point orders, or `None` when the
/// Hasse interval still holds several multiples after all samples.
fn order_finding_count(curve: &EllipticCurve, p: u64) -> Option<u64> {
    let c = CurveModP::new(curve, p);
    let (lo, hi) = hasse_interval(p);
    let mut rng = ChaCha8Rng::seed_from_u64(curve.seed() ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut exponent = 1u64;
    for _ in 0..MAX_ORDER_SAMPLES {
        let pt = c.random_point(&mut rng);
        let k = bsgs_annihilator(&c, pt, lo, hi)?;
        exponent = exponent.lcm(&point_order(&c, pt, k));
        let first = lo.div_ceil(exponent) * exponent;
        if first > hi {
            return None;
        }
        if first + exponent > hi {
            return Some(first);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(a: i64, b: i64, n: u64) -> EllipticCurve {
        EllipticCurve::new([0, 0, 0, a, b], n).unwrap()
    }

    #[test]
    fn small_examples() {
        // y^2 = x^3 + x + 1, discriminant -2^4 31
        let e = short(1, 1, 496);
        assert_eq!(exhaustive_count(&e, 5), 9);
        // y^2 = x^3 - x, conductor 32
        let e = short(-1, 0, 32);
        assert_eq!(count_points(&e, 7).unwrap(), 8);
    }

    #[test]
    fn both_paths_agree_and_respect_hasse() {
        let e = EllipticCurve::curve_571a1();
        for p in crate::arith::primes_in_range(5, 3000) {
            if !e.is_good(p) {
                continue;
            }
            let a = count_points_with(&e, p, CountMethod::Exhaustive).unwrap();
            let b = count_points_with(&e, p, CountMethod::OrderFinding).unwrap();
            assert_eq!(a, b, "p = {p}");
            let (lo, hi) = hasse_interval(p);
            assert!((lo..=hi).contains(&a));
        }
    }

    #[test]
    fn bad_prime_rejected() {
        let e = EllipticCurve::curve_571a1();
        assert!(count_points(&e, 571).is_err());
        assert_eq!(ap(&e, 571).unwrap().abs(), 1);
    }
}
