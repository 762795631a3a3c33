use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{factor, jacobi, reduce};
use crate::error::{invalid, Error, Result};

use super::count::exhaustive_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionKind {
    pub fn ap(self) -> i64 {
        match self {
            ReductionKind::SplitMultiplicative => 1,
            ReductionKind::NonsplitMultiplicative => -1,
            ReductionKind::Additive => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrime {
    pub p: u64,
    pub kind: ReductionKind,
    pub ap: i64,
}

/// A globally minimal integral Weierstrass model
/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with its conductor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurve {
    coeffs: [i64; 5],
    conductor: u64,
    discriminant: i128,
    bad_primes: Vec<BadPrime>,
}

impl EllipticCurve {
    /// Builds the curve, checks the conductor against the discriminant, and
    /// derives the bad-prime data by counting points on the reduced model.
    pub fn new(coeffs: [i64; 5], conductor: u64) -> Result<Self> {
        let inv = Invariants::of(&coeffs);
        if inv.disc == 0 {
            return invalid("singular Weierstrass model (discriminant 0)");
        }
        if conductor == 0 {
            return invalid("conductor must be positive");
        }
        let cond_primes = factor(conductor);
        let mut rest = inv.disc.unsigned_abs();
        for &(p, _) in &cond_primes {
            if rest % p as u128 != 0 {
                return invalid(format!("conductor prime {p} does not divide the discriminant"));
            }
            while rest % p as u128 == 0 {
                rest /= p as u128;
            }
        }
        if rest != 1 {
            return invalid(format!(
                "discriminant {} has prime support outside the conductor {conductor} \
                 (model not minimal or conductor wrong)",
                inv.disc
            ));
        }
        let mut curve = Self { coeffs, conductor, discriminant: inv.disc, bad_primes: Vec::new() };
        for (p, e) in cond_primes {
            let ap = p as i64 + 1 - exhaustive_count(&curve, p) as i64;
            let kind = match (e, ap) {
                (1, 1) => ReductionKind::SplitMultiplicative,
                (1, -1) => ReductionKind::NonsplitMultiplicative,
                (e, 0) if e >= 2 => ReductionKind::Additive,
                _ => {
                    return invalid(format!(
                        "reduction at {p} (conductor exponent {e}, singular count gives a_p = {ap}) \
                         is inconsistent; is the model minimal?"
                    ))
                }
            };
            curve.bad_primes.push(BadPrime { p, kind, ap });
        }
        Ok(curve)
    }

    /// As [`EllipticCurve::new`], additionally checking user-supplied bad-prime data.
    pub fn with_bad_prime_data(coeffs: [i64; 5], conductor: u64, data: &[BadPrime]) -> Result<Self> {
        let curve = Self::new(coeffs, conductor)?;
        for d in data {
            match curve.bad_primes.iter().find(|b| b.p == d.p) {
                Some(b) if b == d => {}
                Some(b) => {
                    return invalid(format!("supplied data {d:?} disagrees with the reduced model ({b:?})"))
                }
                None => return invalid(format!("{} is not a bad prime", d.p)),
            }
        }
        Ok(curve)
    }

    /// 571A1: y^2 + y = x^3 - x^2 - 929x - 10595.
    pub fn curve_571a1() -> Self {
        Self::new([0, -1, 1, -929, -10595], 571).expect("571A1 is a valid minimal model")
    }

    /// y^2 + xy = x^3 + x^2 - 32x + 58, conductor 5906.
    pub fn curve_5906() -> Self {
        Self::new([1, 1, 0, -32, 58], 5906).expect("the conductor-5906 model is valid")
    }

    /// 11A1: y^2 + y = x^3 - x^2 - 10x - 20 (rational 5-torsion).
    pub fn curve_11a1() -> Self {
        Self::new([0, -1, 1, -10, -20], 11).expect("11A1 is a valid minimal model")
    }

    pub fn coeffs(&self) -> [i64; 5] {
        self.coeffs
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn discriminant(&self) -> i128 {
        self.discriminant
    }

    pub fn bad_primes(&self) -> &[BadPrime] {
        &self.bad_primes
    }

    pub fn bad_prime(&self, p: u64) -> Option<&BadPrime> {
        self.bad_primes.iter().find(|b| b.p == p)
    }

    pub fn is_good(&self, p: u64) -> bool {
        self.discriminant % p as i128 != 0
    }

    pub fn invariants(&self) -> Invariants {
        Invariants::of(&self.coeffs)
    }

    /// Split-multiplicative test for p >= 5 dividing the conductor exactly once:
    /// split iff -c6 is a square mod p.
    pub fn split_by_c6(&self, p: u64) -> Result<bool> {
        if p < 5 || self.conductor % p != 0 || (self.conductor / p) % p == 0 {
            return invalid(format!("{p} is not a multiplicative prime >= 5"));
        }
        Ok(jacobi(-self.invariants().c6, p) == 1)
    }

    /// SHA-256 of the decimal coefficient list; keys the coefficient cache.
    pub fn digest(&self) -> [u8; 32] {
        let s = self.coeffs.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        Sha256::digest(s.as_bytes()).into()
    }

    /// First 8 digest bytes, used to seed deterministic samplers.
    pub fn seed(&self) -> u64 {
        u64::from_le_bytes(self.digest()[..8].try_into().expect("8 bytes"))
    }

    pub(crate) fn coeffs_mod(&self, p: u64) -> [u64; 5] {
        self.coeffs.map(|a| reduce(a as i128, p))
    }

    pub fn label(&self) -> String {
        let [a1, a2, a3, a4, a6] = self.coeffs;
        format!("[{a1},{a2},{a3},{a4},{a6}] N={}", self.conductor)
    }

    pub(crate) fn require_good(&self, p: u64) -> Result<()> {
        if self.is_good(p) {
            Ok(())
        } else {
            Err(Error::BadPrime(p))
        }
    }
}

/// The b- and c-invariants of a long Weierstrass model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub b2: i128,
    pub b4: i128,
    pub b6: i128,
    pub b8: i128,
    pub c4: i128,
    pub c6: i128,
    pub disc: i128,
}

impl Invariants {
    pub fn of(c: &[i64; 5]) -> Self {
        let [a1, a2, a3, a4, a6] = c.map(|x| x as i128);
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        let c4 = b2 * b2 - 24 * b4;
        let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
        let disc = -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
        Self { b2, b4, b6, b8, c4, c6, disc }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_discriminants() {
        assert_eq!(EllipticCurve::curve_571a1().discriminant(), -571);
        assert_eq!(EllipticCurve::curve_11a1().discriminant(), -161051);
        let e = EllipticCurve::curve_5906();
        assert_eq!(e.bad_primes().len(), 2);
        assert!(e.bad_primes().iter().all(|b| b.kind != ReductionKind::Additive));
    }

    #[test]
    fn rejects_wrong_conductor() {
        assert!(EllipticCurve::new([0, -1, 1, -929, -10595], 572).is_err());
        assert!(EllipticCurve::new([0, 0, 0, 0, 0], 1).is_err());
    }

    #[test]
    fn split_rule_matches_singular_count() {
        for e in [EllipticCurve::curve_571a1(), EllipticCurve::curve_5906(), EllipticCurve::curve_11a1()] {
            for b in e.bad_primes() {
                if b.p >= 5 && b.kind != ReductionKind::Additive {
                    assert_eq!(e.split_by_c6(b.p).unwrap(), b.kind == ReductionKind::SplitMultiplicative);
                }
            }
        }
    }

    #[test]
    fn user_bad_prime_data_is_checked() {
        let e = EllipticCurve::curve_11a1();
        let ok = e.bad_primes().to_vec();
        assert!(EllipticCurve::with_bad_prime_data(e.coeffs(), 11, &ok).is_ok());
        let mut wrong = ok.clone();
        wrong[0].ap = -wrong[0].ap;
        wrong[0].kind = if wrong[0].ap == 1 {
            ReductionKind::SplitMultiplicative
        } else {
            ReductionKind::NonsplitMultiplicative
        };
        assert!(EllipticCurve::with_bad_prime_data(e.coeffs(), 11, &wrong).is_err());
    }
}
