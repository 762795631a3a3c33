use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arith::{is_prime, valuation};
use crate::error::{invalid, Error, Result};

use super::count::count_points;
use super::curve::EllipticCurve;
use super::divpoly::{division_polynomial_mod_p, PolyModP};
use super::point::{CurveModP, ReducedPoint};

const PROBE_SAMPLES: usize = 64;

fn check_args(curve: &EllipticCurve, p: u64, ell: u64) -> Result<()> {
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("ell = {ell} is not an odd prime"));
    }
    if p == ell {
        return invalid(format!("p = ell = {p}"));
    }
    curve.require_good(p)
}

/// dim over F_ell of E(F_p)[ell], by random-point probing of the ell-Sylow subgroup.
pub fn ell_torsion_dim(curve: &EllipticCurve, p: u64, ell: u64) -> Result<u32> {
    ell_torsion_dim_probe(curve, p, ell)
}

/// Probing path: the ell-Sylow subgroup of order ell^v is cyclic iff some
/// (N / ell^v)-multiple of a point has order ell^v.
pub fn ell_torsion_dim_probe(curve: &EllipticCurve, p: u64, ell: u64) -> Result<u32> {
    check_args(curve, p, ell)?;
    let n = count_points(curve, p)?;
    let v = valuation(n, ell);
    if v == 0 {
        return Ok(0);
    }
    if v == 1 {
        return Ok(1);
    }
    let c = CurveModP::new(curve, p);
    let cofactor = n / ell.pow(v);
    let full = ell.pow(v);
    let mut rng = ChaCha8Rng::seed_from_u64(curve.seed() ^ (p << 8) ^ ell);
    let small_points = if p <= 3 { Some(c.all_points()) } else { None };
    let mut line: Option<ReducedPoint> = None;
    for i in 0..PROBE_SAMPLES {
        let pt = match &small_points {
            Some(all) => all[i % all.len()],
            None => c.random_point(&mut rng),
        };
        let q = c.mul(cofactor, pt);
        if c.mul(full / ell, q) != ReducedPoint::Infinity {
            return Ok(1);
        }
        // An order-ell multiple of q; two independent ones certify full torsion.
        let mut r = q;
        if r == ReducedPoint::Infinity {
            continue;
        }
        loop {
            let next = c.mul(ell, r);
            if next == ReducedPoint::Infinity {
                break;
            }
            r = next;
        }
        match line {
            None => line = Some(r),
            Some(base) => {
                let mut mult = base;
                let mut dependent = false;
                for _ in 1..ell {
                    if mult == r {
                        dependent = true;
                        break;
                    }
                    mult = c.add(mult, base);
                }
                if !dependent {
                    return Ok(2);
                }
            }
        }
    }
    match line {
        // No element of order ell^v among the samples: the Sylow subgroup is not cyclic.
        Some(_) => Ok(2),
        None => Err(Error::Indeterminate(format!(
            "no ell-power torsion found in {PROBE_SAMPLES} samples at p = {p}"
        ))),
    }
}

/// Division-polynomial path: counts the F_p-rational points whose abscissa is a root of psi_ell.
pub fn ell_torsion_dim_divpoly(curve: &EllipticCurve, p: u64, ell: u64) -> Result<u32> {
    check_args(curve, p, ell)?;
    let psi = division_polynomial_mod_p(curve, ell as usize, p);
    let c = CurveModP::new(curve, p);
    let rational = if p <= 3 {
        (0..p)
            .filter(|&x| psi.eval(x) == 0)
            .map(|x| (0..p).filter(|&y| c.equation(x, y) == 0).count() as u64)
            .sum::<u64>()
    } else {
        let x = PolyModP::x(p);
        let roots = psi.gcd(&x.pow_mod(p, &psi).sub(&x));
        if roots.degree().unwrap_or(0) == 0 {
            0
        } else {
            // 4x^3 + b2 x^2 + 2 b4 x + b6 is a nonzero square exactly when the abscissa lifts to F_p.
            let inv = curve.invariants();
            let disc = PolyModP::from_i128(p, &[inv.b6, 2 * inv.b4, inv.b2, 4]);
            let chi = disc.pow_mod((p - 1) / 2, &roots);
            let lifts = roots.gcd(&chi.sub(&PolyModP::constant(p, 1)));
            2 * lifts.degree().unwrap_or(0) as u64
        }
    };
    match rational + 1 {
        1 => Ok(0),
        t if t == ell => Ok(1),
        t if t == ell * ell => Ok(2),
        t => Err(Error::Assertion(format!("{t} rational {ell}-torsion points at p = {p}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_torsion_when_ell_does_not_divide_order() {
        let e = EllipticCurve::curve_571a1();
        for p in crate::arith::primes_in_range(2, 400) {
            if !e.is_good(p) || p == 3 {
                continue;
            }
            let n = count_points(&e, p).unwrap();
            let d = ell_torsion_dim(&e, p, 3).unwrap();
            if n % 3 != 0 {
                assert_eq!(d, 0);
            }
            if n % 3 == 0 && p % 3 != 1 {
                assert_eq!(d, 1, "Weil pairing forbids full torsion at p = {p}");
            }
            assert_eq!(d, ell_torsion_dim_divpoly(&e, p, 3).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn y2_x3_plus_1_mod_7() {
        // E(F_7) for y^2 = x^3 + 1 has 12 points; its 3-torsion is checked by listing them.
        let e = EllipticCurve::new([0, 0, 0, 0, 1], 36).unwrap();
        let c = CurveModP::new(&e, 7);
        let pts = c.all_points();
        assert_eq!(pts.len(), 12);
        let three_torsion = pts.iter().filter(|&&q| c.mul(3, q) == ReducedPoint::Infinity).count();
        let expected = match three_torsion {
            1 => 0,
            3 => 1,
            9 => 2,
            _ => unreachable!(),
        };
        assert_eq!(ell_torsion_dim_probe(&e, 7, 3).unwrap(), expected);
        assert_eq!(ell_torsion_dim_divpoly(&e, 7, 3).unwrap(), expected);
    }

    #[test]
    fn argument_errors() {
        let e = EllipticCurve::curve_571a1();
        assert!(ell_torsion_dim(&e, 571, 3).is_err());
        assert!(ell_torsion_dim(&e, 5, 5).is_err());
        assert!(ell_torsion_dim(&e, 7, 2).is_err());
    }
}
