//! Conics a x^2 + b y^2 + c z^2 = 0 over Q: local invariants, membership of
//! quadratic fields, and a brute-force solubility oracle over Q(sqrt d).

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::arith::{factor, is_squarefree, jacobi, kronecker_prime, squarefree_part};
use crate::error::{invalid, Result};
use crate::quadfield::QuadraticFieldElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Finite(p) => s.serialize_u64(*p),
            Place::Infinity => s.serialize_str("inf"),
        }
    }
}

fn split_p(mut a: i128, p: i128) -> (u32, i128) {
    let mut k = 0;
    while a % p == 0 {
        a /= p;
        k += 1;
    }
    (k, a)
}

/// Hilbert symbol (a, b)_v: +1 iff z^2 = a x^2 + b y^2 has a nontrivial solution over Q_v.
pub fn hilbert_symbol(a: i64, b: i64, v: Place) -> Result<i8> {
    if a == 0 || b == 0 {
        return invalid("Hilbert symbol needs nonzero arguments");
    }
    let (a, b) = (a as i128, b as i128);
    Ok(match v {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (al, u) = split_p(a, 2);
            let (be, w) = split_p(b, 2);
            let eps = |x: i128| (x.rem_euclid(4) == 3) as u32;
            let omega = |x: i128| matches!(x.rem_euclid(8), 3 | 5) as u32;
            let e = eps(u) * eps(w) + al * omega(w) + be * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (al, u) = split_p(a, p as i128);
            let (be, w) = split_p(b, p as i128);
            let mut s: i8 = if (al * be) % 2 == 1 && p % 4 == 3 { -1 } else { 1 };
            if be % 2 == 1 {
                s *= jacobi(u, p);
            }
            if al % 2 == 1 {
                s *= jacobi(w, p);
            }
            s
        }
    })
}

/// A conic with its ramified places (where the local invariant is 1/2).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConicInvariants {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub ramified: Vec<Place>,
}

/// Squarefree, pairwise coprime representative of the same class; coefficients sorted,
/// with at most one negative sign pattern chosen canonically.
pub fn normalize_conic(a: i64, b: i64, c: i64) -> Result<(i64, i64, i64)> {
    if a == 0 || b == 0 || c == 0 {
        return invalid("conic coefficients must be nonzero");
    }
    let mut v = [squarefree_part(a) as i128, squarefree_part(b) as i128, squarefree_part(c) as i128];
    loop {
        let mut changed = false;
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let g = v[i].gcd(&v[j]);
            if g > 1 {
                v[i] /= g;
                v[j] /= g;
                v[k] *= g;
                changed = true;
            }
        }
        for x in &mut v {
            *x = squarefree_part(*x as i64) as i128;
        }
        if !changed {
            break;
        }
    }
    if v.iter().filter(|x| **x < 0).count() >= 2 {
        v = v.map(|x| -x);
    }
    v.sort();
    Ok((v[0] as i64, v[1] as i64, v[2] as i64))
}

pub fn conic_invariants(a: i64, b: i64, c: i64) -> Result<ConicInvariants> {
    let (a, b, c) = normalize_conic(a, b, c)?;
    let mut places: BTreeSet<Place> = factor((2 * a * b * c).unsigned_abs()).into_iter().map(|(p, _)| Place::Finite(p)).collect();
    places.insert(Place::Infinity);
    let mut ramified = Vec::new();
    for v in places {
        if hilbert_symbol(-a * c, -b * c, v)? == -1 {
            ramified.push(v);
        }
    }
    if ramified.len() % 2 != 0 {
        return Err(crate::Error::Assertion(format!("odd ramified set {ramified:?} for ({a}, {b}, {c})")));
    }
    Ok(ConicInvariants { a, b, c, ramified })
}

fn check_d(d: i64) -> Result<()> {
    if d == 0 || d == 1 || !is_squarefree(d) {
        return invalid(format!("d = {d} must be squarefree and not 0 or 1"));
    }
    Ok(())
}

/// True iff every ramified place has even local degree in Q(sqrt d).
pub fn member_quadratic(conic: &ConicInvariants, d: i64) -> Result<bool> {
    check_d(d)?;
    Ok(conic.ramified.iter().all(|v| match *v {
        Place::Infinity => d < 0,
        Place::Finite(2) => d.rem_euclid(8) != 1,
        Place::Finite(p) => kronecker_prime(d, p) != 1,
    }))
}

pub fn same_membership_sets(c1: &ConicInvariants, c2: &ConicInvariants) -> bool {
    c1.ramified == c2.ramified
}

/// Largest modulus p^k used by the local certificate.
const MAX_LOCAL_MODULUS: u64 = 1 << 20;

/// True if a x^2 + b y^2 + c z^2 = 0 has a primitive solution mod q = p^k: runs over
/// projective points (1 : y : *), (p x : 1 : *) and (p x : * : 1), looking the last
/// free coordinate up in a table of values.
fn primitive_solution_mod(a: i64, b: i64, c: i64, p: u64, k: u32) -> bool {
    let q = p.pow(k);
    let r = |v: i64| v.rem_euclid(q as i64) as u64;
    let (a, b, c) = (r(a), r(b), r(c));
    let mulq = |x: u64, y: u64| (x as u128 * y as u128 % q as u128) as u64;
    let table = |coef: u64, step: u64| {
        let mut t = vec![false; q as usize];
        for z in (0..q).step_by(step as usize) {
            t[mulq(coef, mulq(z, z)) as usize] = true;
        }
        t
    };
    // value v + (table entry) = 0 mod q
    let solvable = |t: &[bool], v: u64| t[((q - v % q) % q) as usize];
    let cz2 = table(c, 1);
    let by2_p = table(b, p);
    (0..q).any(|y| solvable(&cz2, a + mulq(b, mulq(y, y))))
        || (0..q).step_by(p as usize).any(|x| solvable(&cz2, mulq(a, mulq(x, x)) + b))
        || (0..q).step_by(p as usize).any(|x| solvable(&by2_p, mulq(a, mulq(x, x)) + c))
}

/// A place of Q(sqrt d) at which the conic certainly has no point: a real place where the
/// form is definite, or a split prime p with no primitive solution mod p^k. Found by direct
/// enumeration, independently of the Hilbert-symbol formulas; a point over Q(sqrt d) would
/// give a primitive solution mod every p^k at a split p.
pub fn local_obstruction(a: i64, b: i64, c: i64, d: i64) -> Option<Place> {
    if d > 0 && (a > 0) == (b > 0) && (b > 0) == (c > 0) {
        return Some(Place::Infinity);
    }
    let abc = (a as i128 * b as i128 * c as i128).unsigned_abs() as u64;
    for (p, v) in factor(2 * abc) {
        let split = if p == 2 { d.rem_euclid(8) == 1 } else { kronecker_prime(d, p) == 1 };
        if !split {
            continue;
        }
        let want = v + if p == 2 { 3 } else { 2 };
        let mut k = 1;
        while k < want && p.pow(k + 1) <= MAX_LOCAL_MODULUS {
            k += 1;
        }
        if !primitive_solution_mod(a, b, c, p, k) {
            return Some(Place::Finite(p));
        }
    }
    None
}

/// Searches for a projective point (X : Y : Z) with X, Y, Z in Z[sqrt d], every coordinate
/// u + v sqrt d having |u|, |v| <= height. Two coordinates run over nested boxes; the third
/// is solved for exactly. When [`local_obstruction`] certifies that no point exists the
/// scan is skipped, since it could only come back empty.
pub fn brute_force_soluble(a: i64, b: i64, c: i64, d: i64, height: i64) -> Result<bool> {
    Ok(find_point(a, b, c, d, height)?.is_some())
}

/// The first point found by [`brute_force_soluble`], as integer pairs (u, v) per coordinate.
pub fn find_integral_point(a: i64, b: i64, c: i64, d: i64, height: i64) -> Result<Option<[(i64, i64); 3]>> {
    check_d(d)?;
    if a == 0 || b == 0 || c == 0 {
        return invalid("conic coefficients must be nonzero");
    }
    if !(1..=1000).contains(&height) {
        return invalid("height must lie in 1..=1000");
    }
    let big = [a, b, c].iter().map(|x| x.unsigned_abs() as i128).max().unwrap_or(0) * (1 + d.unsigned_abs() as i128) * (height as i128).pow(2);
    if big > 1 << 30 {
        return invalid("conic coefficients or d too large for the search");
    }
    if local_obstruction(a, b, c, d).is_some() {
        return Ok(None);
    }
    // solve for the coordinate with the largest coefficient: its divisibility prunes most
    let coef = [a, b, c];
    let k = (0..3).max_by_key(|&i| (coef[i].abs(), i)).expect("three coefficients");
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut m = 4.min(height);
    loop {
        if let Some((x, y, z)) = box_search(coef[i], coef[j], coef[k], d, m) {
            let mut p = [(0, 0); 3];
            p[i] = x;
            p[j] = y;
            p[k] = z;
            return Ok(Some(p));
        }
        if m == height {
            return Ok(None);
        }
        m = (m * 4).min(height);
    }
}

fn isqrt_exact(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = crate::arith::isqrt(n as u64) as i64;
    (r * r == n).then_some(r)
}

/// Z with Z^2 = R + S sqrt d in Z[sqrt d]: z1^2 + d z2^2 = R and 2 z1 z2 = S.
fn sqrt_in_order(r: i64, s: i64, d: i64) -> Option<(i64, i64)> {
    let q = isqrt_exact(i64::try_from(r as i128 * r as i128 - d as i128 * s as i128 * s as i128).ok()?)?;
    for t in [r + q, r - q] {
        if t % 2 != 0 {
            continue;
        }
        let Some(z1) = isqrt_exact(t / 2) else { continue };
        let z2 = if z1 == 0 {
            if r % d != 0 {
                continue;
            }
            match isqrt_exact(r / d) {
                Some(z2) => z2,
                None => continue,
            }
        } else if s % (2 * z1) == 0 {
            s / (2 * z1)
        } else {
            continue;
        };
        if z1 * z1 + d * z2 * z2 == r && 2 * z1 * z2 == s {
            return Some((z1, z2));
        }
    }
    None
}

/// a X^2 + b Y^2 + c Z^2 = 0 with X, Y in the box and Z solved; X is taken up to sign and
/// conjugation (x1, x2 >= 0).
fn box_search(a: i64, b: i64, c: i64, d: i64, m: i64) -> Option<((i64, i64), (i64, i64), (i64, i64))> {
    for x1 in 0..=m {
        for x2 in 0..=m {
            let ax_r = a * (x1 * x1 + d * x2 * x2);
            let ax_s = 2 * a * x1 * x2;
            for y1 in -m..=m {
                for y2 in -m..=m {
                    if (x1, x2, y1, y2) == (0, 0, 0, 0) {
                        continue;
                    }
                    let ns = -(ax_s + 2 * b * y1 * y2);
                    if ns % c != 0 {
                        continue;
                    }
                    let nr = -(ax_r + b * (y1 * y1 + d * y2 * y2));
                    if nr % c != 0 {
                        continue;
                    }
                    if let Some((z1, z2)) = sqrt_in_order(nr / c, ns / c, d) {
                        if z1.abs() <= m && z2.abs() <= m {
                            return Some(((x1, x2), (y1, y2), (z1, z2)));
                        }
                    }
                }
            }
        }
    }
    None
}

/// A point (x : y : z) over Q(sqrt d), if one is found within the height.
pub fn find_point(a: i64, b: i64, c: i64, d: i64, height: i64) -> Result<Option<[QuadraticFieldElement; 3]>> {
    Ok(find_integral_point(a, b, c, d, height)?.map(|p| p.map(|(u, v)| QuadraticFieldElement::from_ints(d, u, v).expect("valid d"))))
}

/// Checks a x^2 + b y^2 + c z^2 = 0 exactly.
pub fn on_conic(a: i64, b: i64, c: i64, p: &[QuadraticFieldElement; 3]) -> bool {
    let d = p[0].d;
    let k = |n: i64| QuadraticFieldElement::rational(d, BigRational::from_integer(n.into()));
    k(a).mul(&p[0].square()).add(&k(b).mul(&p[1].square())).add(&k(c).mul(&p[2].square())).is_zero()
        && !p.iter().all(QuadraticFieldElement::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols() {
        for v in [Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Infinity] {
            assert_eq!(hilbert_symbol(1, 7, v).unwrap(), 1);
        }
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinity).unwrap(), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(2)).unwrap(), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(3)).unwrap(), 1);
        assert_eq!(hilbert_symbol(2, 3, Place::Finite(3)).unwrap(), -1);
        assert_eq!(hilbert_symbol(5, 5, Place::Finite(5)).unwrap(), 1);
        assert_eq!(hilbert_symbol(3, 3, Place::Finite(3)).unwrap(), -1);
    }

    /// (-1,-1)_2 by brute force: z^2 + x^2 + y^2 = 0 has no primitive solution mod 8.
    #[test]
    fn minus_one_minus_one_at_two_by_search() {
        let primitive_sol = (0..64).any(|x: i64| {
            (0..64).any(|y: i64| (0..64).any(|z: i64| (x | y | z) & 1 == 1 && (x * x + y * y + z * z) % 64 == 0))
        });
        assert!(!primitive_sol);
    }

    #[test]
    fn invariants() {
        assert!(conic_invariants(1, 1, -1).unwrap().ramified.is_empty());
        assert_eq!(conic_invariants(1, 1, 1).unwrap().ramified, vec![Place::Finite(2), Place::Infinity]);
        assert_eq!(conic_invariants(1, 1, -3).unwrap().ramified, vec![Place::Finite(2), Place::Finite(3)]);
        let sphere = conic_invariants(1, 1, 1).unwrap();
        assert!(member_quadratic(&sphere, -1).unwrap());
        assert!(!member_quadratic(&sphere, 7).unwrap());
        assert!(member_quadratic(&conic_invariants(1, 1, -1).unwrap(), 5).unwrap());
        assert!(!same_membership_sets(&conic_invariants(1, 1, -1).unwrap(), &sphere));
        assert!(same_membership_sets(&sphere, &sphere));
        assert!(member_quadratic(&sphere, 4).is_err());
    }

    #[test]
    fn normalization_preserves_class() {
        assert_eq!(normalize_conic(4, 9, -1).unwrap(), normalize_conic(1, 1, -1).unwrap());
        assert_eq!(normalize_conic(2, 2, 1).unwrap(), normalize_conic(1, 1, 2).unwrap());
        assert_eq!(normalize_conic(-1, -1, -1).unwrap(), (1, 1, 1));
    }

    #[test]
    fn residue_count_matches_naive() {
        for (p, k) in [(2u64, 1u32), (2, 3), (2, 4), (3, 2), (5, 2), (7, 1)] {
            let q = p.pow(k) as i64;
            for (a, b, c) in [(1, 1, 1), (1, 1, -3), (2, 3, -5), (-7, 4, 9), (6, -10, 15), (1, 2, -28)] {
                let naive = (0..q).any(|x| {
                    (0..q).any(|y| {
                        (0..q).any(|z| {
                            [x, y, z].iter().any(|v| v % p as i64 != 0) && (a * x * x + b * y * y + c * z * z).rem_euclid(q) == 0
                        })
                    })
                });
                assert_eq!(primitive_solution_mod(a, b, c, p, k), naive, "{a} {b} {c} mod {p}^{k}");
            }
        }
    }

    #[test]
    fn obstructions() {
        assert_eq!(local_obstruction(1, 1, 1, 7), Some(Place::Infinity));
        assert_eq!(local_obstruction(1, 1, 1, -7), Some(Place::Finite(2)));
        assert_eq!(local_obstruction(1, 1, 1, -1), None);
        assert_eq!(local_obstruction(1, 1, -3, 13), Some(Place::Finite(3)));
        assert_eq!(local_obstruction(1, 1, -1, 17), None);
    }

    #[test]
    fn brute_force() {
        assert!(brute_force_soluble(1, 1, -1, 5, 1).unwrap());
        let p = find_point(1, 1, 1, -1, 1).unwrap().unwrap();
        assert!(on_conic(1, 1, 1, &p));
        assert!(!brute_force_soluble(1, 1, 1, 7, 30).unwrap());
        for (a, b, c, d) in [(1, 1, -3, 2), (-22, 5, 5, -22), (-19, 6, 6, -19), (3, 5, -7, -1)] {
            let p = find_point(a, b, c, d, 40).unwrap();
            assert_eq!(p.is_some(), member_quadratic(&conic_invariants(a, b, c).unwrap(), d).unwrap());
            if let Some(p) = p {
                assert!(on_conic(a, b, c, &p));
            }
        }
    }

    /// No point of this conic over Q(sqrt 21) has a rational coordinate and height <= 200.
    #[test]
    fn point_without_rational_coordinate() {
        let p = find_integral_point(-29, -22, 19, 21, 200).unwrap().unwrap();
        assert!(p.iter().all(|&(u, v)| v != 0 && u.abs() <= 200 && v.abs() <= 200));
        let q = p.map(|(u, v)| QuadraticFieldElement::from_ints(21, u, v).unwrap());
        assert!(on_conic(-29, -22, 19, &q));
    }
}
