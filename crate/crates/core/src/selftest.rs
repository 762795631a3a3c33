//! Small end-to-end example suite touching every module; backs `dstab selftest`.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::Serialize;

use crate::conics::{brute_force_soluble, conic_invariants, hilbert_symbol, member_quadratic, same_membership_sets, Place};
use crate::ecarith::{an_sieve, count_points, ell_torsion_dim, EllipticCurve};
use crate::error::{Error, Result};
use crate::extfields::{
    build_s_ramified_character, characters_of_order, count_cyclic_fields, weighted_count, DirichletCharacter,
    RamificationSpec,
};
use crate::ffgroup::{
    count_sl2_with_fixed_points, find_tau, fixed_space_dim, lattice_index, torus_fiber_count, LatticeInstance,
    MatrixGF, TorusCharacterPair,
};
use crate::homspace::{search_point, spaces_571a1};
use crate::lfunc::{classify_value, gauss_sum, max_conductor_needed, n_el_count, LContext, Verdict, DEFAULT_EPS};
use crate::primeclass::{classify_prime, scan, silent_primes, surjectivity_heuristic, StabilityParams, SurjectivityVerdict};
use crate::quadfield::{sqrt_in_quadratic_field, QuadraticFieldElement};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Assertion(msg.into()))
    }
}

type Check = (&'static str, &'static str, fn() -> Result<()>);

const CHECKS: &[Check] = &[
    ("ffgroup", "identity over F_3 fixes a plane", || {
        ensure(fixed_space_dim(&MatrixGF::identity(3, 2)?) == 2, "dim != 2")
    }),
    ("ffgroup", "unipotent over F_5 fixes a line", || {
        ensure(fixed_space_dim(&MatrixGF::from_rows2(5, [[1, 1], [0, 1]])?) == 1, "dim != 1")
    }),
    ("ffgroup", "find_tau returns the unipotent for dimension 1", || {
        let u3 = MatrixGF::from_rows2(3, [[1, 1], [0, 1]])?;
        let u5 = MatrixGF::from_rows2(5, [[1, 1], [0, 1]])?;
        ensure(find_tau(3, 1)? == u3 && find_tau(5, 1)? == u5, "unexpected tau")
    }),
    ("ffgroup", "SL_2(F_3) fixed-point count", || ensure(count_sl2_with_fixed_points(3)? == 9, "count != 9")),
    ("ffgroup", "lattice index of the standard basis", || {
        let e = vec![vec![1, 0], vec![0, 1]];
        let inst = LatticeInstance { rank: 2, basis_s: e.clone(), k: 1, z_basis: e };
        ensure(lattice_index(&inst)? == 1, "index != 1")
    }),
    ("ffgroup", "torus fiber of coordinate characters", || {
        let tp = TorusCharacterPair { ell: 5, r: 2, chi1: vec![1, 0], chi2: vec![0, 1], k: 1, a1: 1, a2: 1 };
        ensure(torus_fiber_count(&tp)? == 1 && tp.bound() == 2, "fiber != 1")
    }),
    ("ecarith", "Hasse bound", || {
        let e = EllipticCurve::curve_571a1();
        for p in [3u64, 5, 7, 11, 101, 1009] {
            let n = count_points(&e, p)? as f64;
            let w = 2.0 * (p as f64).sqrt();
            ensure((n - (p as f64 + 1.0)).abs() <= w, format!("p = {p}"))?;
        }
        Ok(())
    }),
    ("ecarith", "split multiplicative prime has a_p = +1", || {
        let e = EllipticCurve::curve_11a1();
        ensure(e.split_by_c6(11)? && e.bad_prime(11).map(|b| b.ap) == Some(1), "a_11 != 1")
    }),
    ("ecarith", "a_n normalization and Hecke relations", || {
        let t = an_sieve(&EllipticCurve::curve_11a1(), 20)?;
        let a4 = t.get(2) * t.get(2) - 2;
        ensure(t.get(1) == 1 && t.get(4) == a4 && t.get(12) == a4 * t.get(3) && t.get(6) == t.get(2) * t.get(3), "relation")
    }),
    ("ecarith", "torsion dimension constraints", || {
        let e = EllipticCurve::curve_571a1();
        for p in crate::arith::primes_in_range(3, 400) {
            if !e.is_good(p) || p == 3 {
                continue;
            }
            let n = count_points(&e, p)?;
            let dim = ell_torsion_dim(&e, p, 3)?;
            if n % 3 != 0 {
                ensure(dim == 0, format!("p = {p}"))?;
            } else if p % 3 != 1 {
                ensure(dim == 1, format!("p = {p}"))?;
            }
        }
        Ok(())
    }),
    ("primeclass", "p = 2 mod 3 is outside Q", || {
        let params = StabilityParams::new(EllipticCurve::curve_571a1(), 3, 1)?;
        ensure(!classify_prime(&params, 5)?.in_q && !classify_prime(&params, 11)?.in_q, "in Q")
    }),
    ("primeclass", "silent primes have level 0", || {
        let params = StabilityParams::new(EllipticCurve::curve_571a1(), 3, 1)?;
        for p in crate::arith::primes_in_range(5, 500) {
            if params.sigma().contains(&p) {
                continue;
            }
            let r = classify_prime(&params, p)?;
            if r.in_q && count_points(&params.curve, p)? % 3 != 0 {
                ensure(r.level == Some(0), format!("p = {p}"))?;
            }
        }
        Ok(())
    }),
    ("primeclass", "levels partition Q", || {
        let params = StabilityParams::new(EllipticCurve::curve_571a1(), 3, 1)?;
        let r = scan(&params, 20_000)?;
        ensure(r.counts.q.iter().sum::<u64>() == r.q_total, "partition")
    }),
    ("primeclass", "few samples never refute", || {
        let v = surjectivity_heuristic(&EllipticCurve::curve_571a1(), 3, 5)?;
        ensure(matches!(v, SurjectivityVerdict::Consistent { .. }), "refuted")
    }),
    ("extfields", "no cubic characters mod 5", || ensure(characters_of_order(5, 3, 1)?.is_empty(), "nonempty")),
    ("extfields", "unconstrained product character", || {
        let chi = build_s_ramified_character(&[7, 13], &[], 3, 1, &RamificationSpec::default())?;
        ensure(chi.conductor() == 91, "conductor != 91")
    }),
    ("extfields", "counts are monotone", || {
        let c: Vec<u64> = [100u128, 1_000, 10_000, 100_000]
            .iter()
            .map(|&x| count_cyclic_fields(3, x).map(|c| c.count))
            .collect::<Result<_>>()?;
        ensure(c.windows(2).all(|w| w[0] <= w[1]), "not monotone")
    }),
    ("extfields", "weighted count around the first silent prime", || {
        let params = StabilityParams::new(EllipticCurve::curve_571a1(), 3, 1)?;
        let q = *silent_primes(&params, 1_000, &BTreeSet::new())?.first().ok_or_else(|| Error::NotFound("silent prime".into()))?;
        let below = weighted_count(&params, q, &BTreeSet::new())?.value;
        let at = weighted_count(&params, q + 1, &BTreeSet::new())?.value;
        ensure(below == 1 && at == 3, format!("{below}, {at}"))
    }),
    ("lfunc", "Gauss sums", || {
        let t = gauss_sum(&DirichletCharacter::trivial(3))?;
        ensure((t.re - 1.0).abs() < 1e-12 && t.im.abs() < 1e-12, "trivial")?;
        for chi in characters_of_order(7, 3, 1)? {
            ensure((gauss_sum(&chi)?.norm() - 7f64.sqrt()).abs() < 1e-10, "modulus")?;
        }
        Ok(())
    }),
    ("lfunc", "conjugate symmetry", || {
        let ctx = LContext::new(EllipticCurve::curve_11a1(), 7, DEFAULT_EPS, None, None)?;
        let chi = characters_of_order(7, 3, 1)?.remove(0);
        let (l, lc) = (ctx.twisted_l_value(&chi, DEFAULT_EPS)?, ctx.twisted_l_value(&chi.conj(), DEFAULT_EPS)?);
        let tol = 10.0 * (l.error_bound + lc.error_bound) + 1e-9;
        ensure((l.re - lc.re).abs() < tol && (l.im + lc.im).abs() < tol, "not conjugate")
    }),
    ("lfunc", "root number override", || {
        let ctx = LContext::new(EllipticCurve::curve_11a1(), 7, DEFAULT_EPS, Some(-1), None)?;
        ensure(ctx.root_number == -1, "override ignored")
    }),
    ("lfunc", "no conductors below 7", || {
        let e = EllipticCurve::curve_11a1();
        let ctx = LContext::new(e.clone(), max_conductor_needed(&e, 3, 6)?, DEFAULT_EPS, None, None)?;
        ensure(n_el_count(&ctx, 3, 6, DEFAULT_EPS)?.count == 0, "count != 0")
    }),
    ("lfunc", "large values are nonvanishing", || {
        ensure(classify_value(1.0, 1e-12, 1.0) == Verdict::Nonvanishing, "verdict")
    }),
    ("conics", "Hilbert symbols", || {
        for v in [Place::Finite(2), Place::Finite(3), Place::Finite(7), Place::Infinity] {
            ensure(hilbert_symbol(1, -5, v)? == 1, "(1, b)")?;
        }
        ensure(hilbert_symbol(-1, -1, Place::Infinity)? == -1, "(-1, -1)_inf")
    }),
    ("conics", "split conic", || {
        let c = conic_invariants(1, 1, -1)?;
        ensure(c.ramified.is_empty(), "ramified")?;
        for d in [-7, -1, 2, 3, 5, 7] {
            ensure(member_quadratic(&c, d)? && brute_force_soluble(1, 1, -1, d, 1)?, format!("d = {d}"))?;
        }
        ensure(same_membership_sets(&c, &c), "self")
    }),
    ("conics", "sum of three squares", || {
        let c = conic_invariants(1, 1, 1)?;
        ensure(!member_quadratic(&c, 7)?, "member over Q(sqrt 7)")?;
        ensure(brute_force_soluble(1, 1, 1, -1, 1)?, "no point over Q(i)")
    }),
    ("quadfield", "square roots", || {
        let nine = QuadraticFieldElement::from_ints(5, 9, 0)?;
        let r = sqrt_in_quadratic_field(&nine).ok_or_else(|| Error::NotFound("sqrt 9".into()))?;
        ensure(r.square() == nine, "sqrt 9")?;
        let w = QuadraticFieldElement::from_ints(17, 69, 4)?;
        let r = sqrt_in_quadratic_field(&w).ok_or_else(|| Error::NotFound("sqrt w".into()))?;
        let one = BigRational::from_integer(1.into());
        ensure(r.square() == w && (r.u == one || r.u == -one), "sqrt 69+4 sqrt 17")
    }),
    ("homspace", "deterministic search", || {
        let (x1, d) = spaces_571a1()[0].clone();
        let a = search_point(&x1, d, 40)?.map(|h| (h.a, h.b, h.c));
        let b = search_point(&x1, d, 40)?.map(|h| (h.a, h.b, h.c));
        ensure(a.is_some() && a == b, "search")
    }),
];

/// Runs every check; never panics on a failing check.
pub fn run() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(module, name, f)| {
            let r = f();
            CheckOutcome { module, name, passed: r.is_ok(), detail: r.err().map(|e| e.to_string()) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_pass() {
        for o in super::run() {
            assert!(o.passed, "{} / {}: {:?}", o.module, o.name, o.detail);
        }
    }
}
