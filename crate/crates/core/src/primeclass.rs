//! Classification of rational primes into the sets Q, P and their levels
//! Q_i, P_i for a curve E, a prime ell and an exponent n, with density
//! comparisons against the fixed-point-free proportion of SL_2(F_ell).

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, jacobi, pow_mod, primes_in_range, primes_up_to};
use crate::ecarith::{ap, count_points, ell_torsion_dim, EllipticCurve};
use crate::error::{invalid, Result};
use crate::ffgroup::{delta_theoretical, sl2_order};

/// E, ell, n and the finite part of Sigma (infinity is implicit).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityParams {
    pub curve: EllipticCurve,
    pub ell: u64,
    pub n: u32,
    sigma: BTreeSet<u64>,
}

impl StabilityParams {
    /// Sigma = {ell} together with the bad primes.
    pub fn new(curve: EllipticCurve, ell: u64, n: u32) -> Result<Self> {
        Self::with_sigma(curve, ell, n, &[])
    }

    /// Default Sigma enlarged by `extra` primes.
    pub fn with_sigma(curve: EllipticCurve, ell: u64, n: u32, extra: &[u64]) -> Result<Self> {
        if ell < 3 || !is_prime(ell) {
            return invalid(format!("ell = {ell} is not an odd prime"));
        }
        if n == 0 {
            return invalid("n must be positive");
        }
        if let Some(&q) = extra.iter().find(|&&q| !is_prime(q)) {
            return invalid(format!("Sigma entry {q} is not prime"));
        }
        let mut sigma: BTreeSet<u64> = curve.bad_primes().iter().map(|b| b.p).collect();
        sigma.insert(ell);
        sigma.extend(extra.iter().copied());
        Ok(Self { curve, ell, n, sigma })
    }

    pub fn sigma(&self) -> &BTreeSet<u64> {
        &self.sigma
    }

    /// ell^n.
    pub fn degree(&self) -> u64 {
        self.ell.pow(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeClassRecord {
    pub p: u64,
    pub in_q: bool,
    pub in_p: bool,
    /// dim E(F_p)[ell]; present exactly when `in_q`.
    pub level: Option<u32>,
    pub ap: i64,
    pub ap_mod_ell: u64,
}

/// True iff every finite prime of Sigma is an ell^n-th power modulo p (with p = 1 mod ell^n).
fn sigma_units_are_powers(params: &StabilityParams, p: u64) -> bool {
    let e = (p - 1) / params.degree();
    params.sigma.iter().all(|&u| pow_mod(u, e, p) == 1)
}

pub fn classify_prime(params: &StabilityParams, p: u64) -> Result<PrimeClassRecord> {
    if !is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if params.sigma.contains(&p) {
        return invalid(format!("{p} lies in Sigma"));
    }
    let a = ap(&params.curve, p)?;
    let ell = params.ell as i64;
    let in_q = p % params.degree() == 1;
    let level = if in_q { Some(ell_torsion_dim(&params.curve, p, params.ell)?) } else { None };
    Ok(PrimeClassRecord {
        p,
        in_q,
        in_p: in_q && sigma_units_are_powers(params, p),
        level,
        ap: a,
        ap_mod_ell: a.rem_euclid(ell) as u64,
    })
}

/// Records for every prime in [lo, hi] outside Sigma.
pub fn classify_range(params: &StabilityParams, lo: u64, hi: u64) -> Result<Vec<PrimeClassRecord>> {
    let primes: Vec<u64> = primes_in_range(lo, hi).into_iter().filter(|p| !params.sigma.contains(p)).collect();
    primes
        .par_chunks(512)
        .map(|c| c.iter().map(|&p| classify_prime(params, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub q: [u64; 3],
    pub p: [u64; 3],
}

impl LevelCounts {
    fn add(mut self, o: Self) -> Self {
        for i in 0..3 {
            self.q[i] += o.q[i];
            self.p[i] += o.p[i];
        }
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityEntry {
    pub set: String,
    pub count: u64,
    pub empirical: f64,
    /// Exact theoretical density as "num/den", when predicted.
    pub theoretical: Option<String>,
    pub z_score: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityReport {
    pub bound: u64,
    pub ell: u64,
    pub n: u32,
    pub primes_scanned: u64,
    pub counts: LevelCounts,
    pub q_total: u64,
    pub p_total: u64,
    pub densities: Vec<DensityEntry>,
}

impl DensityReport {
    pub fn entry(&self, set: &str) -> Option<&DensityEntry> {
        self.densities.iter().find(|e| e.set == set)
    }
}

fn z_score(count: u64, total: u64, prob: f64) -> f64 {
    let expect = total as f64 * prob;
    let sd = (total as f64 * prob * (1.0 - prob)).sqrt();
    (count as f64 - expect) / sd
}

/// Theoretical densities of Q_0, Q_1, Q_2 among all primes for n = 1 and
/// surjective mod-ell image: Frobenius is uniform on SL_2 over Q(mu_ell).
pub fn theoretical_level_densities(ell: u64) -> Result<[Ratio<u64>; 3]> {
    let order = sl2_order(ell);
    let inv_deg = Ratio::new(1, ell - 1);
    let q0 = delta_theoretical(ell)? * inv_deg;
    let q2 = Ratio::new(1, order) * inv_deg;
    let q1 = inv_deg - q0 - q2;
    Ok([q0, q1, q2])
}

/// Classifies all primes <= bound outside Sigma and compares level densities with theory.
pub fn scan(params: &StabilityParams, bound: u64) -> Result<DensityReport> {
    if bound < 1000 {
        return invalid("scan bound must be at least 10^3");
    }
    let primes: Vec<u64> = primes_up_to(bound).into_iter().filter(|p| !params.sigma.contains(p)).collect();
    let total = primes.len() as u64;
    let degree = params.degree();
    let counts = primes
        .par_chunks(2048)
        .map(|chunk| -> Result<LevelCounts> {
            let mut c = LevelCounts::default();
            for &p in chunk.iter().filter(|&&p| p % degree == 1) {
                let level = ell_torsion_dim(&params.curve, p, params.ell)? as usize;
                c.q[level] += 1;
                if sigma_units_are_powers(params, p) {
                    c.p[level] += 1;
                }
            }
            Ok(c)
        })
        .try_reduce(LevelCounts::default, |a, b| Ok(a.add(b)))?;
    let theory = if params.n == 1 { Some(theoretical_level_densities(params.ell)?) } else { None };
    let mut densities = Vec::new();
    for (i, name) in ["Q0", "Q1", "Q2"].iter().enumerate() {
        let t = theory.map(|t| t[i]);
        densities.push(DensityEntry {
            set: name.to_string(),
            count: counts.q[i],
            empirical: counts.q[i] as f64 / total as f64,
            theoretical: t.map(|r| format!("{}/{}", r.numer(), r.denom())),
            z_score: t.map(|r| z_score(counts.q[i], total, *r.numer() as f64 / *r.denom() as f64)),
        });
    }
    for (i, name) in ["P0", "P1", "P2"].iter().enumerate() {
        densities.push(DensityEntry {
            set: name.to_string(),
            count: counts.p[i],
            empirical: counts.p[i] as f64 / total as f64,
            theoretical: None,
            z_score: None,
        });
    }
    Ok(DensityReport {
        bound,
        ell: params.ell,
        n: params.n,
        primes_scanned: total,
        q_total: counts.q.iter().sum(),
        p_total: counts.p.iter().sum(),
        counts,
        densities,
    })
}

/// Q_0 primes (outside `exclude`) up to `bound`, ascending.
pub fn silent_primes(params: &StabilityParams, bound: u64, exclude: &BTreeSet<u64>) -> Result<Vec<u64>> {
    let degree = params.degree();
    let candidates: Vec<u64> = primes_up_to(bound)
        .into_iter()
        .filter(|p| p % degree == 1 && !params.sigma.contains(p) && !exclude.contains(p))
        .collect();
    let flags = candidates
        .par_iter()
        .map(|&p| Ok(count_points(&params.curve, p)? % params.ell != 0))
        .collect::<Result<Vec<bool>>>()?;
    Ok(candidates.into_iter().zip(flags).filter(|&(_, f)| f).map(|(p, _)| p).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SurjectivityVerdict {
    Consistent { samples: usize },
    Refuted { samples: usize, subgroup: String },
}

/// Fewer good-prime samples than this never refute.
pub const MIN_SURJECTIVITY_SAMPLES: usize = 30;

/// Tests whether the observed Frobenius (trace, det) pairs mod ell all fit a
/// single proper subgroup class of GL_2(F_ell) with surjective determinant.
pub fn surjectivity_heuristic(curve: &EllipticCurve, ell: u64, sample_bound: u64) -> Result<SurjectivityVerdict> {
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("ell = {ell} is not an odd prime"));
    }
    let mut pairs = BTreeSet::new();
    let mut samples = 0usize;
    for p in primes_up_to(sample_bound) {
        if p == ell || !curve.is_good(p) {
            continue;
        }
        let a = ap(curve, p)?;
        pairs.insert((a.rem_euclid(ell as i64) as u64, p % ell));
        samples += 1;
    }
    if samples < MIN_SURJECTIVITY_SAMPLES {
        return Ok(SurjectivityVerdict::Consistent { samples });
    }
    let disc_class = |t: u64, d: u64| -> i8 {
        let disc = (t * t + 4 * ell * ell - 4 * d) % ell;
        jacobi(disc as i128, ell)
    };
    // A class whose allowed pairs cover every (t, d) of GL_2(F_ell) cannot be detected.
    let all = |f: &dyn Fn(u64, u64) -> bool| {
        let detectable = (0..ell).any(|t| (1..ell).any(|d| !f(t, d)));
        detectable && pairs.iter().all(|&(t, d)| f(t, d))
    };
    let refuted = |subgroup: &str| Ok(SurjectivityVerdict::Refuted { samples, subgroup: subgroup.to_string() });
    if all(&|t, d| disc_class(t, d) >= 0) {
        return refuted("Borel");
    }
    if all(&|t, d| disc_class(t, d) >= 0 || t == 0) {
        return refuted("normalizer of split Cartan");
    }
    if all(&|t, d| disc_class(t, d) <= 0 || t == 0) {
        return refuted("normalizer of nonsplit Cartan");
    }
    if ell >= 5 {
        // Projective image A4, S4 or A5: t^2/det takes only the values of elements of order <= 5.
        let inv = |d: u64| pow_mod(d, ell - 2, ell);
        let exceptional = |t: u64, d: u64| {
            let u = t * t % ell * inv(d) % ell;
            [0, 1, 2, 4].contains(&(u % ell)) || (u * u + 3 * ell - 3 * u + 1) % ell == 0
        };
        if all(&exceptional) {
            return refuted("exceptional");
        }
    }
    Ok(SurjectivityVerdict::Consistent { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_571(ell: u64) -> StabilityParams {
        StabilityParams::new(EllipticCurve::curve_571a1(), ell, 1).unwrap()
    }

    #[test]
    fn sigma_defaults() {
        let p = params_571(3);
        assert_eq!(p.sigma().iter().copied().collect::<Vec<_>>(), vec![3, 571]);
        assert!(classify_prime(&p, 571).is_err());
        assert!(classify_prime(&p, 3).is_err());
    }

    #[test]
    fn congruence_and_levels() {
        let p = params_571(3);
        let r = classify_prime(&p, 5).unwrap();
        assert!(!r.in_q && !r.in_p && r.level.is_none());
        for rec in classify_range(&p, 5, 3000).unwrap() {
            if rec.in_q {
                let n = count_points(&p.curve, rec.p).unwrap();
                assert_eq!(rec.level == Some(0), n % 3 != 0);
                assert_eq!(rec.level == Some(0), (rec.ap - rec.p as i64 - 1).rem_euclid(3) != 0);
                if rec.level == Some(2) {
                    assert_eq!(n % 9, 0);
                }
            } else {
                assert!(!rec.in_p);
            }
        }
    }

    #[test]
    fn first_level_one_prime_for_571a1_mod_5() {
        let p = params_571(5);
        let first = classify_range(&p, 2, 2000)
            .unwrap()
            .into_iter()
            .find(|r| r.in_q && r.level == Some(1))
            .unwrap();
        // oracle: smallest p = 1 mod 5 with 5 | #E(F_p) but not all 25 5-torsion points rational
        let oracle = primes_up_to(2000)
            .into_iter()
            .filter(|&q| q % 5 == 1 && q != 571)
            .find(|&q| {
                let c = crate::ecarith::CurveModP::new(&p.curve, q);
                let pts = c.all_points();
                let t = pts.iter().filter(|&&x| c.mul(5, x) == crate::ecarith::ReducedPoint::Infinity).count();
                t == 5
            })
            .unwrap();
        assert_eq!(first.p, oracle);
    }

    #[test]
    fn scan_partitions() {
        let p = params_571(3);
        let r = scan(&p, 20_000).unwrap();
        assert_eq!(r.q_total, r.counts.q.iter().sum::<u64>());
        let direct = primes_up_to(20_000).into_iter().filter(|q| q % 3 == 1 && *q != 571).count() as u64;
        assert_eq!(r.q_total, direct);
        for i in 0..3 {
            assert!(r.counts.p[i] <= r.counts.q[i]);
        }
        assert_eq!(r.entry("Q0").unwrap().theoretical.as_deref(), Some("5/16"));
        assert!(scan(&p, 999).is_err());
    }

    #[test]
    fn surjectivity() {
        let e11 = EllipticCurve::curve_11a1();
        assert!(matches!(surjectivity_heuristic(&e11, 5, 5000).unwrap(), SurjectivityVerdict::Refuted { .. }));
        assert!(matches!(surjectivity_heuristic(&e11, 5, 9).unwrap(), SurjectivityVerdict::Consistent { .. }));
        let e = EllipticCurve::curve_571a1();
        assert!(matches!(surjectivity_heuristic(&e, 5, 10_000).unwrap(), SurjectivityVerdict::Consistent { .. }));
        assert!(matches!(surjectivity_heuristic(&e, 3, 10_000).unwrap(), SurjectivityVerdict::Consistent { .. }));
    }

    #[test]
    fn theoretical_densities_sum() {
        let t = theoretical_level_densities(3).unwrap();
        assert_eq!(t[0], Ratio::new(5, 16));
        assert_eq!(t[0] + t[1] + t[2], Ratio::new(1, 2));
    }
}
