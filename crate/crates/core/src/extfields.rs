//! Dirichlet characters of ell-power order standing in for cyclic extensions
//! of Q: enumeration by conductor, discriminant counts, growth fits, and the
//! S-ramified, Sigma-split construction.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, is_prime, pow_mod, primes_up_to, primitive_root_prime_power};
use crate::error::{invalid, Error, Result};
use crate::primeclass::{silent_primes, StabilityParams};

/// Largest discriminant bound accepted by [`count_cyclic_fields`].
pub const MAX_FIELD_COUNT_BOUND: u128 = 1_000_000_000_000;
/// Conductors up to this are cross-checked against direct character enumeration.
pub const CROSS_CHECK_CONDUCTOR: u64 = 10_000;
/// Largest search space for [`build_s_ramified_character`].
pub const MAX_SEARCH_SPACE: u64 = 50_000_000;

/// A character of (Z/q)^x for a prime power q, of order ell^m, given by its
/// value zeta_{ell^m}^index at a fixed generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCharacter {
    pub prime: u64,
    pub modulus: u64,
    pub generator: u64,
    pub local_order: u64,
    pub index: u64,
    /// (h^i mod q, i) for the order-`local_order` element h = g^(phi(q)/local_order), sorted.
    #[serde(skip)]
    roots: Vec<(u64, u64)>,
}

impl LocalCharacter {
    fn new(prime: u64, modulus: u64, local_order: u64, index: u64) -> Self {
        let e = (modulus as f64).log(prime as f64).round() as u32;
        let generator = primitive_root_prime_power(prime, e.max(1));
        let group_order = modulus / prime * (prime - 1);
        let h = pow_mod(generator, group_order / local_order, modulus);
        let mut roots: Vec<(u64, u64)> = (0..local_order).map(|i| (pow_mod(h, i, modulus), i)).collect();
        roots.sort_unstable();
        Self { prime, modulus, generator, local_order, index: index % local_order, roots }
    }

    fn group_order(&self) -> u64 {
        self.modulus / self.prime * (self.prime - 1)
    }

    /// Discrete log of the image of `a` in the cyclic quotient of order `local_order`.
    fn quotient_log(&self, a: u64) -> u64 {
        let r = pow_mod(a % self.modulus, self.group_order() / self.local_order, self.modulus);
        let i = self.roots.binary_search_by_key(&r, |&(v, _)| v).expect("image lies in the subgroup");
        self.roots[i].1
    }

    /// Exponent of zeta_{local_order}; `a` must be prime to `prime`.
    fn value(&self, a: u64) -> u64 {
        self.index * self.quotient_log(a) % self.local_order
    }

    /// Exact order of this component.
    pub fn order(&self) -> u64 {
        self.local_order / self.index.gcd(&self.local_order)
    }

    fn is_trivial(&self) -> bool {
        self.index == 0
    }
}

/// A primitive Dirichlet character of ell-power order, as a product of local components.
///
/// Values are exponents of zeta_D with D = `denom` = ell^n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirichletCharacter {
    pub ell: u64,
    pub denom: u64,
    pub components: Vec<LocalCharacter>,
}

impl DirichletCharacter {
    pub fn trivial(ell: u64) -> Self {
        Self { ell, denom: 1, components: Vec::new() }
    }

    fn from_components(ell: u64, denom: u64, components: Vec<LocalCharacter>) -> Self {
        let mut c = Self { ell, denom, components };
        c.components.sort_by_key(|l| l.prime);
        c
    }

    /// Conductor, computed from the components (each is primitive at its modulus).
    pub fn conductor(&self) -> u64 {
        self.components.iter().filter(|c| !c.is_trivial()).map(|c| self.component_conductor(c)).product()
    }

    fn component_conductor(&self, c: &LocalCharacter) -> u64 {
        if c.is_trivial() {
            1
        } else if c.prime == self.ell {
            // order ell^j at ell has conductor ell^(j+1)
            self.ell * c.order()
        } else {
            c.prime
        }
    }

    pub fn modulus(&self) -> u64 {
        self.components.iter().map(|c| c.modulus).product()
    }

    pub fn order(&self) -> u64 {
        self.components.iter().map(LocalCharacter::order).fold(1, |a, b| a.lcm(&b))
    }

    /// Exponent of zeta_denom at `a`, or `None` when gcd(a, modulus) > 1.
    pub fn value_exponent(&self, a: u64) -> Option<u64> {
        let mut e = 0u64;
        for c in &self.components {
            if a % c.prime == 0 {
                return None;
            }
            e += c.value(a) * (self.denom / c.local_order);
        }
        Some(e % self.denom)
    }

    /// Exponent at an arbitrary integer (negative values reduced mod the modulus).
    pub fn value_exponent_signed(&self, a: i64) -> Option<u64> {
        let m = self.modulus() as i64;
        self.value_exponent(a.rem_euclid(m) as u64)
    }

    /// Exponents for every residue class mod the modulus; `None` marks non-units.
    pub fn value_table(&self) -> Vec<Option<u64>> {
        let m = self.modulus();
        let mut logs: Vec<Vec<u64>> = Vec::with_capacity(self.components.len());
        for c in &self.components {
            // log table over the component modulus, by walking the generator
            let mut table = vec![u64::MAX; c.modulus as usize];
            let mut g = 1u64;
            for k in 0..c.group_order() {
                table[g as usize] = k % c.local_order;
                g = g * c.generator % c.modulus;
            }
            logs.push(table);
        }
        (0..m)
            .map(|a| {
                let mut e = 0;
                for (c, t) in self.components.iter().zip(&logs) {
                    let k = t[(a % c.modulus) as usize];
                    if k == u64::MAX {
                        return None;
                    }
                    e += c.index * k % c.local_order * (self.denom / c.local_order);
                }
                Some(e % self.denom)
            })
            .collect()
    }

    pub fn is_even(&self) -> bool {
        self.value_exponent_signed(-1) == Some(0)
    }

    /// chi^k.
    pub fn pow(&self, k: u64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.index = c.index * (k % c.local_order) % c.local_order;
                c
            })
            .collect();
        Self { ell: self.ell, denom: self.denom, components }
    }

    pub fn conj(&self) -> Self {
        self.pow(self.denom - 1)
    }

    /// Component exponents at the generators, in Z/denom.
    pub fn steps(&self) -> Vec<(u64, u64)> {
        self.components.iter().map(|c| (c.prime, c.index * (self.denom / c.local_order) % self.denom)).collect()
    }

    /// The Galois orbit {chi^k : k in (Z/order)^x}.
    pub fn galois_orbit(&self) -> Vec<Self> {
        let ord = self.order();
        (1..=ord).filter(|k| k.gcd(&ord) == 1).map(|k| self.pow(k)).collect()
    }

    /// Lexicographically least step vector over the Galois orbit; equal for conjugates.
    pub fn orbit_key(&self) -> Vec<(u64, u64)> {
        self.galois_orbit().iter().map(Self::steps).min().unwrap_or_default()
    }

    /// Human-readable id: conductor and step vector.
    pub fn id(&self) -> String {
        let steps: Vec<String> = self.steps().iter().map(|(p, s)| format!("{p}^{s}")).collect();
        format!("{}:{}/{}", self.conductor(), steps.join("."), self.denom)
    }
}

/// Local choices (modulus, order) available at p^e for characters of order dividing ell^n.
fn local_options(p: u64, e: u32, ell: u64, n: u32) -> Vec<(u64, u64, u64)> {
    let denom = ell.pow(n);
    let mut out = Vec::new();
    if p == ell {
        if e < 2 || e - 1 > n {
            return out;
        }
        let order = ell.pow(e - 1);
        let modulus = ell.pow(e);
        for j in 1..order {
            if j % ell != 0 {
                out.push((modulus, order, j));
            }
        }
    } else {
        if e != 1 {
            return out;
        }
        let order = (p - 1).gcd(&denom);
        for j in 1..order {
            out.push((p, order, j));
        }
    }
    out
}

/// All primitive characters of conductor exactly f and order exactly ell^n.
pub fn characters_of_order(f: u64, ell: u64, n: u32) -> Result<Vec<DirichletCharacter>> {
    if f == 0 {
        return invalid("conductor must be positive");
    }
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("ell = {ell} is not an odd prime"));
    }
    let denom = ell.pow(n);
    let fac = factor(f);
    let mut per_prime = Vec::new();
    for &(p, e) in &fac {
        let opts = local_options(p, e, ell, n);
        if opts.is_empty() {
            return Ok(Vec::new());
        }
        per_prime.push((p, opts));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_prime.len()];
    if per_prime.is_empty() {
        return Ok(if n == 0 { vec![DirichletCharacter::trivial(ell)] } else { Vec::new() });
    }
    // Local characters are rebuilt per option; cache them.
    let locals: Vec<Vec<LocalCharacter>> = per_prime
        .iter()
        .map(|(p, opts)| opts.iter().map(|&(m, o, j)| LocalCharacter::new(*p, m, o, j)).collect())
        .collect();
    loop {
        let comps: Vec<LocalCharacter> = idx.iter().enumerate().map(|(i, &k)| locals[i][k].clone()).collect();
        let chi = DirichletCharacter::from_components(ell, denom, comps);
        if chi.order() == denom {
            out.push(chi);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < locals[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// A cyclic field of degree ell^n, represented by a Galois orbit of characters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclicFieldRecord {
    pub conductor: u64,
    pub degree: u64,
    /// Absolute discriminant, as a decimal string.
    pub discriminant: String,
    pub ramified_primes: Vec<u64>,
    pub orbit: Vec<String>,
    /// Exponents of zeta_degree per residue class mod the conductor (null for non-units);
    /// present when the conductor is at most 10^4.
    pub representative_values: Option<Vec<Option<u64>>>,
    /// (q, residue degree) for unramified query primes; degree 1 means q splits completely.
    pub splitting: Vec<(u64, u64)>,
    pub totally_real: bool,
}

/// |disc| = product of conductors of the characters chi^k (conductor-discriminant formula).
pub fn discriminant_of(chi: &DirichletCharacter) -> BigUint {
    (0..chi.order()).map(|k| BigUint::from(chi.pow(k).conductor())).fold(BigUint::one(), |a, b| a * b)
}

impl CyclicFieldRecord {
    pub fn from_character(chi: &DirichletCharacter, query: &[u64]) -> Self {
        let f = chi.conductor();
        let orbit = chi.galois_orbit();
        let splitting = query
            .iter()
            .filter_map(|&q| {
                let e = chi.value_exponent(q)?;
                Some((q, chi.denom / e.gcd(&chi.denom)))
            })
            .collect();
        Self {
            conductor: f,
            degree: chi.order(),
            discriminant: discriminant_of(chi).to_string(),
            ramified_primes: chi.components.iter().filter(|c| !c.is_trivial()).map(|c| c.prime).collect(),
            orbit: orbit.iter().map(DirichletCharacter::id).collect(),
            representative_values: (f <= CROSS_CHECK_CONDUCTOR).then(|| chi.value_table()),
            splitting,
            totally_real: chi.is_even(),
        }
    }
}

/// One representative per Galois orbit of primitive order-ell^n characters of conductor f.
pub fn orbit_representatives(chars: Vec<DirichletCharacter>) -> Vec<DirichletCharacter> {
    let mut seen = BTreeSet::new();
    chars.into_iter().filter(|c| seen.insert(c.orbit_key())).collect()
}

/// Cyclic degree-ell^n fields with conductor <= fmax.
pub fn enumerate_fields(ell: u64, n: u32, fmax: u64, query: &[u64]) -> Result<Vec<CyclicFieldRecord>> {
    let mut out = Vec::new();
    for f in 2..=fmax {
        for chi in orbit_representatives(characters_of_order(f, ell, n)?) {
            out.push(CyclicFieldRecord::from_character(&chi, query));
        }
    }
    Ok(out)
}

/// Character constraints for [`build_s_ramified_character`].
#[derive(Clone, Debug, Default)]
pub struct RamificationSpec {
    /// Required ramification exponent e_p (ramification degree ell^e_p, 1 <= e_p <= n)
    /// for designated primes of S; all other primes of S are totally ramified.
    pub exponents: BTreeMap<u64, u32>,
}

/// A character of conductor prod(S) and order ell^n with chi(q) = 1 for every q in Sigma,
/// found by exhaustive search over the product of local choices.
pub fn build_s_ramified_character(
    s: &[u64],
    sigma: &[u64],
    ell: u64,
    n: u32,
    ram: &RamificationSpec,
) -> Result<DirichletCharacter> {
    if ell < 3 || !is_prime(ell) || n == 0 {
        return invalid("ell must be an odd prime and n positive");
    }
    let denom = ell.pow(n);
    let s: BTreeSet<u64> = s.iter().copied().collect();
    if s.is_empty() {
        return invalid("S must be nonempty");
    }
    for &p in &s {
        if !is_prime(p) || p % denom != 1 {
            return invalid(format!("{p} is not a prime congruent to 1 mod {denom}"));
        }
        if sigma.contains(&p) {
            return invalid(format!("{p} lies in both S and Sigma"));
        }
    }
    for (&p, &e) in &ram.exponents {
        if !s.contains(&p) || e == 0 || e > n {
            return invalid(format!("ramification exponent {e} at {p} is not allowed"));
        }
    }
    let space = denom.checked_pow(s.len() as u32).filter(|&v| v <= MAX_SEARCH_SPACE);
    if space.is_none() {
        return Err(Error::CutoffExceeded { what: "character search space".into(), limit: MAX_SEARCH_SPACE });
    }
    let primes: Vec<u64> = s.into_iter().collect();
    let base: Vec<LocalCharacter> = primes.iter().map(|&p| LocalCharacter::new(p, p, denom, 1)).collect();
    // logs[i][j]: quotient log of sigma[j] at the i-th prime of S
    let logs: Vec<Vec<u64>> = base.iter().map(|b| sigma.iter().map(|&q| b.quotient_log(q)).collect()).collect();
    let allowed: Vec<Vec<u64>> = primes
        .iter()
        .map(|p| {
            let want = ram.exponents.get(p).copied().unwrap_or(n);
            (1..denom).filter(|j| denom / j.gcd(&denom) == ell.pow(want)).collect()
        })
        .collect();
    let mut idx = vec![0usize; primes.len()];
    loop {
        let js: Vec<u64> = idx.iter().enumerate().map(|(i, &k)| allowed[i][k]).collect();
        let splits = (0..sigma.len()).all(|q| js.iter().zip(&logs).map(|(j, l)| j * l[q]).sum::<u64>() % denom == 0);
        let order = js.iter().map(|j| denom / j.gcd(&denom)).max().unwrap_or(1);
        if splits && order == denom {
            let comps = primes.iter().zip(&js).map(|(&p, &j)| LocalCharacter::new(p, p, denom, j)).collect();
            let chi = DirichletCharacter::from_components(ell, denom, comps);
            debug_assert!(chi.is_even());
            return Ok(chi);
        }
        let mut i = 0;
        loop {
            if i == idx.len() {
                return Err(Error::NotFound(format!(
                    "no order-{denom} character of conductor {} is trivial on Sigma",
                    primes.iter().product::<u64>()
                )));
            }
            idx[i] += 1;
            if idx[i] < allowed[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Cyclic degree-ell fields with discriminant below a bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionCount {
    pub ell: u64,
    pub bound: u128,
    pub count: u64,
    /// (conductor, number of fields) in increasing conductor order.
    pub per_conductor: Vec<(u64, u64)>,
}

/// Fields of conductor f: (ell - 1)^(k - 1) for k ramified primes.
fn admissible_conductors(ell: u64, fmax: u64) -> Vec<(u64, u32)> {
    let tame: Vec<u64> = primes_up_to(fmax).into_iter().filter(|p| p % ell == 1).collect();
    let mut out = Vec::new();
    fn walk(primes: &[u64], start: usize, cur: u64, k: u32, fmax: u64, out: &mut Vec<(u64, u32)>) {
        if k > 0 {
            out.push((cur, k));
        }
        for i in start..primes.len() {
            let Some(next) = cur.checked_mul(primes[i]).filter(|&v| v <= fmax) else {
                break;
            };
            walk(primes, i + 1, next, k + 1, fmax, out);
        }
    }
    walk(&tame, 0, 1, 0, fmax, &mut out);
    let wild = ell * ell;
    let with_wild: Vec<(u64, u32)> = std::iter::once((1u64, 0u32))
        .chain(out.iter().copied())
        .filter_map(|(f, k)| f.checked_mul(wild).filter(|&v| v <= fmax).map(|v| (v, k + 1)))
        .collect();
    out.extend(with_wild);
    out.sort_unstable();
    out
}

fn integer_root_floor(x: u128, k: u32) -> u64 {
    let mut r = (x as f64).powf(1.0 / k as f64) as u64 + 2;
    while (r as u128).checked_pow(k).is_none_or(|v| v > x) {
        r -= 1;
    }
    r
}

/// Number of primitive order-ell characters of conductor f counted by brute force:
/// order-ell elements of (Z/d)^x for d | f, Moebius-inverted.
pub fn fields_by_enumeration(f: u64, ell: u64) -> Result<u64> {
    let chars = characters_of_order(f, ell, 1)?;
    let orbits = orbit_representatives(chars.clone()).len() as u64;
    if orbits * (ell - 1) != chars.len() as u64 {
        return Err(Error::Assertion(format!("orbit sizes at conductor {f} are not ell - 1")));
    }
    Ok(orbits)
}

/// Counts cyclic degree-ell fields with |disc| = f^(ell-1) < bound.
pub fn count_cyclic_fields(ell: u64, bound: u128) -> Result<ExtensionCount> {
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("ell = {ell} is not an odd prime"));
    }
    if bound > MAX_FIELD_COUNT_BOUND {
        return Err(Error::CutoffExceeded { what: format!("bound {bound}"), limit: MAX_FIELD_COUNT_BOUND as u64 });
    }
    if bound <= 1 {
        return Ok(ExtensionCount { ell, bound, count: 0, per_conductor: Vec::new() });
    }
    let fmax = integer_root_floor(bound - 1, (ell - 1) as u32);
    let per_conductor: Vec<(u64, u64)> =
        admissible_conductors(ell, fmax).into_iter().map(|(f, k)| (f, (ell - 1).pow(k - 1))).collect();
    for &(f, fields) in per_conductor.iter().take_while(|(f, _)| *f <= CROSS_CHECK_CONDUCTOR) {
        let direct = fields_by_enumeration(f, ell)?;
        if direct != fields {
            return Err(Error::Assertion(format!("conductor {f}: formula {fields}, enumeration {direct}")));
        }
    }
    Ok(ExtensionCount { ell, bound, count: per_conductor.iter().map(|&(_, c)| c).sum(), per_conductor })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WrightFit {
    pub ell: u64,
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub expected: f64,
    pub points: Vec<(u128, u64)>,
}

/// Two-sided 95% Student t quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
    2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// Least-squares slope of log count against log bound.
pub fn wright_fit(ell: u64, grid: &[u128]) -> Result<WrightFit> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("grid needs at least three increasing bounds");
    }
    if (grid[grid.len() - 1] as f64 / grid[0] as f64).log10() < 3.0 - 1e-9 {
        return invalid("grid must span at least three decades");
    }
    let largest = count_cyclic_fields(ell, grid[grid.len() - 1])?;
    let points: Vec<(u128, u64)> = grid
        .iter()
        .map(|&x| {
            let c = largest
                .per_conductor
                .iter()
                .filter(|(f, _)| (*f as u128).pow((ell - 1) as u32) < x)
                .map(|&(_, c)| c)
                .sum();
            (x, c)
        })
        .collect();
    if points.iter().any(|&(_, c)| c == 0) {
        return invalid("grid starts below the smallest discriminant");
    }
    let xs: Vec<f64> = points.iter().map(|&(x, _)| (x as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let df = xs.len() - 2;
    let std_error = (rss / df as f64 / sxx).sqrt();
    let t = T975[(df - 1).min(29)];
    Ok(WrightFit {
        ell,
        slope,
        intercept,
        std_error,
        ci_low: slope - t * std_error,
        ci_high: slope + t * std_error,
        expected: 1.0 / (ell - 1) as f64,
        points,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedCount {
    pub bound: u64,
    pub value: u128,
    pub silent_primes: usize,
}

/// Sum over squarefree a < bound built from Q_0 primes outside `exclude` of (ell - 1)^omega(a).
pub fn weighted_count(params: &StabilityParams, bound: u64, exclude: &BTreeSet<u64>) -> Result<WeightedCount> {
    let q0 = silent_primes(params, bound, exclude)?;
    Ok(WeightedCount { bound, value: weighted_sum(&q0, params.ell - 1, bound), silent_primes: q0.len() })
}

/// Coefficient sieve for prod_q (1 + w q^-s) truncated below `bound`.
pub fn weighted_sum(primes: &[u64], weight: u64, bound: u64) -> u128 {
    if bound <= 1 {
        return 0;
    }
    let mut coef = vec![0u128; bound as usize];
    coef[1] = 1;
    for &q in primes {
        let q = q as usize;
        if q >= bound as usize {
            continue;
        }
        for m in (1..=(bound as usize - 1) / q).rev() {
            if coef[m] != 0 {
                coef[m * q] += weight as u128 * coef[m];
            }
        }
    }
    coef.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_conductors() {
        assert_eq!(characters_of_order(7, 3, 1).unwrap().len(), 2);
        assert!(characters_of_order(5, 3, 1).unwrap().is_empty());
        assert_eq!(characters_of_order(9, 3, 1).unwrap().len(), 2);
        assert!(characters_of_order(3, 3, 1).unwrap().is_empty());
        assert!(characters_of_order(27, 3, 1).unwrap().is_empty());
        assert_eq!(characters_of_order(27, 3, 2).unwrap().len(), 6);
        assert_eq!(characters_of_order(63, 3, 1).unwrap().len(), 4);
        assert_eq!(characters_of_order(19, 3, 2).unwrap().len(), 6);
    }

    #[test]
    fn characters_are_multiplicative_and_primitive() {
        for f in [7u64, 9, 13, 63, 91, 117, 171] {
            for chi in characters_of_order(f, 3, 1).unwrap() {
                let t = chi.value_table();
                assert_eq!(chi.conductor(), f);
                for a in 0..f {
                    for b in 0..f {
                        if let (Some(x), Some(y)) = (t[a as usize], t[b as usize]) {
                            assert_eq!(t[(a * b % f) as usize], Some((x + y) % 3));
                        }
                    }
                }
                // primitive: not constant on a residue class mod any proper divisor
                for d in (1..f).filter(|d| f % d == 0) {
                    let induced = (0..f).all(|a| (0..f).all(|b| {
                        a % d != b % d || t[a as usize].is_none() || t[b as usize].is_none() || t[a as usize] == t[b as usize]
                    }));
                    assert!(!induced, "chi mod {f} factors through {d}");
                }
                assert_eq!(t.iter().flatten().count() as u64, (1..f).filter(|a| a.gcd(&f) == 1).count() as u64);
            }
        }
    }

    #[test]
    fn value_exponent_matches_table() {
        let chi = &characters_of_order(91 * 9, 3, 1).unwrap()[3];
        let t = chi.value_table();
        for a in 0..chi.modulus() {
            assert_eq!(chi.value_exponent(a), t[a as usize]);
        }
    }

    #[test]
    fn s_ramified_examples() {
        let none = RamificationSpec::default();
        // 3 generates (Z/7)^x, so no cubic character mod 7 kills it.
        for chi in characters_of_order(7, 3, 1).unwrap() {
            assert_ne!(chi.value_exponent(3), Some(0));
        }
        assert!(matches!(build_s_ramified_character(&[7], &[3], 3, 1, &none), Err(Error::NotFound(_))));
        let chi = build_s_ramified_character(&[7, 13], &[], 3, 1, &none).unwrap();
        assert_eq!(chi.conductor(), 91);
        assert_eq!(chi.order(), 3);
        // 2 has order 5 mod 31
        assert_eq!(crate::arith::mult_order(2, 31, 30), 5);
        assert!(build_s_ramified_character(&[31], &[2], 5, 1, &none).is_err());
        assert!(build_s_ramified_character(&[7], &[7], 3, 1, &none).is_err());
        assert!(build_s_ramified_character(&[11], &[], 3, 1, &none).is_err());
    }

    #[test]
    fn counts_and_discriminants() {
        assert_eq!(count_cyclic_fields(3, 50).unwrap().count, 1);
        assert_eq!(count_cyclic_fields(3, 82).unwrap().count, 2);
        assert_eq!(count_cyclic_fields(3, 49).unwrap().count, 0);
        let c = count_cyclic_fields(3, 100_000).unwrap();
        let f91 = c.per_conductor.iter().find(|&&(f, _)| f == 91).unwrap();
        assert_eq!(f91.1, 2);
        assert_eq!(fields_by_enumeration(91, 3).unwrap(), 2);
        for f in [7u64, 9, 91, 63, 133] {
            for chi in characters_of_order(f, 3, 1).unwrap() {
                assert_eq!(discriminant_of(&chi), BigUint::from(f * f));
            }
        }
        assert!(count_cyclic_fields(3, MAX_FIELD_COUNT_BOUND + 1).is_err());
    }

    #[test]
    fn weighted_sum_small() {
        assert_eq!(weighted_sum(&[7, 13], 2, 7), 1);
        assert_eq!(weighted_sum(&[7, 13], 2, 8), 3);
        assert_eq!(weighted_sum(&[7, 13], 2, 92), 1 + 2 + 2 + 4);
    }

    #[test]
    fn wright_grid_errors() {
        assert!(wright_fit(3, &[1000, 10_000]).is_err());
        assert!(wright_fit(3, &[1000, 5000, 10_000]).is_err());
    }
}
