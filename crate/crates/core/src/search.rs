//! First x = (a + b sqrt d) / c, in order of increasing max(|a|, |b|, c) then (a, b, c),
//! at which an integer polynomial takes a square value in Q(sqrt d).
//!
//! Candidates are screened in 64-wide words by periodic residue masks; a value that is
//! a square in the field must be a square in every residue field, and its norm must be
//! an integer square. Survivors are confirmed exactly.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, is_squarefree, sqrt_mod};
use crate::error::{invalid, Error, Result};
use crate::quadfield::{sqrt_in_quadratic_field, ElementRecord, QuadraticFieldElement};

pub const MAX_SEARCH_HEIGHT: i64 = 10_000;
const PRIME_MODULI: [u64; 17] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61];
const POWER_MODULI: [u64; 5] = [16, 9, 27, 25, 49];
/// Up to this height the smaller prime moduli (<= 31) suffice.
const SMALL_MODULI_HEIGHT: i64 = 256;

#[derive(Clone, Debug)]
pub struct SearchHit {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub x: QuadraticFieldElement,
    pub y: QuadraticFieldElement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HitRecord {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub x: ElementRecord,
    pub y: ElementRecord,
}

impl From<&SearchHit> for HitRecord {
    fn from(h: &SearchHit) -> Self {
        Self { a: h.a, b: h.b, c: h.c, x: (&h.x).into(), y: (&h.y).into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Test {
    /// both images U +- V r must be squares mod p
    Split(u64),
    /// the norm must be a square mod m
    Norm,
    /// U must be a square mod p (p | d)
    Ramified,
}

struct ModFilter {
    m: u64,
    /// pattern id for (fixed-coordinate residue, c residue), bits over the free coordinate
    key_a: Vec<u16>,
    key_b: Vec<u16>,
    /// words[pid * m + phase]: bit i set iff the pattern admits (phase + i) mod m
    words: Vec<u64>,
    pass_rate: f64,
}

fn squares_mod(m: u64) -> Vec<bool> {
    let mut s = vec![false; m as usize];
    for x in 0..m {
        s[(x * x % m) as usize] = true;
    }
    s
}

/// Homogenized value sum q_i z^i c^(w - i) in Z[sqrt d] / m, z = a + b sqrt d.
fn homog_mod(q: &[u64], weight: usize, md: u64, a: u64, b: u64, c: u64, m: u64) -> (u64, u64) {
    let mut zp = [(1u64, 0u64); 5];
    let mut cp = [1u64; 5];
    for i in 1..=weight {
        let (x0, x1) = zp[i - 1];
        zp[i] = ((x0 * a + md * (x1 * b % m)) % m, (x0 * b + x1 * a) % m);
        cp[i] = cp[i - 1] * c % m;
    }
    let (mut u, mut v) = (0, 0);
    for (i, &qi) in q.iter().enumerate() {
        let k = qi * cp[weight - i] % m;
        u = (u + k * zp[i].0) % m;
        v = (v + k * zp[i].1) % m;
    }
    (u, v)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

impl ModFilter {
    fn new(q: &[i64], weight: usize, d: i64, m: u64) -> Self {
        let sq = squares_mod(m);
        let md = d.rem_euclid(m as i64) as u64;
        let test = if !is_prime(m) {
            Test::Norm
        } else if md == 0 {
            Test::Ramified
        } else {
            match sqrt_mod(md, m) {
                Some(r) => Test::Split(r),
                None => Test::Norm,
            }
        };
        let qm: Vec<u64> = q.iter().map(|&x| x.rem_euclid(m as i64) as u64).collect();
        let ok = |a: u64, b: u64, c: u64| {
            let (u, v) = homog_mod(&qm, weight, md, a, b, c, m);
            match test {
                Test::Split(r) => sq[((u + v * r) % m) as usize] && sq[((u + (m - v) * r) % m) as usize],
                Test::Norm => sq[((u * u + (m - md) * (v * v % m)) % m) as usize],
                Test::Ramified => sq[u as usize],
            }
        };
        let mu = m as usize;
        // table[c][a * m + b]; for unit c the value is that at (a/c, b/c, 1) since the weight is even
        let mut table: Vec<Vec<bool>> = vec![Vec::new(); mu];
        let mut inverse = vec![0u64; mu];
        for c in 0..m {
            if gcd_u64(c, m) == 1 {
                inverse[c as usize] = (1..m).find(|&i| i * c % m == 1).unwrap();
            }
        }
        for c in 0..m {
            if c != 1 && gcd_u64(c, m) == 1 && weight % 2 == 0 {
                continue;
            }
            table[c as usize] = (0..m * m).map(|k| ok(k / m, k % m, c)).collect();
        }
        let lookup = |a: u64, b: u64, c: u64| -> bool {
            let t = &table[c as usize];
            if !t.is_empty() {
                return t[(a * m + b) as usize];
            }
            let ci = inverse[c as usize];
            table[1][((a * ci % m) * m + b * ci % m) as usize]
        };
        let mut ids: HashMap<u64, u16> = HashMap::new();
        let mut patterns: Vec<u64> = Vec::new();
        let mut intern = |pat: u64| -> u16 {
            *ids.entry(pat).or_insert_with(|| {
                patterns.push(pat);
                (patterns.len() - 1) as u16
            })
        };
        let mut key_a = vec![0u16; mu * mu];
        let mut key_b = vec![0u16; mu * mu];
        let mut passed = 0u64;
        for fixed in 0..m {
            for c in 0..m {
                let pa = (0..m).filter(|&a| lookup(a, fixed, c)).fold(0u64, |p, a| p | 1 << a);
                let pb = (0..m).filter(|&b| lookup(fixed, b, c)).fold(0u64, |p, b| p | 1 << b);
                passed += pa.count_ones() as u64;
                key_a[(fixed * m + c) as usize] = intern(pa);
                key_b[(fixed * m + c) as usize] = intern(pb);
            }
        }
        let mut words = Vec::with_capacity(patterns.len() * mu);
        for &pat in &patterns {
            // the pattern repeated to 192 bits, so any 64-bit window can be read off
            let mut rep = [0u64; 3];
            let mut pos = 0u64;
            while pos < 192 {
                for i in 0..m.min(192 - pos) {
                    if pat >> i & 1 == 1 {
                        rep[((pos + i) / 64) as usize] |= 1 << ((pos + i) % 64);
                    }
                }
                pos += m;
            }
            for phase in 0..m {
                let (w, o) = ((phase / 64) as usize, phase % 64);
                let word = if o == 0 { rep[w] } else { rep[w] >> o | rep[w + 1] << (64 - o) };
                words.push(word);
            }
        }
        Self { m, key_a, key_b, words, pass_rate: passed as f64 / (m * m * m) as f64 }
    }
}

/// Polynomial square-value search over Q(sqrt d).
pub struct SquareSearch {
    coeffs: Vec<i64>,
    weight: usize,
    d: i64,
    even: bool,
    height: i64,
    filters: Vec<ModFilter>,
    /// residues[f][v + height] = v mod m_f
    residues: Vec<Vec<u8>>,
}

/// Which coordinate runs along a row.
#[derive(Clone, Copy)]
enum Free {
    A { b: i64 },
    B { a: i64 },
}

impl SquareSearch {
    /// `coeffs` in ascending degree order, degree at most 4; moduli sized for heights up to `height`.
    pub fn new(coeffs: &[i64], d: i64, height: i64) -> Result<Self> {
        if d == 0 || d == 1 || !is_squarefree(d) {
            return invalid(format!("d = {d} must be squarefree and not 0 or 1"));
        }
        if !(1..=MAX_SEARCH_HEIGHT).contains(&height) {
            return invalid(format!("height must lie in 1..={MAX_SEARCH_HEIGHT}"));
        }
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.len() > 5 {
            return invalid("polynomial must be nonzero of degree at most 4");
        }
        let deg = coeffs.len() - 1;
        let weight = deg + deg % 2;
        let even = coeffs.iter().skip(1).step_by(2).all(|&c| c == 0);
        let max_prime = if height <= SMALL_MODULI_HEIGHT { 31 } else { 61 };
        let mut filters: Vec<ModFilter> = PRIME_MODULI
            .iter()
            .filter(|&&p| p <= max_prime)
            .chain(&POWER_MODULI)
            .map(|&m| ModFilter::new(&coeffs, weight, d, m))
            .collect();
        filters.sort_by(|x, y| x.pass_rate.total_cmp(&y.pass_rate));
        let residues = filters.iter().map(|f| (-height..=height).map(|v| v.rem_euclid(f.m as i64) as u8).collect()).collect();
        Ok(Self { coeffs, weight, d, even, height, filters, residues })
    }

    /// Collects every candidate of a row that passes the filters and the exact test.
    fn scan_row(&self, free: Free, c: i64, lo: i64, hi: i64, out: &mut Vec<(i64, i64, i64)>) {
        // per filter: (pattern word base, current phase, modulus, 64 mod m)
        let mut state = [(0usize, 0usize, 0usize, 0usize); PRIME_MODULI.len() + POWER_MODULI.len()];
        let state = &mut state[..self.filters.len()];
        let h = self.height;
        for ((f, r), st) in self.filters.iter().zip(&self.residues).zip(state.iter_mut()) {
            let m = f.m as usize;
            let cm = r[(c + h) as usize] as usize;
            let pid = match free {
                Free::A { b } => f.key_a[r[(b + h) as usize] as usize * m + cm],
                Free::B { a } => f.key_b[r[(a + h) as usize] as usize * m + cm],
            } as usize;
            *st = (pid * m, r[(lo + h) as usize] as usize, m, 64 % m);
        }
        let mut t0 = lo;
        while t0 <= hi {
            let mut word = if hi - t0 >= 63 { u64::MAX } else { (1u64 << (hi - t0 + 1)) - 1 };
            for (f, st) in self.filters.iter().zip(state.iter()) {
                word &= f.words[st.0 + st.1];
                if word == 0 {
                    break;
                }
            }
            while word != 0 {
                let i = word.trailing_zeros() as i64;
                word &= word - 1;
                let (a, b) = match free {
                    Free::A { b } => (t0 + i, b),
                    Free::B { a } => (a, t0 + i),
                };
                if self.is_square_value(a, b, c) {
                    out.push((a, b, c));
                }
            }
            for st in state.iter_mut() {
                st.1 += st.3;
                if st.1 >= st.2 {
                    st.1 -= st.2;
                }
            }
            t0 += 64;
        }
    }

    /// True when d > 0 and the polynomial is negative on all of R, so no value is totally positive.
    fn negative_on_reals(&self) -> bool {
        if self.d < 0 {
            return false;
        }
        match self.coeffs.as_slice() {
            [q0] => *q0 < 0,
            [q0, q1, q2] => {
                let (q0, q1, q2) = (*q0 as i128, *q1 as i128, *q2 as i128);
                q2 < 0 && q1 * q1 - 4 * q0 * q2 < 0
            }
            _ => false,
        }
    }

    /// (U, V) with c^w q((a + b sqrt d) / c) = U + V sqrt d, in i128 when it fits.
    fn homog_i128(&self, a: i64, b: i64, c: i64) -> Option<(i128, i128)> {
        let d = self.d as i128;
        let (a, b, c) = (a as i128, b as i128, c as i128);
        let (mut zu, mut zv) = (1i128, 0i128);
        let (mut u, mut v) = (0i128, 0i128);
        for (i, &qi) in self.coeffs.iter().enumerate() {
            let k = (qi as i128).checked_mul(c.checked_pow((self.weight - i) as u32)?)?;
            u = u.checked_add(k.checked_mul(zu)?)?;
            v = v.checked_add(k.checked_mul(zv)?)?;
            let nu = zu.checked_mul(a)?.checked_add(d.checked_mul(zv)?.checked_mul(b)?)?;
            let nv = zu.checked_mul(b)?.checked_add(zv.checked_mul(a)?)?;
            zu = nu;
            zv = nv;
        }
        Some((u, v))
    }

    fn homog_big(&self, a: i64, b: i64, c: i64) -> (BigInt, BigInt) {
        let d = BigInt::from(self.d);
        let (ba, bb, bc) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
        let (mut zu, mut zv) = (BigInt::from(1), BigInt::zero());
        let (mut u, mut v) = (BigInt::zero(), BigInt::zero());
        for (i, &qi) in self.coeffs.iter().enumerate() {
            let k = BigInt::from(qi) * bc.pow((self.weight - i) as u32);
            u += &k * &zu;
            v += &k * &zv;
            let nu = &zu * &ba + &d * &zv * &bb;
            let nv = &zu * &bb + &zv * &ba;
            zu = nu;
            zv = nv;
        }
        (u, v)
    }

    /// Norm is an integer square and the value is totally nonnegative; then confirmed exactly.
    fn is_square_value(&self, a: i64, b: i64, c: i64) -> bool {
        if c <= 0 || a.gcd(&b).gcd(&c) != 1 {
            return false;
        }
        if let Some((u, v)) = self.homog_i128(a, b, c) {
            let norm = u
                .checked_mul(u)
                .and_then(|uu| v.checked_mul(v).and_then(|vv| vv.checked_mul(self.d as i128)).and_then(|dvv| uu.checked_sub(dvv)));
            if let Some(n) = norm {
                if n < 0 || !crate::arith::is_square_i128(n) || (self.d > 0 && u < 0) {
                    return false;
                }
            }
        }
        self.confirm(a, b, c).is_some()
    }

    /// Exact test at x = (a + b sqrt d) / c.
    pub fn confirm(&self, a: i64, b: i64, c: i64) -> Option<SearchHit> {
        if c <= 0 || a.gcd(&b).gcd(&c) != 1 {
            return None;
        }
        let (u, v) = self.homog_big(a, b, c);
        let norm = &u * &u - BigInt::from(self.d) * &v * &v;
        if norm.is_negative() || norm.sqrt().pow(2) != norm {
            return None;
        }
        if self.d > 0 && u.is_negative() {
            return None;
        }
        let w = QuadraticFieldElement { d: self.d, u: BigRational::from_integer(u), v: BigRational::from_integer(v) };
        let root = sqrt_in_quadratic_field(&w)?;
        let bc = BigInt::from(c);
        let denom = BigRational::from_integer(bc.pow((self.weight / 2) as u32));
        let x = QuadraticFieldElement {
            d: self.d,
            u: BigRational::new(BigInt::from(a), bc.clone()),
            v: BigRational::new(BigInt::from(b), bc),
        };
        let y = root.scale(&(BigRational::from_integer(1.into()) / denom));
        debug_assert_eq!(y.square(), QuadraticFieldElement::eval_poly(&self.coeffs, &x));
        Some(SearchHit { a, b, c, x, y })
    }

    /// Least hit with max(|a|, |b|, c) = m. Conjugation (b -> -b) preserves squares, and so
    /// does a -> -a for even polynomials, so only one half (or quarter) is scanned and
    /// hits are mirrored back before taking the minimum.
    fn shell(&self, m: i64) -> Option<(i64, i64, i64)> {
        let mut hits = Vec::new();
        let a_lo = if self.even { 0 } else { -m };
        for b in 0..=m {
            self.scan_row(Free::A { b }, m, a_lo, m, &mut hits);
        }
        for c in 1..m {
            self.scan_row(Free::A { b: m }, c, a_lo, m, &mut hits);
            self.scan_row(Free::B { a: m }, c, 0, m - 1, &mut hits);
            if !self.even {
                self.scan_row(Free::B { a: -m }, c, 0, m - 1, &mut hits);
            }
        }
        hits.into_iter()
            .flat_map(|(a, b, c)| {
                let mut v = vec![(a, b, c), (a, -b, c)];
                if self.even {
                    v.extend([(-a, b, c), (-a, -b, c)]);
                }
                v
            })
            .min()
    }

    /// First hit in enumeration order with max(|a|, |b|, c) <= height.
    pub fn first_hit(&self, height: i64) -> Result<Option<SearchHit>> {
        if !(1..=self.height).contains(&height) {
            return invalid(format!("height must lie in 1..={}", self.height));
        }
        if self.negative_on_reals() {
            return Ok(None);
        }
        for m in 1..=height {
            if let Some((a, b, c)) = self.shell(m) {
                let hit = self.confirm(a, b, c).ok_or_else(|| Error::Assertion(format!("mirrored hit ({a}, {b}, {c}) fails")))?;
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    /// Unfiltered exhaustive search in the same order; for testing the sieve.
    pub fn first_hit_naive(&self, height: i64) -> Option<SearchHit> {
        for m in 1..=height {
            for a in -m..=m {
                for b in -m..=m {
                    for c in 1..=m {
                        if a.abs().max(b.abs()).max(c) == m {
                            if let Some(h) = self.confirm(a, b, c) {
                                return Some(h);
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_matches_naive() {
        let polys: [&[i64]; 4] = [&[-7, -68, -142, 112, -19], &[-3, 0, 2], &[5, 1, 0, 0, 1], &[-6, 0, -1]];
        for q in polys {
            for d in [-5i64, -1, 2, 3, 17, 41] {
                let s = SquareSearch::new(q, d, 8).unwrap();
                let fast = s.first_hit(8).unwrap().map(|h| (h.a, h.b, h.c));
                let slow = s.first_hit_naive(8).map(|h| (h.a, h.b, h.c));
                assert_eq!(fast, slow, "q={q:?} d={d}");
            }
        }
    }

    #[test]
    fn hit_satisfies_equation() {
        let s = SquareSearch::new(&[-2, 0, 1], 2, 3).unwrap();
        let h = s.first_hit(3).unwrap().unwrap();
        assert_eq!(h.y.square(), QuadraticFieldElement::eval_poly(&[-2, 0, 1], &h.x));
    }
}
