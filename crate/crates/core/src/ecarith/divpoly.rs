use crate::arith::{inv_mod, mul_mod, reduce};

use super::curve::{EllipticCurve, Invariants};

/// Dense polynomial over F_p, coefficients low degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyModP {
    p: u64,
    c: Vec<u64>,
}

impl PolyModP {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut out = Self { p, c: coeffs.into_iter().map(|x| x % p).collect() };
        out.trim();
        out
    }

    pub fn from_i128(p: u64, coeffs: &[i128]) -> Self {
        Self::new(p, coeffs.iter().map(|&x| reduce(x, p)).collect())
    }

    pub fn zero(p: u64) -> Self {
        Self { p, c: Vec::new() }
    }

    pub fn constant(p: u64, a: u64) -> Self {
        Self::new(p, vec![a])
    }

    /// The monomial x.
    pub fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial at `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn leading(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &a| (mul_mod(acc, x, self.p) + a) % self.p)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| (self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        Self::new(self.p, v)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| (self.c.get(i).copied().unwrap_or(0) + self.p - o.c.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        Self::new(self.p, v)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut v = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                v[i + j] = (v[i + j] + mul_mod(a, b, self.p)) % self.p;
            }
        }
        Self::new(self.p, v)
    }

    pub fn scale(&self, a: u64) -> Self {
        Self::new(self.p, self.c.iter().map(|&x| mul_mod(x, a, self.p)).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(self.p, 1), |acc, _| acc.mul(self))
    }

    /// Remainder modulo `m` (nonzero).
    pub fn rem(&self, m: &Self) -> Self {
        let dm = m.degree().expect("division by the zero polynomial");
        let inv = inv_mod(m.leading(), self.p).expect("prime field");
        let mut r = self.c.clone();
        while r.len() > dm {
            let lead = *r.last().expect("nonempty");
            if lead != 0 {
                let f = mul_mod(lead, inv, self.p);
                let shift = r.len() - 1 - dm;
                for (i, &b) in m.c.iter().enumerate() {
                    let idx = shift + i;
                    r[idx] = (r[idx] + self.p - mul_mod(f, b, self.p)) % self.p;
                }
            }
            r.pop();
        }
        Self::new(self.p, r)
    }

    pub fn monic(&self) -> Self {
        match inv_mod(self.leading(), self.p) {
            Some(inv) if !self.is_zero() => self.scale(inv),
            _ => self.clone(),
        }
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// self^e mod m.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Self {
        let mut acc = Self::constant(self.p, 1).rem(m);
        let mut base = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }
}

/// The odd-index division polynomial psi_n of the long Weierstrass model, reduced mod p.
///
/// Uses the reduced sequence f_n = psi_n (n odd), psi_n / psi_2 (n even), which
/// lives in Z[x] for every n.
pub fn division_polynomial_mod_p(curve: &EllipticCurve, n: usize, p: u64) -> PolyModP {
    assert!(n % 2 == 1, "odd index only");
    let inv = Invariants::of(&curve.coeffs());
    let Invariants { b2, b4, b6, b8, .. } = inv;
    let poly = |c: &[i128]| PolyModP::from_i128(p, c);
    // F = psi_2^2
    let f2 = poly(&[b6, 2 * b4, b2, 4]);
    let f2sq = f2.mul(&f2);
    let mut f: Vec<PolyModP> = vec![
        PolyModP::zero(p),
        poly(&[1]),
        poly(&[1]),
        poly(&[b8, 3 * b6, 3 * b4, b2, 3]),
        poly(&[b4 * b8 - b6 * b6, b2 * b8 - b4 * b6, 10 * b8, 10 * b6, 5 * b4, b2, 2]),
    ];
    for k in 5..=n {
        let m = k / 2;
        let next = if k % 2 == 1 {
            let a = f[m + 2].mul(&f[m].pow(3));
            let b = f[m - 1].mul(&f[m + 1].pow(3));
            if m % 2 == 0 {
                f2sq.mul(&a).sub(&b)
            } else {
                a.sub(&f2sq.mul(&b))
            }
        } else {
            let a = f[m + 2].mul(&f[m - 1].pow(2));
            let b = f[m - 2].mul(&f[m + 1].pow(2));
            f[m].mul(&a.sub(&b))
        };
        f.push(next);
    }
    f.swap_remove(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecarith::point::{CurveModP, ReducedPoint};

    #[test]
    fn degree_and_leading_coefficient() {
        let e = EllipticCurve::curve_571a1();
        for ell in [3usize, 5, 7] {
            let psi = division_polynomial_mod_p(&e, ell, 1_000_003);
            assert_eq!(psi.degree(), Some((ell * ell - 1) / 2));
            assert_eq!(psi.leading(), ell as u64);
        }
    }

    #[test]
    fn roots_are_torsion_abscissae() {
        let e = EllipticCurve::curve_5906();
        let p = 1009;
        let c = CurveModP::new(&e, p);
        for ell in [3usize, 5, 7] {
            let psi = division_polynomial_mod_p(&e, ell, p);
            for pt in c.all_points() {
                if let ReducedPoint::Affine(x, _) = pt {
                    let is_torsion = c.mul(ell as u64, pt) == ReducedPoint::Infinity;
                    assert_eq!(psi.eval(x) == 0, is_torsion, "ell={ell} x={x}");
                }
            }
        }
    }

    #[test]
    fn poly_gcd_and_powmod() {
        let p = 101;
        let a = PolyModP::new(p, vec![2, 3, 1]); // (x+1)(x+2)
        let b = PolyModP::new(p, vec![3, 4, 1]); // (x+1)(x+3)
        assert_eq!(a.gcd(&b), PolyModP::new(p, vec![1, 1]));
        let m = PolyModP::new(p, vec![1, 0, 1]);
        let x = PolyModP::x(p);
        assert_eq!(x.pow_mod(4, &m), PolyModP::constant(p, 1));
    }
}
