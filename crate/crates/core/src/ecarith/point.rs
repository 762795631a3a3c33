use rand::Rng;

use crate::arith::{inv_mod, jacobi, mul_mod, sqrt_mod};

use super::curve::EllipticCurve;

/// A point of E(F_p) on the long Weierstrass model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReducedPoint {
    Infinity,
    Affine(u64, u64),
}

/// The reduction of a Weierstrass model modulo a prime `p`.
#[derive(Clone, Copy, Debug)]
pub struct CurveModP {
    pub p: u64,
    a1: u64,
    a2: u64,
    a3: u64,
    a4: u64,
    a6: u64,
}

impl CurveModP {
    pub fn new(curve: &EllipticCurve, p: u64) -> Self {
        let [a1, a2, a3, a4, a6] = curve.coeffs_mod(p);
        Self { p, a1, a2, a3, a4, a6 }
    }

    #[inline]
    fn add_m(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub_m(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn mul_m(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    /// Right-hand side minus left-hand side, zero exactly on the curve.
    pub fn equation(&self, x: u64, y: u64) -> u64 {
        let lhs = self.add_m(self.mul_m(y, y), self.mul_m(y, self.add_m(self.mul_m(self.a1, x), self.a3)));
        self.sub_m(self.rhs(x), lhs)
    }

    /// x^3 + a2 x^2 + a4 x + a6.
    pub fn rhs(&self, x: u64) -> u64 {
        let x2 = self.mul_m(x, x);
        let t = self.add_m(self.mul_m(x2, self.add_m(x, self.a2)), self.mul_m(self.a4, x));
        self.add_m(t, self.a6)
    }

    /// (2y + a1 x + a3)^2 as a function of x: 4x^3 + b2 x^2 + 2 b4 x + b6.
    pub fn two_torsion_poly(&self, x: u64) -> u64 {
        let l = self.add_m(self.mul_m(self.a1, x), self.a3);
        self.add_m(self.mul_m(l, l), self.mul_m(4 % self.p, self.rhs(x)))
    }

    pub fn is_on_curve(&self, pt: ReducedPoint) -> bool {
        match pt {
            ReducedPoint::Infinity => true,
            ReducedPoint::Affine(x, y) => self.equation(x, y) == 0,
        }
    }

    pub fn neg(&self, pt: ReducedPoint) -> ReducedPoint {
        match pt {
            ReducedPoint::Infinity => pt,
            ReducedPoint::Affine(x, y) => {
                let t = self.add_m(self.add_m(y, self.mul_m(self.a1, x)), self.a3);
                ReducedPoint::Affine(x, self.sub_m(0, t))
            }
        }
    }

    pub fn add(&self, p1: ReducedPoint, p2: ReducedPoint) -> ReducedPoint {
        use ReducedPoint::*;
        let (x1, y1, x2, y2) = match (p1, p2) {
            (Infinity, q) | (q, Infinity) => return q,
            (Affine(x1, y1), Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            let denom = self.add_m(self.add_m(self.mul_m(2, y1), self.mul_m(self.a1, x1)), self.a3);
            if y1 != y2 || denom == 0 {
                return Infinity;
            }
            let num = self.sub_m(
                self.add_m(
                    self.add_m(self.mul_m(3, self.mul_m(x1, x1)), self.mul_m(self.mul_m(2, self.a2), x1)),
                    self.a4,
                ),
                self.mul_m(self.a1, y1),
            );
            self.mul_m(num, inv_mod(denom, self.p).expect("nonzero denominator"))
        } else {
            let inv = inv_mod(self.sub_m(x2, x1), self.p).expect("distinct x");
            self.mul_m(self.sub_m(y2, y1), inv)
        };
        let nu = self.sub_m(y1, self.mul_m(lambda, x1));
        let x3 = self.sub_m(
            self.sub_m(self.sub_m(self.add_m(self.mul_m(lambda, lambda), self.mul_m(self.a1, lambda)), self.a2), x1),
            x2,
        );
        let y3 = self.sub_m(
            self.sub_m(0, self.mul_m(self.add_m(lambda, self.a1), x3)),
            self.add_m(nu, self.a3),
        );
        Affine(x3, y3)
    }

    pub fn mul(&self, k: u64, pt: ReducedPoint) -> ReducedPoint {
        let mut acc = ReducedPoint::Infinity;
        let mut base = pt;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// All points, by enumerating every (x, y); only for tiny p.
    pub fn all_points(&self) -> Vec<ReducedPoint> {
        let mut out = vec![ReducedPoint::Infinity];
        for x in 0..self.p {
            for y in 0..self.p {
                if self.equation(x, y) == 0 {
                    out.push(ReducedPoint::Affine(x, y));
                }
            }
        }
        out
    }

    /// A uniformly random affine point for odd p (rejection on x).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> ReducedPoint {
        assert!(self.p > 2);
        let inv2 = (self.p + 1) / 2;
        loop {
            let x = rng.gen_range(0..self.p);
            let f = self.two_torsion_poly(x);
            if jacobi(f as i128, self.p) == -1 {
                continue;
            }
            let s = sqrt_mod(f, self.p).expect("quadratic residue");
            let s = if rng.gen::<bool>() { s } else { self.sub_m(0, s) };
            let l = self.add_m(self.mul_m(self.a1, x), self.a3);
            let y = self.mul_m(self.sub_m(s, l), inv2);
            let pt = ReducedPoint::Affine(x, y);
            debug_assert!(self.is_on_curve(pt));
            return pt;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_law_closes_on_curve() {
        let e = EllipticCurve::curve_571a1();
        let c = CurveModP::new(&e, 101);
        let pts = c.all_points();
        let n = pts.len() as u64;
        for &a in pts.iter().take(20) {
            assert!(c.is_on_curve(a));
            assert_eq!(c.mul(n, a), ReducedPoint::Infinity);
            assert_eq!(c.add(a, c.neg(a)), ReducedPoint::Infinity);
            for &b in pts.iter().take(20) {
                let s = c.add(a, b);
                assert!(c.is_on_curve(s));
                assert_eq!(s, c.add(b, a));
            }
        }
    }

    #[test]
    fn random_points_lie_on_curve() {
        let e = EllipticCurve::curve_5906();
        let c = CurveModP::new(&e, 10007);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert!(c.is_on_curve(c.random_point(&mut rng)));
        }
    }
}
