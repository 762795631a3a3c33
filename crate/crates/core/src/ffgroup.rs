//! Exact arithmetic over F_ell, small matrix groups, and exhaustive oracles
//! for the fixed-space and lattice-index bounds.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{inv_mod, is_prime, pow_mod};
use crate::error::{invalid, Error, Result};

/// Largest ell for which SL_2(F_ell) is enumerated exhaustively.
pub const SL2_CUTOFF: u64 = 17;
/// Largest ell accepted by the torus fiber count.
pub const TORUS_ELL_CUTOFF: u64 = 13;
/// Largest torus rank accepted by the torus fiber count.
pub const TORUS_RANK_CUTOFF: usize = 4;

/// An `n x n` matrix over F_ell, row-major, `2 <= n <= 4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatrixGF {
    ell: u64,
    n: usize,
    entries: Vec<u64>,
}

impl MatrixGF {
    pub fn new(ell: u64, n: usize, entries: &[i64]) -> Result<Self> {
        if ell < 3 || !is_prime(ell) {
            return invalid(format!("modulus {ell} is not an odd prime"));
        }
        if !(2..=4).contains(&n) {
            return invalid(format!("dimension {n} outside 2..=4"));
        }
        if entries.len() != n * n {
            return invalid(format!("expected {} entries, got {}", n * n, entries.len()));
        }
        let entries = entries
            .iter()
            .map(|&e| e.rem_euclid(ell as i64) as u64)
            .collect();
        Ok(Self { ell, n, entries })
    }

    pub fn from_rows2(ell: u64, rows: [[i64; 2]; 2]) -> Result<Self> {
        Self::new(ell, 2, &[rows[0][0], rows[0][1], rows[1][0], rows[1][1]])
    }

    pub fn identity(ell: u64, n: usize) -> Result<Self> {
        let mut e = vec![0i64; n * n];
        for i in 0..n {
            e[i * n + i] = 1;
        }
        Self::new(ell, n, &e)
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum::<u64>() % self.ell
    }

    pub fn det(&self) -> u64 {
        let (_, det) = row_reduce(self.ell, self.n, self.entries.clone());
        det
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!((self.ell, self.n), (other.ell, other.n));
        let n = self.n;
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: u64 = (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum();
                out[i * n + j] = s % self.ell;
            }
        }
        Self { ell: self.ell, n, entries: out }
    }

    fn minus_identity(&self) -> Vec<u64> {
        let mut e = self.entries.clone();
        for i in 0..self.n {
            let d = &mut e[i * self.n + i];
            *d = (*d + self.ell - 1) % self.ell;
        }
        e
    }
}

/// Gaussian elimination over F_ell; returns (rank, determinant).
fn row_reduce(ell: u64, n: usize, mut a: Vec<u64>) -> (usize, u64) {
    let mut rank = 0;
    let mut det = 1u64;
    for col in 0..n {
        let Some(pivot) = (rank..n).find(|&r| a[r * n + col] != 0) else {
            det = 0;
            continue;
        };
        if pivot != rank {
            for j in 0..n {
                a.swap(pivot * n + j, rank * n + j);
            }
            det = (ell - det) % ell;
        }
        let pv = a[rank * n + col];
        det = det * pv % ell;
        let inv = inv_mod(pv, ell).expect("nonzero pivot in a prime field");
        for r in 0..n {
            if r != rank && a[r * n + col] != 0 {
                let f = a[r * n + col] * inv % ell;
                for j in 0..n {
                    let sub = f * a[rank * n + j] % ell;
                    a[r * n + j] = (a[r * n + j] + ell - sub) % ell;
                }
            }
        }
        rank += 1;
    }
    if rank < n {
        det = 0;
    }
    (rank, det)
}

/// Dimension over F_ell of ker(m - 1).
pub fn fixed_space_dim(m: &MatrixGF) -> usize {
    let (rank, _) = row_reduce(m.ell, m.n, m.minus_identity());
    m.n - rank
}

fn check_sl2_ell(ell: u64) -> Result<()> {
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("{ell} is not an odd prime"));
    }
    if ell > SL2_CUTOFF {
        return Err(Error::CutoffExceeded {
            what: format!("ell = {ell} for SL_2 enumeration"),
            limit: SL2_CUTOFF,
        });
    }
    Ok(())
}

/// Calls `f` on every element of SL_2(F_ell) in lexicographic order of (a, b, c, d).
fn for_each_sl2(ell: u64, mut f: impl FnMut([u64; 4]) -> bool) {
    for a in 0..ell {
        for b in 0..ell {
            for c in 0..ell {
                for d in 0..ell {
                    if (a * d + ell * ell - b * c) % ell == 1 && !f([a, b, c, d]) {
                        return;
                    }
                }
            }
        }
    }
}

pub fn sl2_order(ell: u64) -> u64 {
    ell * (ell * ell - 1)
}

/// Number of elements of SL_2(F_ell) with a nonzero fixed vector, by exhaustive enumeration.
pub fn count_sl2_with_fixed_points(ell: u64) -> Result<u64> {
    check_sl2_ell(ell)?;
    let mut count = 0;
    for_each_sl2(ell, |[a, b, c, d]| {
        let m = MatrixGF { ell, n: 2, entries: vec![a, b, c, d] };
        if fixed_space_dim(&m) >= 1 {
            count += 1;
        }
        true
    });
    Ok(count)
}

/// Proportion of SL_2(F_ell) acting without nonzero fixed points.
///
/// Within the enumeration cutoff the count comes from [`count_sl2_with_fixed_points`];
/// above it the closed-form count `ell^2` is used.
pub fn delta_theoretical(ell: u64) -> Result<Ratio<u64>> {
    if ell < 3 || !is_prime(ell) {
        return invalid(format!("{ell} is not an odd prime"));
    }
    let with_fixed = if ell <= SL2_CUTOFF {
        count_sl2_with_fixed_points(ell)?
    } else {
        ell * ell
    };
    Ok(Ratio::from_integer(1) - Ratio::new(with_fixed, sl2_order(ell)))
}

/// `1 - ell/(ell^2 - 1)`.
pub fn delta_closed_form(ell: u64) -> Ratio<u64> {
    Ratio::from_integer(1) - Ratio::new(ell, ell * ell - 1)
}

/// An element of SL_2(F_ell) whose fixed space has dimension `target_dim`.
pub fn find_tau(ell: u64, target_dim: usize) -> Result<MatrixGF> {
    check_sl2_ell(ell)?;
    match target_dim {
        1 => return MatrixGF::from_rows2(ell, [[1, 1], [0, 1]]),
        2 => return MatrixGF::identity(ell, 2),
        0 => {}
        _ => return invalid(format!("target dimension {target_dim} not in 0..=2")),
    }
    let mut found = None;
    for_each_sl2(ell, |e| {
        let m = MatrixGF { ell, n: 2, entries: e.to_vec() };
        if fixed_space_dim(&m) == 0 {
            found = Some(m);
            false
        } else {
            true
        }
    });
    found.ok_or_else(|| Error::Assertion(format!("no fixed-point-free element in SL_2(F_{ell})")))
}

/// A k-bounded linearly independent set S spanning Y, and a basis of an overgroup Z of Y.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeInstance {
    pub rank: usize,
    pub basis_s: Vec<Vec<i64>>,
    pub k: i64,
    pub z_basis: Vec<Vec<i64>>,
}

fn rational_matrix(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect()
}

/// Reduced row echelon form over Q; returns the rank.
fn rref(m: &mut [Vec<BigRational>]) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        let inv = m[rank][col].recip();
        for x in m[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let sub = &f * &m[rank][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det = &det * &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let sub = &f * &m[col][c];
                m[r][c] = &m[r][c] - sub;
            }
        }
    }
    det
}

pub fn factorial(r: usize) -> u64 {
    (1..=r as u64).product()
}

impl LatticeInstance {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.basis_s.len() != self.rank || self.z_basis.len() != self.rank {
            return invalid("S and the Z basis must both have `rank` vectors");
        }
        let width = self.basis_s[0].len();
        if width < self.rank
            || self.basis_s.iter().chain(&self.z_basis).any(|v| v.len() != width)
        {
            return invalid("vectors must share an ambient dimension >= rank");
        }
        if self.k < 1 || self.basis_s.iter().flatten().any(|x| x.abs() > self.k) {
            return invalid(format!("S is not {}-bounded", self.k));
        }
        if rref(&mut rational_matrix(&self.basis_s)) != self.rank {
            return invalid("S is not linearly independent");
        }
        Ok(())
    }

    /// r! k^r.
    pub fn bound(&self) -> u64 {
        factorial(self.rank) * (self.k as u64).pow(self.rank as u32)
    }
}

/// [Z : Y] as |det N| where N expresses S in terms of the Z basis; checked against r! k^r.
pub fn lattice_index(inst: &LatticeInstance) -> Result<u64> {
    inst.validate()?;
    let r = inst.rank;
    let width = inst.basis_s[0].len();
    // Solve N * M_Z = M_Y by row-reducing [M_Z^T | M_Y^T].
    let mut aug: Vec<Vec<BigRational>> = (0..width)
        .map(|c| {
            let mut row: Vec<BigRational> = inst
                .z_basis
                .iter()
                .map(|z| BigRational::from_integer(BigInt::from(z[c])))
                .collect();
            row.extend(inst.basis_s.iter().map(|s| BigRational::from_integer(BigInt::from(s[c]))));
            row
        })
        .collect();
    let rank = rref(&mut aug);
    if rank != r || aug.iter().take(rank).any(|row| row[..r].iter().all(Zero::is_zero)) {
        return invalid("Z basis is degenerate or S is not in span(Z)");
    }
    if aug[rank..].iter().any(|row| row.iter().any(|x| !x.is_zero())) {
        return invalid("S is not contained in span(Z)");
    }
    // Row i of the reduced system gives coordinate i of every s_j.
    let mut n = vec![vec![BigRational::zero(); r]; r];
    for i in 0..r {
        for j in 0..r {
            n[j][i] = aug[i][r + j].clone();
        }
    }
    if n.iter().flatten().any(|x| !x.is_integer()) {
        return invalid("Y is not a sublattice of Z");
    }
    let det = det_rational(n).abs();
    if det.is_zero() {
        return invalid("index is infinite");
    }
    let index = det
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("index does not fit in u64".into()))?;
    if index > inst.bound() {
        return Err(Error::Assertion(format!(
            "[Z:Y] = {index} exceeds r! k^r = {}",
            inst.bound()
        )));
    }
    Ok(index)
}

/// Two k-bounded characters of an r-dimensional split torus over F_ell, and targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusCharacterPair {
    pub ell: u64,
    pub r: usize,
    pub chi1: Vec<i64>,
    pub chi2: Vec<i64>,
    pub k: i64,
    pub a1: u64,
    pub a2: u64,
}

impl TorusCharacterPair {
    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.ell) {
            return invalid(format!("{} is not prime", self.ell));
        }
        if self.ell > TORUS_ELL_CUTOFF {
            return Err(Error::CutoffExceeded { what: format!("ell = {}", self.ell), limit: TORUS_ELL_CUTOFF });
        }
        if self.r > TORUS_RANK_CUTOFF {
            return Err(Error::CutoffExceeded {
                what: format!("torus rank {}", self.r),
                limit: TORUS_RANK_CUTOFF as u64,
            });
        }
        if self.chi1.len() != self.r || self.chi2.len() != self.r {
            return invalid("character vectors must have length r");
        }
        if self.chi1.iter().chain(&self.chi2).any(|x| x.abs() > self.k) {
            return invalid(format!("characters are not {}-bounded", self.k));
        }
        let has_minor = (0..self.r).any(|i| {
            (i + 1..self.r).any(|j| self.chi1[i] * self.chi2[j] - self.chi1[j] * self.chi2[i] != 0)
        });
        if !has_minor {
            return invalid("characters do not generate a rank-2 subgroup");
        }
        if self.a1 % self.ell == 0 || self.a2 % self.ell == 0 {
            return invalid("targets must be units");
        }
        Ok(())
    }

    /// 2 k^2 (ell - 1)^(r - 2).
    pub fn bound(&self) -> u64 {
        2 * (self.k as u64).pow(2) * (self.ell - 1).pow(self.r as u32 - 2)
    }
}

fn eval_character(t: &[u64], chi: &[i64], ell: u64) -> u64 {
    t.iter().zip(chi).fold(1u64, |acc, (&ti, &e)| {
        let p = pow_mod(ti, e.rem_euclid(ell as i64 - 1) as u64, ell);
        acc * p % ell
    })
}

/// Number of t in (F_ell^x)^r with chi1(t) = a1 and chi2(t) = a2, by enumeration.
pub fn torus_fiber_count(tp: &TorusCharacterPair) -> Result<u64> {
    tp.validate()?;
    let ell = tp.ell;
    let (a1, a2) = (tp.a1 % ell, tp.a2 % ell);
    let mut t = vec![1u64; tp.r];
    let mut count = 0u64;
    loop {
        if eval_character(&t, &tp.chi1, ell) == a1 && eval_character(&t, &tp.chi2, ell) == a2 {
            count += 1;
        }
        // odometer over 1..ell
        let mut i = 0;
        loop {
            if i == tp.r {
                if count > tp.bound() {
                    return Err(Error::Assertion(format!(
                        "fiber count {count} exceeds 2k^2(ell-1)^(r-2) = {}",
                        tp.bound()
                    )));
                }
                return Ok(count);
            }
            t[i] += 1;
            if t[i] < ell {
                break;
            }
            t[i] = 1;
            i += 1;
        }
    }
}
