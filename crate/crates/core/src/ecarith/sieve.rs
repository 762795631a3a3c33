use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{primes_up_to, spf_table};
use crate::error::{Error, Result};

use super::count::ap;
use super::curve::EllipticCurve;

pub const CACHE_MAGIC: &[u8; 4] = b"DSAP";
pub const CACHE_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 32 + 8;

/// a_1, ..., a_M of L(E, s).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientTable {
    pub curve_digest: [u8; 32],
    pub bound: u64,
    values: Vec<i64>,
}

impl CoefficientTable {
    /// a_n for `1 <= n <= bound`.
    pub fn get(&self, n: u64) -> i64 {
        assert!(n >= 1 && n <= self.bound, "a_{n} outside the table");
        self.values[n as usize]
    }

    /// Slice indexed by n; index 0 is unused and zero.
    pub fn as_slice(&self) -> &[i64] {
        &self.values
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 8 * self.bound as usize);
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.curve_digest);
        buf.extend_from_slice(&self.bound.to_le_bytes());
        for v in &self.values[1..] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() < HEADER_LEN || &buf[..4] != CACHE_MAGIC {
            return Err(Error::Cache("missing DSAP header".into()));
        }
        let version = u16::from_le_bytes([buf[4], buf[5]]);
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let curve_digest: [u8; 32] = buf[6..38].try_into().expect("32 bytes");
        let bound = u64::from_le_bytes(buf[38..46].try_into().expect("8 bytes"));
        let body = &buf[HEADER_LEN..];
        if body.len() as u64 != 8 * bound {
            return Err(Error::Cache(format!("expected {bound} coefficients, found {} bytes", body.len())));
        }
        let mut values = vec![0i64];
        values.extend(body.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes"))));
        Ok(Self { curve_digest, bound, values })
    }

    fn truncated(&self, m: u64) -> Self {
        Self { curve_digest: self.curve_digest, bound: m, values: self.values[..=m as usize].to_vec() }
    }
}

/// (p, a_p) for every prime p <= bound, computed over prime ranges in parallel.
pub fn ap_table(curve: &EllipticCurve, bound: u64) -> Result<Vec<(u64, i64)>> {
    let primes = primes_up_to(bound);
    primes
        .par_chunks(1024)
        .map(|chunk| chunk.iter().map(|&p| Ok((p, ap(curve, p)?))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map(|parts| parts.into_iter().flatten().collect())
}

/// Fills a_n for n <= m from a_p by the prime-power recursion and multiplicativity.
pub fn an_sieve(curve: &EllipticCurve, m: u64) -> Result<CoefficientTable> {
    let m_us = m.max(1) as usize;
    let aps = ap_table(curve, m)?;
    let mut ap_of = vec![0i64; m_us + 1];
    for &(p, a) in &aps {
        ap_of[p as usize] = a;
    }
    let spf = spf_table(m_us);
    let mut values = vec![0i64; m_us + 1];
    values[1] = 1;
    for n in 2..=m_us {
        let p = spf[n] as usize;
        let mut pk = p;
        let mut rest = n / p;
        while rest % p == 0 {
            rest /= p;
            pk *= p;
        }
        values[n] = if rest > 1 {
            values[pk] * values[rest]
        } else if pk == p {
            ap_of[p]
        } else if curve.is_good(p as u64) {
            // a_{p^k} = a_p a_{p^{k-1}} - p a_{p^{k-2}}
            ap_of[p] * values[pk / p] - p as i64 * values[pk / (p * p)]
        } else {
            ap_of[p] * values[pk / p]
        };
    }
    Ok(CoefficientTable { curve_digest: curve.digest(), bound: m, values })
}

pub(crate) fn cache_path(dir: &Path, curve: &EllipticCurve) -> PathBuf {
    let hex: String = curve.digest()[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("ap-{hex}.dsap"))
}

/// [`an_sieve`] backed by an on-disk cache in `dir`: a cached table with
/// bound >= m is reused, otherwise the table is recomputed and written back.
pub fn an_sieve_cached(curve: &EllipticCurve, m: u64, dir: Option<&Path>) -> Result<CoefficientTable> {
    let Some(dir) = dir else {
        return an_sieve(curve, m);
    };
    let path = cache_path(dir, curve);
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(t) = CoefficientTable::read_from(std::io::BufReader::new(file)) {
            if t.curve_digest == curve.digest() && t.bound >= m {
                return Ok(t.truncated(m));
            }
        }
    }
    let table = an_sieve(curve, m)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    table.write_to(std::io::BufWriter::new(fs::File::create(&tmp)?))?;
    fs::rename(&tmp, &path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    #[test]
    fn multiplicativity_and_recursion() {
        let e = EllipticCurve::curve_571a1();
        let t = an_sieve(&e, 2000).unwrap();
        assert_eq!(t.get(1), 1);
        assert_eq!(t.get(6), t.get(2) * t.get(3));
        assert_eq!(t.get(4), t.get(2) * t.get(2) - 2);
        assert_eq!(t.get(12), t.get(4) * t.get(3));
        for m in 1..45u64 {
            for n in 1..45u64 {
                if m.gcd(&n) == 1 {
                    assert_eq!(t.get(m * n), t.get(m) * t.get(n));
                }
            }
        }
        for p in primes_up_to(2000) {
            if e.is_good(p) {
                assert!((t.get(p) as f64).abs() <= 2.0 * (p as f64).sqrt());
            }
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let e = EllipticCurve::curve_11a1();
        let fresh = an_sieve_cached(&e, 500, Some(dir.path())).unwrap();
        let bytes = fs::read(cache_path(dir.path(), &e)).unwrap();
        assert_eq!(&bytes[..4], b"DSAP");
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 500);
        let again = an_sieve_cached(&e, 300, Some(dir.path())).unwrap();
        assert_eq!(again.as_slice(), &fresh.as_slice()[..=300]);
        assert!(CoefficientTable::read_from(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn eleven_a1_coefficients() {
        // q - 2q^2 - q^3 + 2q^4 + q^5 + 2q^6 - 2q^7 ...
        let t = an_sieve(&EllipticCurve::curve_11a1(), 10).unwrap();
        assert_eq!(&t.as_slice()[1..=7], &[1, -2, -1, 2, 1, 2, -2]);
    }
}
