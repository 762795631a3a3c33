//! Quartic curves y^2 = q(x) over quadratic fields: point search and the 3x3
//! membership table for the three quartic models attached to 571A1.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::search::{HitRecord, SearchHit, SquareSearch};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticSpace {
    pub label: String,
    /// (q4, q3, q2, q1, q0)
    pub coeffs: [i64; 5],
}

impl QuarticSpace {
    pub fn new(label: impl Into<String>, coeffs: [i64; 5]) -> Result<Self> {
        let s = Self { label: label.into(), coeffs };
        if s.discriminant() == 0 {
            return invalid("quartic has a repeated root");
        }
        Ok(s)
    }

    /// Coefficients in ascending degree order.
    pub fn ascending(&self) -> Vec<i64> {
        self.coeffs.iter().rev().copied().collect()
    }

    /// Discriminant of q4 x^4 + ... + q0 (nonzero for squarefree q).
    pub fn discriminant(&self) -> i128 {
        let [a, b, c, d, e] = self.coeffs.map(|v| v as i128);
        256 * a.pow(3) * e.pow(3) - 192 * a.pow(2) * b * d * e.pow(2) - 128 * a.pow(2) * c.pow(2) * e.pow(2)
            + 144 * a.pow(2) * c * d.pow(2) * e
            - 27 * a.pow(2) * d.pow(4)
            + 144 * a * b.pow(2) * c * e.pow(2)
            - 6 * a * b.pow(2) * d.pow(2) * e
            - 80 * a * b * c.pow(2) * d * e
            + 18 * a * b * c * d.pow(3)
            + 16 * a * c.pow(4) * e
            - 4 * a * c.pow(3) * d.pow(2)
            - 27 * b.pow(4) * e.pow(2)
            + 18 * b.pow(3) * c * d * e
            - 4 * b.pow(3) * d.pow(3)
            - 4 * b.pow(2) * c.pow(3) * e
            + b.pow(2) * c.pow(2) * d.pow(2)
    }
}

/// The models X_1, X_2, X_3 and their fields Q(sqrt 17), Q(sqrt 41), Q(sqrt 89).
pub fn spaces_571a1() -> [(QuarticSpace, i64); 3] {
    [
        (QuarticSpace { label: "X1".into(), coeffs: [-19, 112, -142, -68, -7] }, 17),
        (QuarticSpace { label: "X2".into(), coeffs: [-16, -82, -52, 136, -44] }, 41),
        (QuarticSpace { label: "X3".into(), coeffs: [-1, -26, -148, 274, -111] }, 89),
    ]
}

/// First point with x = (a + b sqrt d) / c, max(|a|, |b|, c) <= height.
pub fn search_point(space: &QuarticSpace, d: i64, height: i64) -> Result<Option<SearchHit>> {
    SquareSearch::new(&space.ascending(), d, height)?.first_hit(height)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub space: String,
    pub d: i64,
    /// `None` means no point of height <= the search height (not a proof of absence).
    pub point: Option<HitRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MembershipTable {
    pub height: i64,
    /// entries[i][j]: space i over field j
    pub entries: Vec<Vec<TableEntry>>,
}

impl MembershipTable {
    pub fn found(&self, i: usize, j: usize) -> bool {
        self.entries[i][j].point.is_some()
    }
}

pub fn table_571a1(height: i64) -> Result<MembershipTable> {
    if height < 100 {
        return invalid("height must be at least 100");
    }
    let spaces = spaces_571a1();
    let mut entries = Vec::new();
    for (space, _) in &spaces {
        let mut row = Vec::new();
        for (_, d) in &spaces {
            let point = search_point(space, *d, height)?.as_ref().map(HitRecord::from);
            row.push(TableEntry { space: space.label.clone(), d: *d, point });
        }
        entries.push(row);
    }
    for (i, row) in entries.iter().enumerate() {
        if row[i].point.is_none() {
            return Err(Error::NotFound(format!(
                "no point on {} over Q(sqrt {}) up to height {height}; increase the height",
                row[i].space, row[i].d
            )));
        }
    }
    Ok(MembershipTable { height, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_are_squarefree() {
        for (s, _) in spaces_571a1() {
            assert_ne!(s.discriminant(), 0);
        }
        assert!(QuarticSpace::new("sq", [1, 0, -2, 0, 1]).is_err());
    }
}
