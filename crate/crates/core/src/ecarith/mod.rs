//! Elliptic curves over Q and their reductions: point counts, a_p, the
//! multiplicative a_n table, and the F_ell-dimension of E(F_p)[ell].

mod count;
mod curve;
mod divpoly;
mod point;
mod sieve;
mod torsion;

pub use count::{ap, count_points, count_points_with, CountMethod, DEFAULT_EXHAUSTIVE_THRESHOLD};
pub use curve::{BadPrime, EllipticCurve, ReductionKind};
pub use divpoly::{division_polynomial_mod_p, PolyModP};
pub use point::{CurveModP, ReducedPoint};
pub use sieve::{an_sieve, an_sieve_cached, ap_table, CoefficientTable, CACHE_MAGIC, CACHE_VERSION};
pub use torsion::{ell_torsion_dim, ell_torsion_dim_divpoly, ell_torsion_dim_probe};
