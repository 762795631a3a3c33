//! Computational tools around diophantine stability for elliptic curves over Q.

pub mod arith;
pub mod conics;
pub mod config;
pub mod ecarith;
pub mod error;
pub mod extfields;
pub mod homspace;
pub mod lfunc;
pub mod ffgroup;
pub mod primeclass;
pub mod quadfield;
pub mod search;
pub mod selftest;

pub use error::{Error, Result};
