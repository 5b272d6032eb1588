//! Iwasawa invariants of elliptic curves over Q along cyclic degree-p
//! extensions: local reduction data, prime classification, a Kida-type
//! lambda transfer, Euler-characteristic criteria and counts of extensions
//! in which the invariants stay trivial.

pub mod arith;
pub mod cache;
pub mod classify;
pub mod curve;
pub mod density;
pub mod error;
pub mod euler;
pub mod fields;
pub mod iwasawa;
pub mod kida;
pub mod points;
pub mod reference;
pub mod tate;

pub use curve::{parse_curve, WeierstrassModel};
pub use error::{Error, Result};
