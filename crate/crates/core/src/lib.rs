//! Arboreal 2-adic images of elliptic curves with a rational point of order 2.
//!
//! The crate covers the whole pipeline: exact arithmetic in the affine group
//! over `Z/2^k` ([`modmatrix`]), enumeration of the admissible ("happy")
//! subgroups of the full preimage of `Γ₀(2)` ([`groupengine`]), exact
//! odd-order densities ([`density`]), the curve side with prime scans
//! ([`ecurve`]), and square-class classification of a curve into one of the
//! 63 image classes ([`classifier`]).

pub mod classifier;
pub mod density;
pub mod ecurve;
mod error;
pub mod groupengine;
pub mod modmatrix;

pub use error::{Error, Result};
