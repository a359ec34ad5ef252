//! Low-degree GF(2) polynomials as randomness extractors and dispersers.
//!
//! Building blocks are bit-packed vectors and matrices over GF(2)
//! ([`gf2`]), polynomials in algebraic normal form ([`anf`]) and source
//! models with exact distributions ([`sources`]). On top of them sit exact
//! and sampled bias computations ([`bias`]), evaluation-rank certificates
//! ([`ranklab`]), explicit constructions ([`constructions`]), code
//! statistics ([`codes`]), adversarial oracles ([`oracles`]) and the seeded
//! batch runner ([`experiment`]).
//!
//! Coordinate `i` of a vector (0-based) is variable `x_{i+1}`; integer
//! encodings put `x_1` in bit 0.

pub mod anf;
pub mod bias;
pub mod codes;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod gf2;
pub mod oracles;
pub mod ranklab;
pub mod rng;
pub mod sources;

pub use anf::{MonomialOrder, Polynomial};
pub use bias::Verdict;
pub use error::{Error, Result};
pub use exact::ExactRational;
pub use gf2::{BitMatrix, BitVector};
pub use rng::{derived, stream, Stream};
pub use sources::{Distribution, Source};
