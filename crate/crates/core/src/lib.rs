//! Exact lattice algorithms for K3^[n]-type lattices: isometry factorization
//! into monodromy operators and reflections, the extended (LLV) lattice and its
//! operators, symmetric powers, and the Pontryagin product on the Verbitsky
//! subring.
//!
//! All arithmetic is exact; there is no floating point anywhere.

pub mod error;
pub mod factor;
pub mod isometry;
pub mod json;
pub mod lattice;
pub mod llv;
pub mod matrix;
pub mod mukai;
pub mod pontryagin;
pub mod random;
pub mod rat;
pub mod snrep;
pub mod suite;

pub use error::{Error, Result};
pub use isometry::{Group, Isometry};
pub use lattice::{Lattice, Preset};
pub use matrix::{QMat, QVec};
pub use rat::Rat;
