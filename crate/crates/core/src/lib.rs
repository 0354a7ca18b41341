//! Translation hyperovals in PG(2, q^k), q = 2^h, and the geometry of their
//! direction sets in the André/Bruck-Bose model PG(2k, q) and the
//! Barlotti-Cofman model PG(2hk, 2).

pub mod bj_axioms;
pub mod bruck_bose;
pub mod error;
pub mod f2;
pub mod field;
pub mod hyperoval;
pub mod linear_set;
pub mod pipeline;
pub mod projective;
pub mod pseudoregulus;
pub mod reduction;

pub use error::{Error, Result};
pub use field::{Field, FieldElement, Tower};
