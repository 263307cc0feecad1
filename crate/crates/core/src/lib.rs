//! Exact computations in weight-truncated vertex operator algebras: lattice
//! Fock spaces, generation by iterated products, automorphism and derivation
//! conditions, trace forms, and a fixed-point subalgebra example.

pub mod algebra;
pub mod autgroup;
pub mod cli;
pub mod compose;
pub mod dercalc;
pub mod error;
pub mod exactlin;
pub mod fixpoint;
pub mod fockspace;

pub use algebra::{GradedVector, VertexAlgebra};
pub use error::{Error, Result};
pub use exactlin::Rational;
