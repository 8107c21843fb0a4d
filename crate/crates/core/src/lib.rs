//! Exponential Diophantine equations: local obstructions, modulus search,
//! and checkable proofs that a bounded list of solutions is complete.

pub mod certify;
pub mod congruence;
pub mod equation;
pub mod error;
pub mod modsearch;
pub mod strategy;
pub mod ntheory;

pub use error::{Error, Result};
