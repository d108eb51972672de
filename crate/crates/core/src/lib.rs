//! Grammatical evolution of closed-form Frobenius-number formulas.
//!
//! The pipeline: [`dataset`] materializes Frobenius numbers of a parametric
//! tuple family using the exact [`oracle`]; [`evolve`] searches for a formula
//! fitting them, decoding codon strings through a BNF [`grammar`] with the
//! [`mapper`] into [`expr`] trees; [`verify`] checks promoted conjectures
//! against the oracle over a parameter range.

pub mod grammar;
pub mod mapper;
pub mod expr;
pub mod oracle;
pub mod dataset;
pub mod evolve;
pub mod verify;
pub mod cli;
