//! Orbit types of Weyl groups acting on maximal tori and Cartan subalgebras.
//!
//! The genus number of a compact simply connected simple Lie group counts
//! conjugacy classes of centralizers of its elements; it equals the number of
//! conjugacy classes of isotropy subgroups of the Weyl group acting on a
//! maximal torus. This crate computes that number two ways, from closed-form
//! partition formulas and by exhaustive exact enumeration, and reports any
//! disagreement.

pub mod catalog;
pub mod error;
pub mod exactlin;
pub mod octonion;
pub mod orbits;
pub mod partitions;
pub mod report;
pub mod selftest;
pub mod weyl;

pub use error::{Error, Result};
