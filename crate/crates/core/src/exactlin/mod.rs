//! Exact rational linear algebra: scalars, vectors, matrices, and lattices
//! with Hermite-normal-form membership tests.

mod frac;
mod lattice;
mod matrix;

pub use frac::Frac;
pub use lattice::{
    canonical_rep, hermite_normal_form, lattice_contains, solve_integral, Hnf, Lattice,
};
pub use matrix::{QMatrix, QVector};
