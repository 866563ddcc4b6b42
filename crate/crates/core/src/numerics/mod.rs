//! Deterministic random streams and dense linear-algebra kernels shared by
//! every statistical module.

pub mod linalg;
pub mod rng;

pub use linalg::{least_squares, sym_eigenvalues, Matrix, CONDITION_LIMIT};
pub use rng::{mix_seed, Rng};
