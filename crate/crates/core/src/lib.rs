//! Numerical spectral theory for periodic Jacobi (OPRL) and CMV (OPUC) operators.
//!
//! The crate computes discriminants and band structure of periodic operators,
//! evaluates a periodic discriminant on arbitrary operators (the "magic formula"
//! `Δ(J) = Sᵖ + S⁻ᵖ` that characterises the isospectral torus), measures distance
//! to that torus, and works with the block Jacobi matrices that `Δ(J)` produces:
//! equivalence normal forms, matrix m-functions, sum rules and eigenvalue bounds.
//!
//! Everything is pure and `Send + Sync`; the CLI in `src/bin` is a thin JSON layer.

pub mod block_jacobi;
pub mod cli;
pub mod cmv;
pub mod eigenbounds;
mod error;
pub mod magic;
pub mod numerics;
pub mod periodic_jacobi;
pub mod sumrules;
pub mod torus;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
