//! Shared numerical plumbing: polynomials, root finding, dense complex matrices,
//! Hermitian eigensolvers, adaptive quadrature and 2×2 Möbius algebra.

mod eigen;
mod matrix;
mod mobius;
mod poly;
mod quad;
mod roots;

pub use eigen::{herm_eigen, herm_eigenvalues, tridiag_eigen, Eigen, TridiagEigen};
pub use matrix::{CMat, HermitianMatrix};
pub use mobius::Mobius2;
pub use poly::{poly_eval, LaurentPoly, Poly, RealPoly};
pub use quad::{quad_adaptive, quad_with, Endpoints, QuadResult};
pub use roots::real_roots;
