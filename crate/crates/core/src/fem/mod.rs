//! Finite-element infrastructure: P1/P2 Lagrange and cubic Hermite bases,
//! quadrature, constrained sparse assembly, linear solvers, integration of
//! functionals and small dense symmetric eigenproblems.

pub mod assemble;
pub mod eigen;
pub mod hermite;
pub mod integrate;
pub mod p2;
pub mod quadrature;
pub mod solve;
pub mod space;
pub mod sparse;

pub use assemble::{assemble_bilinear, Form};
pub use eigen::sym_eigendecomposition;
pub use solve::{solve_saddle, solve_spd, DirectSolver, DEFAULT_TOL};
pub use space::{Element, FeMesh, FunctionSpace};
pub use sparse::{CsrMatrix, Triplets};
