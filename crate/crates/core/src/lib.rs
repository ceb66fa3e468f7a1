//! Matrix-free preconditioning for the interior Helmholtz equation.
//!
//! The crate couples a quadtree fast multipole method to a constant-element
//! boundary element solver and uses the pair as a right preconditioner for
//! Krylov solves of Q1/Q2 finite element discretizations. Incomplete
//! Cholesky and geometric multigrid baselines and a dense eigenvalue toolkit
//! are included for comparison.

pub mod baselines;
pub mod bem;
pub mod discretize;
pub mod error;
pub mod fmm;
pub mod geometry;
pub mod krylov;
pub mod linalg;
pub mod special;
pub mod spectra;
pub mod tree;

pub use error::{Error, Result};
pub use num_complex::Complex64;
