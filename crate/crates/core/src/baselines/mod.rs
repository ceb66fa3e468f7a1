//! Comparison preconditioners: zero-fill incomplete Cholesky, a geometric
//! multigrid V-cycle and the identity.

mod ic;
mod multigrid;

pub use ic::{ic0, IcFactors, IC_SHIFTS};
pub use multigrid::{MgHierarchy, MgLevel, MgOptions, COARSEST_MAX_UNKNOWNS};

use crate::krylov::Identity;

/// `z = r`.
pub fn identity(n: usize) -> Identity {
    Identity(n)
}
