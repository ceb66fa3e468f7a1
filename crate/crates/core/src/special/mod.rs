//! Special functions and the Laplace/Helmholtz Green's kernels.

mod bessel;
mod greens;

pub use bessel::{
    bessel_j, bessel_j_seq, bessel_y, bessel_y_seq, fill_bessel_j, fill_bessel_y, fill_hankel1,
    hankel1, j0_j1, EULER_GAMMA, MAX_ORDER,
};
pub use greens::{
    greens, greens_normal_deriv, self_single_layer_2d, singular_diagonal_2d, Kernel,
    EXP_EULER_GAMMA,
};
pub(crate) use greens::{greens_at_distance, radial_derivative};
