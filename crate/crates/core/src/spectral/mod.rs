//! Periodic-grid Fourier machinery: fields, transforms, derivatives, the
//! operator `L = d/dx (1 - d^2/dx^2)` and its inverse on zero-x-mean fields,
//! sub-grid translation and reflection.

mod fft;
mod grid;
mod interp;
mod ops;
pub mod random;

pub use grid::{Field2D, Grid2D, SpectralField2D};
pub use interp::Interpolant;
pub use ops::{
    apply_l, deriv, deriv_spectral, deriv_symbol, invert_l, invert_l_spectral, l_inverse_symbol,
    l_symbol, reflect, reflect_spectral, roll_x, shift_spectral, spectral_shift, MAX_DERIV_ORDER,
};
