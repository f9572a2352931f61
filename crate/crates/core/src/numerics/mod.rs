//! Dense linear-algebra kernels and special functions.

mod linalg;
mod matrix;
pub mod special;

pub use linalg::{
    hermitian_gram, invert_complex, logdet_hermitian_psd, lstsq, singular_values, HouseholderQr, SingularValues,
    LOGDET_REL_TOL, SINGULAR_VALUE_REL_TOL,
};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use special::{
    digamma_integer, exp_integral, exp_integral_scaled, gamma_upper, gamma_upper_scaled, harmonic, ln_factorial, EULER_GAMMA,
};

pub use num_complex::Complex64;
