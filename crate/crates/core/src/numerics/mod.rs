//! Scalars, dense matrices, linear algebra, random sampling and special functions.

pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod special;

pub use linalg::{inverse, null_space, orthonormal_basis, rank};
pub use matrix::{dot, dot_f64, norm, Matrix};
pub use rng::Rng;
pub use sampling::{sample_gaussian, sample_haar_orthogonal};
pub use scalar::{Rational, Scalar, FLOAT_RANK_TOL};
pub use special::{binomial, chi2_survival};
