//! Analysis of q-regular sequences: exact evaluation and summation of
//! linear representations, spectral data, meromorphic continuation of the
//! associated Dirichlet series and Fourier coefficients of the periodic
//! fluctuations in the asymptotic expansion of summatory functions.

pub mod asymptotics;
pub mod dirichlet;
pub mod fourier;
pub mod io;
pub mod linrep;
pub mod matrix;
pub mod pascal;
pub mod poly;
pub mod registry;
pub mod scalar;
pub mod spectral;
pub mod transducer;

pub use linrep::{digits, LinearRepresentation, Mode, QExpansion, Violation};
pub use matrix::{CMatrix, CVector, ExactMatrix};
pub use scalar::Scalar;
