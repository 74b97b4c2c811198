//! Transient acoustic scattering by time-domain boundary integral equations.
//!
//! Time is discretized by standard or modified convolution quadrature (CQ)
//! built on BDF2 or the trapezoidal rule; space by the method of fundamental
//! solutions (MFS) or piecewise-constant Galerkin BEM. The fully discrete
//! convolution system is diagonalised on a scaled contour and solved as
//! independent frequency-domain problems.

pub mod assembly;
pub mod cq;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod scenarios;
pub mod solver;

pub use error::{Error, Result};
