//! Curvature-aware de Branges–Rovnyak kernels on the Poincaré ball and the
//! adaptive hyperbolic kernel family built on them.

pub mod checks;
pub mod config;
pub mod diff;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod learning;
pub mod rkhs;

pub use config::{RunConfig, Task};
pub use error::{Error, Result};
pub use geometry::{BallPoint, Curvature, TangentVector};
pub use kernels::{gram, GramMatrix, KernelConfig, KernelVariant, RadialCoeffs};
pub use rkhs::MultiplierParams;
