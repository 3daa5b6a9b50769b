//! Differentiable real-coordinate kernels, reparameterized parameters,
//! reverse-mode gradients and the optimizer.

pub mod grad;
pub mod kernel;
pub mod optim;
pub mod params;
pub mod real;
pub mod tape;

pub use grad::{grad, value_and_grad, Objective};
pub use kernel::{project, DiffKernel, Projection, Rep, ScoreMode};
pub use optim::{step, OptimizerConfig, OptimizerKind, OptimizerState};
pub use params::{Gradient, Group, KernelSpec, Materialized, ParamVector, Params, Trainable};
pub use real::Real;
pub use tape::{Tape, Var};
