//! Gaussian process neural additive models (GP-NAM).
//!
//! Each feature gets a one-dimensional Gaussian process shape function,
//! linearized with a shared random Fourier feature basis. Training then
//! reduces to ridge regression (solved matrix-free with conjugate gradients)
//! or L2-regularized logistic regression (mini-batch SGD) on the stacked
//! feature map `[1, φ(x₁), …, φ(x_d)]`.

pub mod cli;
pub mod data;
pub mod error;
pub mod fsutil;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod normal;
pub mod rff;
pub mod solvers;
pub mod train;

pub use data::{Dataset, Encoding};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{GpnamModel, ShapeTable, Task};
pub use rff::{BasisMode, FeatureBasis};
pub use solvers::{FitConfig, SolverReport, StackedFeatures};
pub use train::{Bandwidth, TrainConfig};
