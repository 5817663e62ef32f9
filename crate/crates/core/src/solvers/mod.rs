//! Convex solvers for the stacked linear model: ridge regression by
//! matrix-free conjugate gradients and logistic regression by mini-batch SGD.

mod cg;
mod features;
mod logistic;

pub use cg::{conjugate_gradients, solve_ridge_cg, CgOutcome};
pub use features::{stack_features, StackedFeatures, REDUCTION_CHUNK};
pub use logistic::{
    fit_logistic_sgd, fit_logistic_sgd_with_validation, log_loss, LogisticObjective, PATIENCE,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Starting point for SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightInit {
    Zero,
    /// i.i.d. `N(0, scale²)` from a seeded ChaCha20 stream.
    Gaussian { scale: f64, seed: u64 },
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// L2 strength, ≥ 0.
    pub lambda: f64,
    /// Relative residual target for CG.
    pub cg_tol: f64,
    /// Defaults to `2·D*`.
    pub cg_max_iter: Option<usize>,
    pub sgd_lr: f64,
    pub sgd_batch: usize,
    pub sgd_epochs: usize,
    /// Multiplies the learning rate after every epoch.
    pub sgd_lr_decay: f64,
    /// Relative change of the objective over the last epoch below which an
    /// SGD fit counts as converged.
    pub sgd_tol: f64,
    pub regularize_bias: bool,
    /// Seed of the SGD shuffling stream.
    pub seed: u64,
    pub init: WeightInit,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            cg_tol: 1e-8,
            cg_max_iter: None,
            sgd_lr: 0.1,
            sgd_batch: 256,
            sgd_epochs: 100,
            sgd_lr_decay: 0.99,
            sgd_tol: 1e-4,
            regularize_bias: false,
            seed: 0,
            init: WeightInit::Zero,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be ≥ 0, got {}", self.lambda)));
        }
        if !pos(self.cg_tol) {
            return Err(invalid("cg_tol must be positive"));
        }
        if !pos(self.sgd_lr) {
            return Err(invalid(format!("learning rate must be positive, got {}", self.sgd_lr)));
        }
        if self.sgd_batch == 0 {
            return Err(invalid("batch size must be positive"));
        }
        if !pos(self.sgd_lr_decay) || self.sgd_lr_decay > 1.0 {
            return Err(invalid("learning-rate decay must be in (0, 1]"));
        }
        if self.sgd_tol.is_nan() || self.sgd_tol < 0.0 {
            return Err(invalid("sgd_tol must be ≥ 0"));
        }
        if let WeightInit::Gaussian { scale, .. } = self.init {
            if !(scale >= 0.0 && scale.is_finite()) {
                return Err(invalid("init scale must be finite and ≥ 0"));
            }
        }
        Ok(())
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// `cg` or `sgd`.
    pub method: String,
    /// CG iterations or SGD epochs.
    pub iterations: usize,
    /// Relative residual (CG) or final regularized loss (SGD).
    pub final_residual_or_loss: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub wall_time_s: f64,
    /// Single-class training labels.
    pub degenerate: bool,
    pub early_stopped: bool,
}
