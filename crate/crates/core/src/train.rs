//! End-to-end fitting: split, standardize, widths, basis, stacked features,
//! solve, assemble and center the model.

use serde::{Deserialize, Serialize};

use crate::data::{
    fit_standardization, kernel_widths, split, standardize_with, Dataset,
};
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{auc, error_rate, rmse, EvalResult, Metric};
use crate::model::{GpnamModel, Interaction, ModelParts, Task};
use crate::rff::{BasisMode, FeatureBasis};
use crate::solvers::{
    fit_logistic_sgd_with_validation, solve_ridge_cg, stack_features, FitConfig, SolverReport,
};

/// Candidate width factors tried by [`Bandwidth::Auto`].
pub const AUTO_BANDWIDTH_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Kernel-width factor policy. Serialized as a number or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "BandwidthRepr", try_from = "BandwidthRepr")]
pub enum Bandwidth {
    Fixed(f64),
    /// Pick from [`AUTO_BANDWIDTH_GRID`] by validation RMSE (regression) or
    /// validation log-loss (classification); ties keep the smaller factor.
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BandwidthRepr {
    Factor(f64),
    Text(String),
}

impl From<Bandwidth> for BandwidthRepr {
    fn from(b: Bandwidth) -> Self {
        match b {
            Bandwidth::Fixed(f) => Self::Factor(f),
            Bandwidth::Auto => Self::Text("auto".into()),
        }
    }
}

impl TryFrom<BandwidthRepr> for Bandwidth {
    type Error = Error;

    fn try_from(r: BandwidthRepr) -> Result<Self> {
        match r {
            BandwidthRepr::Factor(f) => f.to_string().parse(),
            BandwidthRepr::Text(t) => t.parse(),
        }
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Fixed(v) => write!(f, "{v}"),
            Self::Auto => f.write_str("auto"),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| invalid(format!("bandwidth scale must be a number or 'auto', got '{s}'")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("bandwidth scale must be positive, got {v}")));
        }
        Ok(Self::Fixed(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Basis size `S`.
    pub basis_size: usize,
    pub mode: BasisMode,
    /// Seed of the basis draw.
    pub seed: u64,
    pub bandwidth: Bandwidth,
    /// `(train, validation, test)` fractions.
    pub split: [f64; 3],
    /// Seed of the split permutation.
    pub split_seed: u64,
    pub interactions: Vec<(usize, usize)>,
    pub fit: FitConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            basis_size: 100,
            mode: BasisMode::Grid,
            seed: 0,
            bandwidth: Bandwidth::Fixed(1.0),
            split: [0.8, 0.1, 0.1],
            split_seed: 0,
            interactions: Vec::new(),
            fit: FitConfig::default(),
        }
    }
}

/// A fitted model with its diagnostics.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: GpnamModel,
    pub report: SolverReport,
}

/// Fits on `train` (original units). `validation` drives early stopping for
/// classification; it is ignored for regression.
pub fn fit_model(
    train: &Dataset,
    validation: Option<&Dataset>,
    cfg: &TrainConfig,
    scale_factor: f64,
) -> Result<Fit> {
    if train.standardization.is_some() {
        return Err(Error::Config("fit_model expects data in original units".into()));
    }
    if cfg.basis_size == 0 {
        return Err(invalid("basis size S must be at least 1"));
    }
    let d = train.n_features();
    let std = fit_standardization(&train.x);
    let tr = standardize_with(train, &std)?;
    let widths = kernel_widths(&tr, scale_factor)?;
    let mut basis = FeatureBasis::build(cfg.basis_size, cfg.mode, cfg.seed)?;
    if !cfg.interactions.is_empty() {
        basis = basis.with_pair_frequencies();
    }
    let phi = stack_features(&basis, &widths, &tr.x, &cfg.interactions)?;

    let (w, report) = match train.task {
        Task::Regression => solve_ridge_cg(&phi, &tr.y, &cfg.fit)?,
        Task::BinaryClassification => {
            let val = validation
                .map(|v| -> Result<_> {
                    let vx = standardize_with(v, &std)?;
                    Ok((stack_features(&basis, &widths, &vx.x, &cfg.interactions)?, vx.y))
                })
                .transpose()?;
            let val_ref = val.as_ref().map(|(f, y)| (f, y.as_slice()));
            fit_logistic_sgd_with_validation(&phi, &tr.y, val_ref, &cfg.fit)?
        }
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericBreakdown {
            iteration: report.iterations,
            detail: "non-finite weights".into(),
        });
    }

    let s = basis.size();
    let weights = Matrix::from_vec(d, s, w[1..1 + d * s].to_vec())?;
    let interactions = cfg
        .interactions
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| Interaction {
            i,
            j,
            weights: w[1 + (d + k) * s..1 + (d + k + 1) * s].to_vec(),
        })
        .collect();
    let mut model = GpnamModel::from_parts(ModelParts {
        basis,
        task: train.task,
        feature_names: train.feature_names.clone(),
        standardization: std,
        widths,
        w0: w[0],
        weights,
        centering_offsets: vec![0.0; d],
        interactions,
        bandwidth_scale: scale_factor,
        encodings: train.encodings.clone(),
        feature_ranges: train.column_ranges(),
    })?;
    model.recenter(&train.x)?;
    Ok(Fit { model, report })
}

/// Metrics of a model on a data set in original units: RMSE and MSE for
/// regression, AUC (when both classes are present) and error rate for
/// classification.
pub fn evaluate(model: &GpnamModel, data: &Dataset) -> Result<Vec<EvalResult>> {
    let pred = model.predict(&data.x)?;
    let mut out = Vec::new();
    match model.task() {
        Task::Regression => {
            out.push(EvalResult::compute(Metric::Rmse, &pred, &data.y)?);
            out.push(EvalResult::compute(Metric::Mse, &pred, &data.y)?);
        }
        Task::BinaryClassification => {
            match auc(&pred, &data.y) {
                Ok(value) => out.push(EvalResult {
                    metric: Metric::Auc,
                    value,
                    n: pred.len(),
                }),
                Err(Error::UndefinedMetric(_)) => {}
                Err(e) => return Err(e),
            }
            out.push(EvalResult {
                metric: Metric::ErrorRate,
                value: error_rate(&pred, &data.y, 0.5)?,
                n: pred.len(),
            });
        }
    }
    Ok(out)
}

/// Validation score used for bandwidth selection (lower is better).
fn selection_score(model: &GpnamModel, data: &Dataset) -> Result<f64> {
    let pred = model.predict(&data.x)?;
    match model.task() {
        Task::Regression => rmse(&pred, &data.y),
        Task::BinaryClassification => {
            let eps = 1e-15;
            let total: f64 = pred
                .iter()
                .zip(&data.y)
                .map(|(p, y)| {
                    let p = p.clamp(eps, 1.0 - eps);
                    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
                })
                .sum();
            Ok(total / pred.len() as f64)
        }
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: GpnamModel,
    pub report: SolverReport,
    /// Rows in `(train, validation, test)`.
    pub split_sizes: [usize; 3],
    pub validation: Vec<EvalResult>,
    pub test: Vec<EvalResult>,
    /// `(factor, validation score)` for every candidate tried.
    pub bandwidth_candidates: Vec<(f64, f64)>,
}

/// Splits `dataset` (original units), fits on the training part with the
/// configured bandwidth policy and evaluates on validation and test.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainOutput> {
    let (tr, va, te) = split(dataset, cfg.split, cfg.split_seed)?;
    train_on_splits(&tr, &va, &te, cfg)
}

/// As [`train`] with explicit splits.
pub fn train_on_splits(
    tr: &Dataset,
    va: &Dataset,
    te: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainOutput> {
    let factors: Vec<f64> = match cfg.bandwidth {
        Bandwidth::Fixed(f) => vec![f],
        Bandwidth::Auto => AUTO_BANDWIDTH_GRID.to_vec(),
    };
    let mut best: Option<(f64, Fit)> = None;
    let mut candidates = Vec::new();
    for &f in &factors {
        let fit = fit_model(tr, Some(va), cfg, f)?;
        let score = selection_score(&fit.model, va)?;
        log::info!("bandwidth factor {f}: validation score {score:.6}");
        candidates.push((f, score));
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, fit));
        }
    }
    let (_, fit) = best.expect("at least one bandwidth candidate");
    Ok(TrainOutput {
        validation: evaluate(&fit.model, va)?,
        test: evaluate(&fit.model, te)?,
        split_sizes: [tr.n_rows(), va.n_rows(), te.n_rows()],
        model: fit.model,
        report: fit.report,
        bandwidth_candidates: candidates,
    })
}
