//! Tabular data: ingestion, encoding, standardization, widths, splits.

mod csv_io;
mod split;
mod synth;

pub use csv_io::{
    load_csv, read_csv, read_feature_rows, read_labeled_rows, FeatureEncoding, FeatureRows,
    IngestionReport,
};
pub use split::{split, split_indices};
pub use synth::{synth_additive, synth_additive_with, SynthData, TrueShape};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::model::{Standardization, Task};

/// How a raw column was turned into numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoding {
    Numeric,
    /// Category at position `k` is encoded as `k` (first-appearance order).
    Ordinal { categories: Vec<String> },
}

impl Encoding {
    /// Encodes one raw cell; `None` when it cannot be represented.
    pub fn encode(&self, cell: &str) -> Option<f64> {
        match self {
            Self::Numeric => parse_number(cell),
            Self::Ordinal { categories } => {
                categories.iter().position(|c| c == cell).map(|k| k as f64)
            }
        }
    }
}

pub(crate) const MISSING_TOKENS: [&str; 6] = ["", "NA", "N/A", "NaN", "null", "?"];

pub(crate) fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell)
}

pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A tabular data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `n × d`, original units unless `standardization` is set.
    pub x: Matrix,
    /// Regression targets, or labels in {0, 1}.
    pub y: Vec<f64>,
    pub feature_names: Vec<String>,
    pub task: Task,
    pub encodings: Vec<Encoding>,
    /// Present once the columns of `x` have been standardized.
    pub standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, feature_names: Vec<String>, task: Task) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(invalid(format!("{} rows but {} targets", x.nrows(), y.len())));
        }
        if x.nrows() > 0 && x.ncols() != feature_names.len() {
            return Err(invalid(format!(
                "{} columns but {} feature names",
                x.ncols(),
                feature_names.len()
            )));
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(invalid("dataset entries must be finite"));
        }
        if task == Task::BinaryClassification && y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(invalid("classification labels must be 0 or 1"));
        }
        let d = feature_names.len();
        Ok(Self {
            x,
            y,
            feature_names,
            task,
            encodings: vec![Encoding::Numeric; d],
            standardization: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows `idx`, in order, with all metadata carried over.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            task: self.task,
            encodings: self.encodings.clone(),
            standardization: self.standardization.clone(),
        }
    }

    /// Per-feature `[min, max]` of `x`.
    pub fn column_ranges(&self) -> Vec<[f64; 2]> {
        (0..self.n_features())
            .map(|j| {
                self.x.column(j).fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], v| {
                    [lo.min(v), hi.max(v)]
                })
            })
            .collect()
    }
}

/// Population mean and standard deviation of every column. Constant columns
/// get scale 1.
pub fn fit_standardization(x: &Matrix) -> Standardization {
    let n = x.nrows().max(1) as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut scales = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let mean = x.column(j).sum::<f64>() / n;
        let var = x.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        means.push(mean);
        // relative test so round-off in the mean of a constant column is ignored
        if sd > 1e-12 * mean.abs().max(1.0) {
            scales.push(sd);
        } else {
            log::warn!("column {j} is constant; using scale 1");
            scales.push(1.0);
        }
    }
    Standardization { means, scales }
}

/// Applies `std` to every row of `x`.
pub fn apply_standardization(x: &Matrix, std: &Standardization) -> Result<Matrix> {
    if x.nrows() > 0 && x.ncols() != std.len() {
        return Err(invalid(format!(
            "{} columns but standardization for {}",
            x.ncols(),
            std.len()
        )));
    }
    let mut out = x.clone();
    for r in 0..out.nrows() {
        for (j, v) in out.row_mut(r).iter_mut().enumerate() {
            *v = std.apply(j, *v);
        }
    }
    Ok(out)
}

/// Inverse of [`apply_standardization`].
pub fn destandardize(x: &Matrix, std: &Standardization) -> Result<Matrix> {
    if x.nrows() > 0 && x.ncols() != std.len() {
        return Err(invalid("standardization width mismatch"));
    }
    let mut out = x.clone();
    for r in 0..out.nrows() {
        for (j, v) in out.row_mut(r).iter_mut().enumerate() {
            *v = std.invert(j, *v);
        }
    }
    Ok(out)
}

/// Standardizes with the data set's own statistics and records them.
pub fn standardize(dataset: &Dataset) -> Dataset {
    let std = fit_standardization(&dataset.x);
    standardize_with(dataset, &std).expect("statistics fitted on the same columns")
}

/// Standardizes with externally fitted statistics (e.g. from a training split).
pub fn standardize_with(dataset: &Dataset, std: &Standardization) -> Result<Dataset> {
    if dataset.standardization.is_some() {
        return Err(Error::Config("dataset is already standardized".into()));
    }
    Ok(Dataset {
        x: apply_standardization(&dataset.x, std)?,
        standardization: Some(std.clone()),
        ..dataset.clone()
    })
}

/// Kernel width per feature: `scale_factor × population std` of the
/// standardized column, which is `scale_factor` unless the column is constant.
pub fn kernel_widths(dataset: &Dataset, scale_factor: f64) -> Result<Vec<f64>> {
    if !(scale_factor > 0.0 && scale_factor.is_finite()) {
        return Err(invalid(format!("scale factor must be positive, got {scale_factor}")));
    }
    if dataset.standardization.is_none() {
        return Err(Error::Config("kernel widths require a standardized dataset".into()));
    }
    let n = dataset.n_rows().max(1) as f64;
    Ok((0..dataset.n_features())
        .map(|j| {
            let mean = dataset.x.column(j).sum::<f64>() / n;
            let var = dataset.x.column(j).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            // constant columns standardize to zero spread
            if sd > 1e-12 {
                scale_factor * sd
            } else {
                scale_factor
            }
        })
        .collect())
}
