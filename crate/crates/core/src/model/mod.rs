//! Trained additive model: prediction, shape functions, parameter accounting.

mod persist;
mod shape;

pub use persist::{load, save, SCHEMA_VERSION};
pub use shape::{format_sig9, ShapeTable};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Encoding;
use crate::error::{invalid, Error, Result};
use crate::matrix::{dot, Matrix};
use crate::rff::FeatureBasis;

/// Learning task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reg" | "regression" => Ok(Self::Regression),
            "clf" | "classification" | "binary_classification" => Ok(Self::BinaryClassification),
            other => Err(invalid(format!("unknown task '{other}' (reg|clf)"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Regression => "regression",
            Self::BinaryClassification => "binary_classification",
        })
    }
}

/// Per-feature affine map `x ↦ (x − mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn identity(d: usize) -> Self {
        Self {
            means: vec![0.0; d],
            scales: vec![1.0; d],
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize, x: f64) -> f64 {
        (x - self.means[i]) / self.scales[i]
    }

    #[inline]
    pub fn invert(&self, i: usize, z: f64) -> f64 {
        z * self.scales[i] + self.means[i]
    }
}

/// Pairwise shape function `f_ij(x_i, x_j) = φ(x_i, x_j)ᵀ w_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub i: usize,
    pub j: usize,
    pub weights: Vec<f64>,
}

/// Everything needed to assemble a [`GpnamModel`]. Validated by
/// [`GpnamModel::from_parts`].
#[derive(Debug, Clone)]
pub struct ModelParts {
    pub basis: FeatureBasis,
    pub task: Task,
    pub feature_names: Vec<String>,
    pub standardization: Standardization,
    /// Kernel width per feature, in standardized units.
    pub widths: Vec<f64>,
    /// Intercept after absorbing the centering offsets.
    pub w0: f64,
    /// `d × S`, row `i` is the weight vector of feature `i`.
    pub weights: Matrix,
    pub centering_offsets: Vec<f64>,
    pub interactions: Vec<Interaction>,
    pub bandwidth_scale: f64,
    pub encodings: Vec<Encoding>,
    /// Training `[min, max]` per feature in original units.
    pub feature_ranges: Vec<[f64; 2]>,
}

/// A trained GP-NAM.
///
/// `g(x) = w0 + Σᵢ (φ(xᵢ)ᵀwᵢ − offsetᵢ) + Σ f_ij(xᵢ, xⱼ)`, where `xᵢ` is
/// standardized and divided by its width before entering `φ`. The offsets
/// make every main-effect shape function average to zero over the training
/// rows; their sum lives in `w0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpnamModel {
    basis: FeatureBasis,
    task: Task,
    feature_names: Vec<String>,
    standardization: Standardization,
    widths: Vec<f64>,
    w0: f64,
    weights: Matrix,
    centering_offsets: Vec<f64>,
    interactions: Vec<Interaction>,
    bandwidth_scale: f64,
    encodings: Vec<Encoding>,
    feature_ranges: Vec<[f64; 2]>,
}

fn violation(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

impl GpnamModel {
    pub fn from_parts(p: ModelParts) -> Result<Self> {
        let d = p.feature_names.len();
        let s = p.basis.size();
        let check_len = |name: &str, len: usize| {
            if len == d {
                Ok(())
            } else {
                Err(violation(format!("{name} has length {len}, expected d = {d}")))
            }
        };
        check_len("standardization.means", p.standardization.means.len())?;
        check_len("standardization.scales", p.standardization.scales.len())?;
        check_len("b", p.widths.len())?;
        check_len("centering_offsets", p.centering_offsets.len())?;
        check_len("encodings", p.encodings.len())?;
        check_len("feature_ranges", p.feature_ranges.len())?;
        if p.weights.nrows() != d || (d > 0 && p.weights.ncols() != s) {
            return Err(violation(format!(
                "W is {}x{}, expected {d}x{s}",
                p.weights.nrows(),
                p.weights.ncols()
            )));
        }
        if let Some(b) = p.widths.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(violation(format!("kernel widths must be positive, found {b}")));
        }
        if p.standardization.scales.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(violation("standardization scales must be positive"));
        }
        let finite = p.w0.is_finite()
            && p.weights.is_finite()
            && p.standardization.means.iter().all(|v| v.is_finite())
            && p.centering_offsets.iter().all(|v| v.is_finite())
            && p.feature_ranges.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(violation("model parameters must be finite"));
        }
        if !(p.bandwidth_scale > 0.0 && p.bandwidth_scale.is_finite()) {
            return Err(violation("bandwidth_scale must be positive"));
        }
        if !p.interactions.is_empty() && !p.basis.has_pair_frequencies() {
            return Err(violation("interactions need a basis with pair frequencies"));
        }
        for t in &p.interactions {
            if t.i >= d || t.j >= d || t.i == t.j {
                return Err(violation(format!("bad interaction pair ({}, {})", t.i, t.j)));
            }
            if t.weights.len() != s || t.weights.iter().any(|v| !v.is_finite()) {
                return Err(violation(format!(
                    "interaction ({}, {}) needs {s} finite weights",
                    t.i, t.j
                )));
            }
        }
        Ok(Self {
            basis: p.basis,
            task: p.task,
            feature_names: p.feature_names,
            standardization: p.standardization,
            widths: p.widths,
            w0: p.w0,
            weights: p.weights,
            centering_offsets: p.centering_offsets,
            interactions: p.interactions,
            bandwidth_scale: p.bandwidth_scale,
            encodings: p.encodings,
            feature_ranges: p.feature_ranges,
        })
    }

    pub fn into_parts(self) -> ModelParts {
        ModelParts {
            basis: self.basis,
            task: self.task,
            feature_names: self.feature_names,
            standardization: self.standardization,
            widths: self.widths,
            w0: self.w0,
            weights: self.weights,
            centering_offsets: self.centering_offsets,
            interactions: self.interactions,
            bandwidth_scale: self.bandwidth_scale,
            encodings: self.encodings,
            feature_ranges: self.feature_ranges,
        }
    }

    pub fn basis(&self) -> &FeatureBasis {
        &self.basis
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Feature count `d`.
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn centering_offsets(&self) -> &[f64] {
        &self.centering_offsets
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn bandwidth_scale(&self) -> f64 {
        self.bandwidth_scale
    }

    pub fn encodings(&self) -> &[Encoding] {
        &self.encodings
    }

    pub fn feature_ranges(&self) -> &[[f64; 2]] {
        &self.feature_ranges
    }

    /// `S·d + 1 + S·(number of interaction terms)`.
    pub fn param_count(&self) -> usize {
        param_count(self.basis.size(), self.n_features(), self.interactions.len())
    }

    /// Uncentered `φ(xᵢ)ᵀwᵢ` for a value in original units.
    fn raw_shape(&self, i: usize, x: f64, buf: &mut [f64]) -> f64 {
        let t = self.standardization.apply(i, x) / self.widths[i];
        self.basis.fill_features(t, buf);
        dot(buf, self.weights.row(i))
    }

    fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(invalid(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.n_features()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("input must be finite, got {v}")));
        }
        Ok(())
    }

    fn additive_unchecked(&self, x: &[f64], buf: &mut [f64]) -> f64 {
        let mut g = self.w0;
        for (i, &xi) in x.iter().enumerate() {
            g += self.raw_shape(i, xi, buf) - self.centering_offsets[i];
        }
        for t in &self.interactions {
            let ti = self.standardization.apply(t.i, x[t.i]) / self.widths[t.i];
            let tj = self.standardization.apply(t.j, x[t.j]) / self.widths[t.j];
            self.basis.fill_pair_features(ti, tj, buf);
            g += dot(buf, &t.weights);
        }
        g
    }

    /// Additive predictor `g(x)` for one row in original units.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        self.check_row(x)?;
        let mut buf = vec![0.0; self.basis.size()];
        Ok(self.additive_unchecked(x, &mut buf))
    }

    /// `g` on every row of `x`.
    pub fn predict_raw_batch(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.nrows() > 0 && x.ncols() != self.n_features() {
            return Err(invalid(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.n_features()
            )));
        }
        if !x.is_finite() {
            return Err(invalid("input must be finite"));
        }
        let s = self.basis.size();
        Ok((0..x.nrows())
            .into_par_iter()
            .map_init(|| vec![0.0; s], |buf, r| self.additive_unchecked(x.row(r), buf))
            .collect())
    }

    /// Mean response: `g(x)` for regression, `σ(g(x))` for classification.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut g = self.predict_raw_batch(x)?;
        if self.task == Task::BinaryClassification {
            g.iter_mut().for_each(|v| *v = sigmoid(*v));
        }
        Ok(g)
    }

    /// Shape function `fᵢ` evaluated on a grid in original units.
    pub fn shape_function(&self, i: usize, grid: &[f64], centered: bool) -> Result<ShapeTable> {
        if i >= self.n_features() {
            return Err(invalid(format!(
                "feature index {i} out of range (d = {})",
                self.n_features()
            )));
        }
        if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("grid must be finite, got {v}")));
        }
        let offset = if centered { self.centering_offsets[i] } else { 0.0 };
        let mut buf = vec![0.0; self.basis.size()];
        let values = grid
            .iter()
            .map(|&x| self.raw_shape(i, x, &mut buf) - offset)
            .collect();
        Ok(ShapeTable {
            feature_index: i,
            feature_name: self.feature_names[i].clone(),
            grid: grid.to_vec(),
            values,
            offset,
        })
    }

    /// Recomputes the centering offsets as the mean uncentered shape value
    /// over `rows` (original units) and moves the change into `w0`.
    /// Predictions are unchanged.
    pub fn recenter(&mut self, rows: &Matrix) -> Result<()> {
        let d = self.n_features();
        if rows.nrows() == 0 {
            return Err(invalid("cannot center on zero rows"));
        }
        if rows.ncols() != d || !rows.is_finite() {
            return Err(invalid("centering rows must be finite with d columns"));
        }
        let mut buf = vec![0.0; self.basis.size()];
        let n = rows.nrows() as f64;
        for i in 0..d {
            let mean = rows
                .rows()
                .map(|r| self.raw_shape(i, r[i], &mut buf))
                .sum::<f64>()
                / n;
            self.w0 += mean - self.centering_offsets[i];
            self.centering_offsets[i] = mean;
        }
        Ok(())
    }

    /// Weights in the stacked layout `[bias, w₁, …, w_d, w_ij…]` matching
    /// [`crate::solvers::stack_features`], with the offsets folded back into
    /// the bias.
    pub fn stacked_weights(&self) -> Vec<f64> {
        let bias = self.w0 - self.centering_offsets.iter().sum::<f64>();
        let mut w = Vec::with_capacity(self.param_count());
        w.push(bias);
        w.extend_from_slice(self.weights.as_slice());
        for t in &self.interactions {
            w.extend_from_slice(&t.weights);
        }
        w
    }

    /// Intercept of the additive form in which every shape function is
    /// uncentered (the raw solver bias).
    pub fn raw_bias(&self) -> f64 {
        self.w0 - self.centering_offsets.iter().sum::<f64>()
    }
}

/// `S·d + 1 + S·interactions`.
pub fn param_count(basis_size: usize, d: usize, interactions: usize) -> usize {
    basis_size * d + 1 + basis_size * interactions
}

/// Logistic function, evaluated without overflow for either sign.
pub fn sigmoid(g: f64) -> f64 {
    if g >= 0.0 {
        1.0 / (1.0 + (-g).exp())
    } else {
        let e = g.exp();
        e / (1.0 + e)
    }
}
