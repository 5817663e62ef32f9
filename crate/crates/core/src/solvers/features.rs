use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::matrix::{dot, Matrix};
use crate::rff::FeatureBasis;

/// Rows per chunk in reductions over the design matrix. Fixed so the
/// summation order, and therefore every bit of the result, does not depend
/// on the thread count.
pub const REDUCTION_CHUNK: usize = 512;

/// Design matrix `Φ` whose row `n` is `[1, φ(x₁ₙ), …, φ(x_dₙ), φ(xᵢₙ, xⱼₙ)…]`.
/// Column 0 is the bias coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedFeatures {
    phi: Matrix,
}

impl StackedFeatures {
    /// Wraps an explicit design matrix; column 0 is treated as the bias.
    pub fn from_matrix(phi: Matrix) -> Result<Self> {
        if phi.ncols() == 0 {
            return Err(invalid("design matrix needs at least one column"));
        }
        if !phi.is_finite() {
            return Err(invalid("design matrix must be finite"));
        }
        Ok(Self { phi })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn n_rows(&self) -> usize {
        self.phi.nrows()
    }

    /// `D*`.
    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        self.phi.row(r)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.phi
    }

    /// `Σₙ f(n, φₙ) · φₙ`, reduced chunk by chunk in row order.
    pub(crate) fn weighted_row_sum<F>(&self, rows: Option<&[usize]>, f: F) -> Vec<f64>
    where
        F: Fn(usize, &[f64]) -> f64 + Sync,
    {
        let dim = self.dim();
        let accumulate = |idx: &mut dyn Iterator<Item = usize>| {
            let mut acc = vec![0.0; dim];
            for r in idx {
                let row = self.phi.row(r);
                let s = f(r, row);
                if s != 0.0 {
                    acc.iter_mut().zip(row).for_each(|(a, v)| *a += s * v);
                }
            }
            acc
        };
        let partials: Vec<Vec<f64>> = match rows {
            None => (0..self.n_rows())
                .collect::<Vec<_>>()
                .par_chunks(REDUCTION_CHUNK)
                .map(|c| accumulate(&mut c.iter().copied()))
                .collect(),
            Some(idx) => idx
                .par_chunks(REDUCTION_CHUNK)
                .map(|c| accumulate(&mut c.iter().copied()))
                .collect(),
        };
        let mut out = vec![0.0; dim];
        for p in partials {
            out.iter_mut().zip(&p).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// `Φᵀ(Φp)`, never forming `ΦᵀΦ`.
    pub fn gram_apply(&self, p: &[f64]) -> Vec<f64> {
        self.weighted_row_sum(None, |_, row| dot(row, p))
    }

    /// `Φᵀy`.
    pub fn transpose_apply(&self, y: &[f64]) -> Vec<f64> {
        self.weighted_row_sum(None, |r, _| y[r])
    }

    /// `Φw`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).into_par_iter().map(|r| dot(self.phi.row(r), w)).collect()
    }
}

/// Builds the stacked design matrix from standardized inputs.
///
/// Feature `i` of row `n` enters `φ` as `xᵢₙ / widths[i]`. Each pair in
/// `interactions` appends one block of `S` pairwise features.
pub fn stack_features(
    basis: &FeatureBasis,
    widths: &[f64],
    x: &Matrix,
    interactions: &[(usize, usize)],
) -> Result<StackedFeatures> {
    let d = widths.len();
    if x.nrows() > 0 && x.ncols() != d {
        return Err(invalid(format!("{} columns but {} widths", x.ncols(), d)));
    }
    if let Some(b) = widths.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(invalid(format!("kernel widths must be positive, got {b}")));
    }
    if !x.is_finite() {
        return Err(invalid("inputs must be finite"));
    }
    for &(i, j) in interactions {
        if i >= d || j >= d || i == j {
            return Err(invalid(format!("invalid interaction pair {i}:{j} for d = {d}")));
        }
    }
    if !interactions.is_empty() && !basis.has_pair_frequencies() {
        return Err(Error::Config("interactions need a basis with pair frequencies".into()));
    }
    let s = basis.size();
    let dim = 1 + s * (d + interactions.len());
    let mut data = vec![0.0; x.nrows() * dim];
    data.par_chunks_mut(dim.max(1)).enumerate().for_each(|(r, out)| {
        let row = x.row(r);
        out[0] = 1.0;
        for i in 0..d {
            basis.fill_features(row[i] / widths[i], &mut out[1 + i * s..1 + (i + 1) * s]);
        }
        for (k, &(i, j)) in interactions.iter().enumerate() {
            let start = 1 + (d + k) * s;
            basis.fill_pair_features(row[i] / widths[i], row[j] / widths[j], &mut out[start..start + s]);
        }
    });
    Ok(StackedFeatures {
        phi: Matrix::from_vec(x.nrows(), dim, data)?,
    })
}
