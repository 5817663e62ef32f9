use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{invalid, Result};
use crate::matrix::Matrix;
use crate::model::Task;
use crate::rff::seeded_rng;

const SYNTH_STREAM: u64 = 3;

/// Ground-truth shape functions of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueShape {
    Sin3,
    Square,
    Tanh2,
    Abs,
    Identity,
}

impl TrueShape {
    pub const CYCLE: [TrueShape; 5] = [Self::Sin3, Self::Square, Self::Tanh2, Self::Abs, Self::Identity];

    /// Shape used for feature `i` by [`synth_additive`].
    pub fn for_feature(i: usize) -> Self {
        Self::CYCLE[i % Self::CYCLE.len()]
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Sin3 => (3.0 * x).sin(),
            Self::Square => x * x,
            Self::Tanh2 => (2.0 * x).tanh(),
            Self::Abs => x.abs(),
            Self::Identity => x,
        }
    }
}

/// Synthetic data with the shapes that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub dataset: Dataset,
    pub shapes: Vec<TrueShape>,
}

/// `x ~ U[−2, 2]^d`, `y = Σ hᵢ(xᵢ) + N(0, noise_sd²)` with `hᵢ` cycling
/// through sin(3x), x², tanh(2x), |x|, x.
pub fn synth_additive(n: usize, d: usize, noise_sd: f64, seed: u64) -> Result<SynthData> {
    let shapes: Vec<TrueShape> = (0..d).map(TrueShape::for_feature).collect();
    synth_additive_with(n, &shapes, noise_sd, seed)
}

/// As [`synth_additive`] with explicit shapes, one per feature.
pub fn synth_additive_with(
    n: usize,
    shapes: &[TrueShape],
    noise_sd: f64,
    seed: u64,
) -> Result<SynthData> {
    if n == 0 || shapes.is_empty() {
        return Err(invalid("synthetic data needs n ≥ 1 and d ≥ 1"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(invalid(format!("noise_sd must be finite and ≥ 0, got {noise_sd}")));
    }
    let d = shapes.len();
    let mut rng = seeded_rng(seed, SYNTH_STREAM);
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut target = 0.0;
        for h in shapes {
            let v: f64 = rng.random_range(-2.0..2.0);
            x.push(v);
            target += h.eval(v);
        }
        let eps: f64 = rng.sample(StandardNormal);
        y.push(if noise_sd > 0.0 { target + noise_sd * eps } else { target });
    }
    let names = (1..=d).map(|i| format!("x{i}")).collect();
    let dataset = Dataset::new(Matrix::from_vec(n, d, x)?, y, names, Task::Regression)?;
    Ok(SynthData {
        dataset,
        shapes: shapes.to_vec(),
    })
}
