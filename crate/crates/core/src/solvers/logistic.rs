use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{FitConfig, SolverReport, StackedFeatures, WeightInit};
use crate::error::{invalid, Error, Result};
use crate::matrix::dot;
use crate::model::sigmoid;
use crate::rff::seeded_rng;

const SHUFFLE_STREAM: u64 = 4;
const INIT_STREAM: u64 = 5;
/// Epochs without validation improvement before stopping.
pub const PATIENCE: usize = 10;

/// `log(1 + exp(t))` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Regularized logistic loss
/// `(1/|B|) Σ_B log(1 + exp(−ỹ wᵀφ)) + (λ/2n)‖w₋bias‖²`, `ỹ = 2y − 1`,
/// over a batch `B` of rows (all rows by default). `n` is always the full
/// row count.
#[derive(Debug, Clone, Copy)]
pub struct LogisticObjective<'a> {
    pub features: &'a StackedFeatures,
    /// Labels in {0, 1}.
    pub y: &'a [f64],
    pub lambda: f64,
    pub regularize_bias: bool,
}

impl LogisticObjective<'_> {
    fn penalty_start(&self) -> usize {
        usize::from(!self.regularize_bias)
    }

    fn reg_scale(&self) -> f64 {
        self.lambda / self.features.n_rows() as f64
    }

    pub fn loss(&self, w: &[f64], rows: Option<&[usize]>) -> f64 {
        let term = |r: usize| {
            let sign = 2.0 * self.y[r] - 1.0;
            softplus(-sign * dot(self.features.row(r), w))
        };
        let (sum, count) = match rows {
            None => ((0..self.features.n_rows()).map(term).sum::<f64>(), self.features.n_rows()),
            Some(idx) => (idx.iter().map(|&r| term(r)).sum::<f64>(), idx.len()),
        };
        let ww: f64 = w[self.penalty_start()..].iter().map(|v| v * v).sum();
        sum / count as f64 + 0.5 * self.reg_scale() * ww
    }

    pub fn gradient(&self, w: &[f64], rows: Option<&[usize]>) -> Vec<f64> {
        let count = rows.map_or(self.features.n_rows(), <[usize]>::len) as f64;
        let mut g = self.features.weighted_row_sum(rows, |r, row| {
            let sign = 2.0 * self.y[r] - 1.0;
            -sign * sigmoid(-sign * dot(row, w)) / count
        });
        let reg = self.reg_scale();
        for k in self.penalty_start()..g.len() {
            g[k] += reg * w[k];
        }
        g
    }
}

/// Mean unregularized log-loss of `σ(Φw)` against labels in {0, 1}.
pub fn log_loss(features: &StackedFeatures, y: &[f64], w: &[f64]) -> f64 {
    let total: f64 = (0..features.n_rows())
        .map(|r| softplus(-(2.0 * y[r] - 1.0) * dot(features.row(r), w)))
        .sum();
    total / features.n_rows() as f64
}

fn check_labels(features: &StackedFeatures, y: &[f64]) -> Result<()> {
    if y.len() != features.n_rows() {
        return Err(invalid(format!("{} labels for {} rows", y.len(), features.n_rows())));
    }
    if features.n_rows() == 0 {
        return Err(invalid("logistic fit needs at least one row"));
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(invalid("labels must be 0 or 1"));
    }
    Ok(())
}

/// Mini-batch SGD on the [`LogisticObjective`]. See
/// [`fit_logistic_sgd_with_validation`].
pub fn fit_logistic_sgd(
    features: &StackedFeatures,
    y: &[f64],
    cfg: &FitConfig,
) -> Result<(Vec<f64>, SolverReport)> {
    fit_logistic_sgd_with_validation(features, y, None, cfg)
}

/// Mini-batch SGD with seeded shuffling (ChaCha20 from `cfg.seed`) and a
/// learning rate multiplied by `sgd_lr_decay` after every epoch.
///
/// With validation data the weights with the lowest validation log-loss are
/// kept, and training stops after [`PATIENCE`] epochs without improvement.
/// `converged` means the full objective changed by at most `sgd_tol`
/// (relative) over the last epoch.
pub fn fit_logistic_sgd_with_validation(
    features: &StackedFeatures,
    y: &[f64],
    validation: Option<(&StackedFeatures, &[f64])>,
    cfg: &FitConfig,
) -> Result<(Vec<f64>, SolverReport)> {
    cfg.validate()?;
    check_labels(features, y)?;
    if let Some((vf, vy)) = validation {
        check_labels(vf, vy)?;
        if vf.dim() != features.dim() {
            return Err(invalid("validation features have a different dimension"));
        }
    }
    let start = Instant::now();
    let n = features.n_rows();
    let dim = features.dim();
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    let degenerate = positives == 0 || positives == n;
    if degenerate {
        log::warn!("training labels contain a single class; the fit is degenerate");
    }

    let objective = LogisticObjective {
        features,
        y,
        lambda: cfg.lambda,
        regularize_bias: cfg.regularize_bias,
    };
    let mut w = match cfg.init {
        WeightInit::Zero => vec![0.0; dim],
        WeightInit::Gaussian { scale, seed } => {
            let mut rng = seeded_rng(seed, INIT_STREAM);
            (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
        }
    };
    let mut rng = seeded_rng(cfg.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..n).collect();
    let mut lr = cfg.sgd_lr;
    let mut loss = objective.loss(&w, None);
    let mut last_change = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stale = 0;
    let mut epochs = 0;
    let mut early_stopped = false;

    for _ in 0..cfg.sgd_epochs {
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for batch in order.chunks(cfg.sgd_batch) {
            let g = objective.gradient(&w, Some(batch));
            w.iter_mut().zip(&g).for_each(|(wk, gk)| *wk -= lr * gk);
        }
        lr *= cfg.sgd_lr_decay;
        epochs += 1;
        let new_loss = objective.loss(&w, None);
        if !new_loss.is_finite() {
            return Err(Error::NumericBreakdown {
                iteration: epochs,
                detail: format!("logistic loss became {new_loss}"),
            });
        }
        last_change = (loss - new_loss).abs() / loss.abs().max(1e-12);
        loss = new_loss;

        if let Some((vf, vy)) = validation {
            let vloss = log_loss(vf, vy, &w);
            match &best {
                Some((b, _)) if vloss >= *b => {
                    stale += 1;
                    if stale >= PATIENCE {
                        early_stopped = true;
                        break;
                    }
                }
                _ => {
                    best = Some((vloss, w.clone()));
                    stale = 0;
                }
            }
        }
    }
    if let Some((_, bw)) = best {
        if early_stopped {
            w = bw;
            loss = objective.loss(&w, None);
        }
    }
    let converged = early_stopped || last_change <= cfg.sgd_tol;
    let report = SolverReport {
        method: "sgd".into(),
        iterations: epochs,
        final_residual_or_loss: loss,
        tolerance: cfg.sgd_tol,
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
        degenerate,
        early_stopped,
    };
    Ok((w, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy(n: usize, dim: usize, seed: u64) -> (StackedFeatures, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut r: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                r[0] = 1.0;
                r
            })
            .collect();
        let y = rows
            .iter()
            .map(|r| {
                let m = 1.5 * r[1] - r[2] + 0.3;
                if rng.random::<f64>() < sigmoid(m) { 1.0 } else { 0.0 }
            })
            .collect();
        (StackedFeatures::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (phi, y) = toy(60, 6, 2);
        let obj = LogisticObjective {
            features: &phi,
            y: &y,
            lambda: 0.7,
            regularize_bias: false,
        };
        let batch: Vec<usize> = (5..37).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
            for rows in [None, Some(batch.as_slice())] {
                let g = obj.gradient(&w, rows);
                for k in 0..6 {
                    let h = 1e-5;
                    let (mut a, mut b) = (w.clone(), w.clone());
                    a[k] += h;
                    b[k] -= h;
                    let fd = (obj.loss(&a, rows) - obj.loss(&b, rows)) / (2.0 * h);
                    assert!((fd - g[k]).abs() <= 1e-5 * g[k].abs().max(1e-3), "{fd} vs {}", g[k]);
                }
            }
        }
    }

    #[test]
    fn identical_rows_balanced_labels() {
        let rows = vec![[1.0, 0.4, -0.3]; 40];
        let y: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let phi = StackedFeatures::from_rows(&rows).unwrap();
        let (w, rep) = fit_logistic_sgd(&phi, &y, &FitConfig::default()).unwrap();
        assert!(!rep.degenerate);
        for r in 0..40 {
            assert!((sigmoid(dot(phi.row(r), &w)) - 0.5).abs() <= 0.01);
        }
    }

    // Newton's method on the two-parameter problem.
    fn newton_optimum(obj: &LogisticObjective) -> f64 {
        let mut w = [0.0, 0.0];
        for _ in 0..50 {
            let g = obj.gradient(&w, None);
            let n = obj.features.n_rows() as f64;
            let mut h = [[0.0; 2]; 2];
            for r in 0..obj.features.n_rows() {
                let row = obj.features.row(r);
                let p = sigmoid(dot(row, &w));
                for i in 0..2 {
                    for j in 0..2 {
                        h[i][j] += p * (1.0 - p) * row[i] * row[j] / n;
                    }
                }
            }
            h[1][1] += obj.lambda / n;
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            w[0] -= (h[1][1] * g[0] - h[0][1] * g[1]) / det;
            w[1] -= (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        }
        obj.loss(&w, None)
    }

    #[test]
    fn separable_toy_reaches_newton_optimum() {
        let rows: Vec<[f64; 2]> = (0..40).map(|i| [1.0, if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
        let y: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let phi = StackedFeatures::from_rows(&rows).unwrap();
        let cfg = FitConfig {
            sgd_epochs: 400,
            sgd_batch: 8,
            sgd_lr: 0.5,
            sgd_lr_decay: 0.995,
            ..FitConfig::default()
        };
        let (w, rep) = fit_logistic_sgd(&phi, &y, &cfg).unwrap();
        let acc = (0..40).filter(|&r| (dot(phi.row(r), &w) >= 0.0) == (y[r] == 1.0)).count();
        assert_eq!(acc, 40);
        let obj = LogisticObjective {
            features: &phi,
            y: &y,
            lambda: 1.0,
            regularize_bias: false,
        };
        let opt = newton_optimum(&obj);
        assert!((rep.final_residual_or_loss - opt).abs() <= 1e-3, "{} vs {opt}", rep.final_residual_or_loss);
    }

    #[test]
    fn different_inits_same_optimum() {
        let (phi, y) = toy(500, 8, 4);
        let a = FitConfig {
            sgd_batch: 50,
            sgd_epochs: 200,
            sgd_lr: 0.5,
            ..FitConfig::default()
        };
        let b = FitConfig {
            init: WeightInit::Gaussian { scale: 1.0, seed: 17 },
            ..a.clone()
        };
        let (_, ra) = fit_logistic_sgd(&phi, &y, &a).unwrap();
        let (_, rb) = fit_logistic_sgd(&phi, &y, &b).unwrap();
        let gap = (ra.final_residual_or_loss - rb.final_residual_or_loss).abs();
        assert!(gap <= 1e-4, "{gap}: {} vs {}", ra.final_residual_or_loss, rb.final_residual_or_loss);
    }

    #[test]
    fn full_batch_loss_non_increasing() {
        let (phi, y) = toy(120, 5, 6);
        let obj = LogisticObjective {
            features: &phi,
            y: &y,
            lambda: 1.0,
            regularize_bias: false,
        };
        let mut prev = f64::INFINITY;
        for epochs in 1..15 {
            let cfg = FitConfig {
                sgd_batch: 120,
                sgd_lr: 0.05,
                sgd_epochs: epochs,
                ..FitConfig::default()
            };
            let (w, _) = fit_logistic_sgd(&phi, &y, &cfg).unwrap();
            let l = obj.loss(&w, None);
            assert!(l <= prev + 1e-15);
            prev = l;
        }
    }

    #[test]
    fn single_class_is_degenerate() {
        let rows = vec![[1.0, 0.2]; 10];
        let phi = StackedFeatures::from_rows(&rows).unwrap();
        let (_, rep) = fit_logistic_sgd(&phi, &[1.0; 10], &FitConfig::default()).unwrap();
        assert!(rep.degenerate);
        assert!(fit_logistic_sgd(&phi, &[2.0; 10], &FitConfig::default()).is_err());
    }

    #[test]
    fn validation_early_stop_keeps_best() {
        let (phi, y) = toy(200, 30, 9);
        let (vphi, vy) = toy(100, 30, 10);
        let cfg = FitConfig {
            lambda: 0.0,
            sgd_epochs: 300,
            sgd_lr: 1.0,
            sgd_lr_decay: 1.0,
            ..FitConfig::default()
        };
        let (w, rep) = fit_logistic_sgd_with_validation(&phi, &y, Some((&vphi, &vy)), &cfg).unwrap();
        if rep.early_stopped {
            assert!(rep.iterations < 300);
        }
        assert!(log_loss(&vphi, &vy, &w).is_finite());
    }
}
