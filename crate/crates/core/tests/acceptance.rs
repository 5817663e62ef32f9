//! Acceptance suite: one line per criterion, PASS or FAIL.
//!
//! Criterion 6 needs the California Housing CSV; point `GPNAM_CA_HOUSING`
//! at a copy (either the `MedHouseVal` export or the `median_house_value`
//! file). Without it the criterion is reported as FAIL (data unavailable)
//! and does not abort the run; every other failure exits non-zero.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use gpnam_core::data::{self, synth_additive, synth_additive_with, Dataset, TrueShape};
use gpnam_core::metrics::rmse;
use gpnam_core::model::{param_count, sigmoid, Task};
use gpnam_core::rff::{approx_kernel, build_basis, rbf_kernel, BasisMode};
use gpnam_core::solvers::{
    solve_ridge_cg, stack_features, FitConfig, LogisticObjective, StackedFeatures, WeightInit,
};
use gpnam_core::train::{self, fit_model, Bandwidth, TrainConfig};
use gpnam_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Required input missing; reported as FAIL without aborting.
    Unavailable(String),
}

type Check = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Cholesky solve of a dense SPD system.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    x
}

/// Dense `(λP + ΦᵀΦ) w = Φᵀy`, `P` the identity without the bias entry.
fn dense_ridge(phi: &StackedFeatures, y: &[f64], lambda: f64) -> Vec<f64> {
    let dim = phi.dim();
    let mut a = vec![vec![0.0; dim]; dim];
    let mut v = vec![0.0; dim];
    for r in 0..phi.n_rows() {
        let row = phi.row(r);
        for i in 0..dim {
            v[i] += row[i] * y[r];
            for j in 0..=i {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            a[j][i] = a[i][j];
        }
        if i > 0 {
            a[i][i] += lambda;
        }
    }
    cholesky_solve(&a, &v)
}

/// Ordinary least squares with intercept, fitted on `train`, RMSE on `test`.
fn linear_rmse(train: &Dataset, test: &Dataset) -> f64 {
    let design = |x: &Matrix| -> StackedFeatures {
        let rows: Vec<Vec<f64>> = x.rows().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
        StackedFeatures::from_rows(&rows).unwrap()
    };
    let w = dense_ridge(&design(&train.x), &train.y, 0.0);
    let pred = design(&test.x).apply(&w);
    rmse(&pred, &test.y).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<(f64, f64)> = (0..200)
        .map(|_| (rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)))
        .collect();
    let errors = |s: usize| -> Vec<f64> {
        let basis = build_basis(s, BasisMode::Grid, 0).unwrap();
        pairs
            .iter()
            .map(|&(x, xp)| (approx_kernel(&basis, x, xp, 1.0).unwrap() - rbf_kernel(&[x], &[xp], 1.0).unwrap()).abs())
            .collect()
    };
    let e100 = errors(100);
    let max100 = e100.iter().copied().fold(0.0, f64::max);
    let med100 = median(e100);
    let (med50, med2000) = (median(errors(50)), median(errors(2000)));
    let t = start.elapsed();
    check(
        max100 <= 0.15 && med100 <= 0.05 && med2000 < med50 && t < Duration::from_secs(5),
        format!(
            "S=100 max {max100:.4} (≤0.15) median {med100:.4} (≤0.05); median S=2000 {med2000:.2e} < S=50 {med50:.2e}; {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut max_dim = 0;
    for k in 0..25 {
        let n = rng.random_range(20..=200);
        let d = rng.random_range(1..=5);
        let s = rng.random_range(5..=(299 / d).min(60));
        let mode = if k % 2 == 0 { BasisMode::Grid } else { BasisMode::MonteCarlo };
        let basis = build_basis(s, mode, k).unwrap();
        let widths: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..2.0)).collect();
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-2.5..2.5)).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let phi = stack_features(&basis, &widths, &x, &[]).unwrap();
        max_dim = max_dim.max(phi.dim());
        let (w, _) = solve_ridge_cg(&phi, &y, &FitConfig::default()).unwrap();
        let oracle = dense_ridge(&phi, &y, 1.0);
        let scale = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = w.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
        worst = worst.max(err);
    }
    let t = start.elapsed();
    check(
        worst <= 1e-6 && t < Duration::from_secs(10),
        format!("25 problems (D* ≤ {max_dim}), worst relative ∞-norm error {worst:.2e} (≤1e-6); {:.2}s", t.as_secs_f64()),
    )
}

fn classification_synth(n: usize, d: usize, seed: u64) -> Dataset {
    let mut ds = synth_additive(n, d, 0.0, seed).unwrap().dataset;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mean = ds.y.iter().sum::<f64>() / ds.y.len() as f64;
    for v in ds.y.iter_mut() {
        *v = if rng.random::<f64>() < sigmoid(2.0 * (*v - mean)) { 1.0 } else { 0.0 };
    }
    ds.task = Task::BinaryClassification;
    ds
}

fn criterion_3() -> Outcome {
    // Full-batch steps; the slowest direction only has λ/n curvature, so the
    // step budget is sized against n.
    let ds = classification_synth(1000, 3, 11);
    let base = TrainConfig {
        basis_size: 20,
        fit: FitConfig {
            sgd_lr: 1.5,
            sgd_batch: 1000,
            sgd_epochs: 8000,
            sgd_lr_decay: 1.0,
            sgd_tol: 1e-12,
            ..FitConfig::default()
        },
        ..TrainConfig::default()
    };
    let other = TrainConfig {
        fit: FitConfig {
            init: WeightInit::Gaussian { scale: 0.5, seed: 99 },
            ..base.fit.clone()
        },
        ..base.clone()
    };
    let a = fit_model(&ds, None, &base, 1.0).unwrap().report.final_residual_or_loss;
    let b = fit_model(&ds, None, &other, 1.0).unwrap().report.final_residual_or_loss;
    let gap = (a - b).abs();

    let reg = synth_additive(3000, 3, 0.2, 5).unwrap().dataset;
    let cfg = TrainConfig::default();
    let m1 = train::train(&reg, &cfg).unwrap().model.to_json().unwrap();
    let m2 = train::train(&reg, &cfg).unwrap().model.to_json().unwrap();
    let identical = m1.as_bytes() == m2.as_bytes();
    check(
        gap <= 1e-4 && identical,
        format!("loss gap {gap:.2e} (≤1e-4) between inits ({a:.6} vs {b:.6}); grid regression model files byte-identical: {identical}"),
    )
}

fn criterion_4() -> Outcome {
    // Published counts: FICO 3901, LCD 501 (S = 100).
    let fico = param_count(100, 39, 0);
    let lcd = param_count(100, 5, 0);
    check(fico == 3901 && lcd == 501, format!("FICO {fico} (3901), LCD {lcd} (501)"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let synth = synth_additive(20_000, 4, 0.3, 3).unwrap();
    let cfg = TrainConfig {
        bandwidth: Bandwidth::Auto,
        ..TrainConfig::default()
    };
    let out = train::train(&synth.dataset, &cfg).unwrap();
    let test_rmse = out.test[0].value;
    let grid: Vec<f64> = (0..=400).map(|k| -2.0 + 4.0 * k as f64 / 400.0).collect();
    let corr: Vec<f64> = synth
        .shapes
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let learned = out.model.shape_function(i, &grid, true).unwrap().values;
            let truth: Vec<f64> = grid.iter().map(|&x| h.eval(x)).collect();
            pearson(&learned, &truth)
        })
        .collect();
    let t = start.elapsed();
    let min_corr = corr.iter().copied().fold(1.0, f64::min);
    check(
        test_rmse <= 0.36 && min_corr >= 0.95 && t < Duration::from_secs(60),
        format!(
            "test RMSE {test_rmse:.4} (≤0.36), shape correlations {:?} (≥0.95), bandwidth {}; {:.1}s",
            corr.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            out.model.bandwidth_scale(),
            t.as_secs_f64()
        ),
    )
}

fn find_ca_housing() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("GPNAM_CA_HOUSING") {
        return Some(PathBuf::from(p));
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    ["california_housing.csv", "housing.csv", "cal_housing.csv"]
        .iter()
        .map(|f| root.join(f))
        .find(|p| p.exists())
}

fn criterion_6() -> Outcome {
    let Some(path) = find_ca_housing() else {
        return Outcome::Unavailable(
            "California Housing CSV not found (set GPNAM_CA_HOUSING); the data is not bundled and cannot be fetched here".into(),
        );
    };
    let start = Instant::now();
    let header = std::fs::read_to_string(&path).unwrap_or_default();
    let target = ["MedHouseVal", "median_house_value", "medianHouseValue"]
        .into_iter()
        .find(|t| header.lines().next().is_some_and(|h| h.contains(t)));
    let Some(target) = target else {
        return Outcome::Fail(format!("{}: no known target column", path.display()));
    };
    let (ds, _) = match data::load_csv(&path, target, Task::Regression) {
        Ok(v) => v,
        Err(e) => return Outcome::Fail(format!("{}: {e}", path.display())),
    };
    let (mut tr, mut va, mut te) = data::split(&ds, [0.7, 0.1, 0.2], 0).unwrap();
    let mean = tr.y.iter().sum::<f64>() / tr.y.len() as f64;
    let sd = (tr.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / tr.y.len() as f64).sqrt();
    for part in [&mut tr, &mut va, &mut te] {
        part.y.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    let cfg = TrainConfig {
        bandwidth: Bandwidth::Auto,
        ..TrainConfig::default()
    };
    let out = train::train_on_splits(&tr, &va, &te, &cfg).unwrap();
    let gp = out.test[0].value;
    let std_tr = data::standardize(&tr);
    let std_te = data::standardize_with(&te, std_tr.standardization.as_ref().unwrap()).unwrap();
    let lin = linear_rmse(&std_tr, &std_te);
    let t = start.elapsed();
    // ≤ 0.60 also clears the reported linear baseline 0.7354 by more than 0.10.
    check(
        gp <= 0.60 && t < Duration::from_secs(120),
        format!("GP-NAM test RMSE {gp:.4} (≤0.60); own linear baseline {lin:.4}; {:.1}s", t.as_secs_f64()),
    )
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (name, shapes) in [
        ("sin", vec![TrueShape::Sin3, TrueShape::Sin3]),
        ("quadratic", vec![TrueShape::Square, TrueShape::Square]),
        ("sin+quadratic", vec![TrueShape::Sin3, TrueShape::Square, TrueShape::Identity]),
    ] {
        let ds = synth_additive_with(5000, &shapes, 0.1, 17).unwrap().dataset;
        let (tr, va, te) = data::split(&ds, [0.8, 0.1, 0.1], 1).unwrap();
        let cfg = TrainConfig {
            bandwidth: Bandwidth::Auto,
            ..TrainConfig::default()
        };
        let gp = train::train_on_splits(&tr, &va, &te, &cfg).unwrap().test[0].value;
        let lin = linear_rmse(&tr, &te);
        worst = worst.max(gp / lin);
        details.push(format!("{name}: {gp:.3}/{lin:.3}"));
    }
    check(worst <= 0.5, format!("GP-NAM/linear RMSE {} (worst ratio {worst:.3}, ≤0.5)", details.join(", ")))
}

fn criterion_8() -> Outcome {
    let ds = classification_synth(400, 3, 23);
    let std = data::standardize(&ds);
    let basis = build_basis(20, BasisMode::Grid, 0).unwrap();
    let phi = stack_features(&basis, &[1.0; 3], &std.x, &[]).unwrap();
    let obj = LogisticObjective {
        features: &phi,
        y: &std.y,
        lambda: 1.0,
        regularize_bias: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let batch: Vec<usize> = (0..64).map(|_| rng.random_range(0..400)).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let w: Vec<f64> = (0..phi.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for rows in [None, Some(batch.as_slice())] {
            let g = obj.gradient(&w, rows);
            let h = 1e-6;
            let fd: Vec<f64> = (0..w.len())
                .map(|k| {
                    let (mut a, mut b) = (w.clone(), w.clone());
                    a[k] += h;
                    b[k] -= h;
                    (obj.loss(&a, rows) - obj.loss(&b, rows)) / (2.0 * h)
                })
                .collect();
            let num = g.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let den = fd.iter().map(|y| y * y).sum::<f64>().sqrt();
            worst = worst.max(num / den);
        }
    }
    check(worst <= 1e-5, format!("worst relative gradient error {worst:.2e} over 5 points × (full, mini-batch) (≤1e-5)"))
}

fn criterion_9() -> Outcome {
    let ds = classification_synth(10_000, 5, 41);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let out = pool.install(|| train::train(&ds, &TrainConfig::default())).unwrap();
    let t = start.elapsed();
    let auc = out.test.iter().find(|e| e.metric == gpnam_core::metrics::Metric::Auc).map_or(f64::NAN, |e| e.value);
    check(
        t < Duration::from_secs(10),
        format!(
            "n=10000, d=5, S=100 classification on 1 thread: {:.2}s (<10s), {} epochs, test AUC {auc:.4}",
            t.as_secs_f64(),
            out.report.iterations
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, Check); 9] = [
        (1, "kernel approximation", criterion_1),
        (2, "CG oracle equivalence", criterion_2),
        (3, "convexity and determinism", criterion_3),
        (4, "parameter count", criterion_4),
        (5, "synthetic shape recovery", criterion_5),
        (6, "CA Housing reproduction", criterion_6),
        (7, "nonlinearity vs linear", criterion_7),
        (8, "logistic gradient check", criterion_8),
        (9, "training time at LCD scale", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut unavailable = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        let label = format!("criterion {id}");
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str()) || name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        match f() {
            Outcome::Pass(d) => println!("PASS {label} ({name}): {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {label} ({name}): {d}");
            }
            Outcome::Unavailable(d) => {
                unavailable += 1;
                println!("FAIL {label} ({name}): data unavailable: {d}");
            }
        }
    }
    println!(
        "acceptance: {} of {ran} criteria passed, {failed} failed, {unavailable} failed for missing data",
        ran - failed - unavailable
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
