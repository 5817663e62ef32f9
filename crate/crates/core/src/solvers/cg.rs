use std::time::Instant;

use super::{FitConfig, SolverReport, StackedFeatures};
use crate::error::{invalid, Error, Result};
use crate::matrix::{dot, norm2};

/// Result of a conjugate-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub w: Vec<f64>,
    pub iterations: usize,
    /// `‖r‖ / ‖v‖` from the recurrence (0 when `v = 0`).
    pub relative_residual: f64,
    pub converged: bool,
    /// Relative residual after every iteration, starting with 1 at `w = 0`.
    pub history: Vec<f64>,
}

/// Solves `A w = v` for symmetric positive definite `A`, starting from
/// `w = 0`, until `‖r‖/‖v‖ ≤ tol` or `max_iter` iterations.
pub fn conjugate_gradients<F>(mut apply_a: F, v: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid("right-hand side must be finite"));
    }
    let n = v.len();
    let v_norm = norm2(v);
    let mut w = vec![0.0; n];
    if v_norm == 0.0 {
        return Ok(CgOutcome {
            w,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            history: vec![0.0],
        });
    }
    let mut r = v.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut history = vec![1.0];
    let mut iterations = 0;
    let mut rel = 1.0;
    while rel > tol && iterations < max_iter {
        let ap = apply_a(&p);
        let pap = dot(&p, &ap);
        let alpha = rr / pap;
        if pap.is_nan() || pap <= 0.0 || !alpha.is_finite() {
            return Err(Error::NumericBreakdown {
                iteration: iterations,
                detail: format!("pᵀAp = {pap}"),
            });
        }
        for k in 0..n {
            w[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(Error::NumericBreakdown {
                iteration: iterations,
                detail: "non-finite residual".into(),
            });
        }
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
        iterations += 1;
        rel = rr.sqrt() / v_norm;
        history.push(rel);
    }
    Ok(CgOutcome {
        w,
        iterations,
        relative_residual: rel,
        converged: rel <= tol,
        history,
    })
}

/// Solves `(λI + ΦᵀΦ) w = Φᵀy` matrix-free. Without `regularize_bias` the
/// bias coordinate gets no `λ`.
pub fn solve_ridge_cg(
    features: &StackedFeatures,
    y: &[f64],
    cfg: &FitConfig,
) -> Result<(Vec<f64>, SolverReport)> {
    cfg.validate()?;
    if y.len() != features.n_rows() {
        return Err(invalid(format!("{} targets for {} rows", y.len(), features.n_rows())));
    }
    if features.n_rows() == 0 {
        return Err(invalid("ridge solve needs at least one row"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("targets must be finite"));
    }
    let start = Instant::now();
    let dim = features.dim();
    let v = features.transpose_apply(y);
    let max_iter = cfg.cg_max_iter.unwrap_or(2 * dim);
    let lambda = cfg.lambda;
    let skip = usize::from(!cfg.regularize_bias);
    let out = conjugate_gradients(
        |p| {
            let mut ap = features.gram_apply(p);
            for k in skip..dim {
                ap[k] += lambda * p[k];
            }
            ap
        },
        &v,
        cfg.cg_tol,
        max_iter,
    )?;
    if !out.converged {
        log::warn!(
            "conjugate gradients stopped after {} iterations at relative residual {:.3e}",
            out.iterations,
            out.relative_residual
        );
    }
    let report = SolverReport {
        method: "cg".into(),
        iterations: out.iterations,
        final_residual_or_loss: out.relative_residual,
        tolerance: cfg.cg_tol,
        converged: out.converged,
        wall_time_s: start.elapsed().as_secs_f64(),
        degenerate: false,
        early_stopped: false,
    };
    Ok((out.w, report))
}
