//! Evaluation metrics: AUC, error rate, MSE, RMSE.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Auc,
    ErrorRate,
    Mse,
    Rmse,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Auc => "auc",
            Self::ErrorRate => "error_rate",
            Self::Mse => "mse",
            Self::Rmse => "rmse",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(Self::Auc),
            "error_rate" | "err" => Ok(Self::ErrorRate),
            "mse" => Ok(Self::Mse),
            "rmse" => Ok(Self::Rmse),
            _ => Err(invalid(format!("unknown metric '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub metric: Metric,
    pub value: f64,
    pub n: usize,
}

impl EvalResult {
    pub fn compute(metric: Metric, scores: &[f64], targets: &[f64]) -> Result<Self> {
        let value = match metric {
            Metric::Auc => auc(scores, targets)?,
            Metric::ErrorRate => error_rate(scores, targets, 0.5)?,
            Metric::Mse => mse(scores, targets)?,
            Metric::Rmse => rmse(scores, targets)?,
        };
        Ok(Self {
            metric,
            value,
            n: scores.len(),
        })
    }
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(invalid("metrics need at least one value"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(invalid("metric inputs must be finite"));
    }
    Ok(())
}

fn check_labels(labels: &[f64]) -> Result<()> {
    if labels.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(invalid("labels must be 0 or 1"));
    }
    Ok(())
}

/// Area under the ROC curve: the fraction of (positive, negative) pairs
/// ranked correctly, ties counting one half. Rank-sum with midranks.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_pair(scores, labels)?;
    check_labels(labels)?;
    let n_pos = labels.iter().filter(|&&v| v == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k] == 1.0).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Fraction of rows where `score ≥ threshold` disagrees with the label.
pub fn error_rate(scores: &[f64], labels: &[f64], threshold: f64) -> Result<f64> {
    check_pair(scores, labels)?;
    check_labels(labels)?;
    let wrong = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| (**s >= threshold) != (**l == 1.0))
        .count();
    Ok(wrong as f64 / scores.len() as f64)
}

pub fn mse(pred: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(pred, y)?;
    Ok(pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64)
}

pub fn rmse(pred: &[f64], y: &[f64]) -> Result<f64> {
    mse(pred, y).map(f64::sqrt)
}
