use super::Matrix;
use crate::error::{Error, Result};

/// Mean of squared differences over every entry.
pub fn loss_mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.data.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let sum: f64 = pred
        .data
        .iter()
        .zip(&target.data)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.data.len() as f64)
}

fn check_labels(m: &Matrix, labels: &[usize]) -> Result<()> {
    if labels.len() != m.rows || m.rows == 0 {
        return Err(Error::Shape(format!(
            "{} labels for a batch of {}",
            labels.len(),
            m.rows
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= m.cols) {
        return Err(Error::Input(format!("label {bad} out of range for {} classes", m.cols)));
    }
    Ok(())
}

/// Mean negative log-likelihood of already-normalized probabilities.
pub fn loss_cross_entropy(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    check_labels(probs, labels)?;
    let sum: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| -probs.row(i)[l].ln())
        .sum();
    Ok(sum / labels.len() as f64)
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Cross-entropy computed from pre-softmax scores via log-sum-exp.
pub fn cross_entropy_from_logits(logits: &Matrix, labels: &[usize]) -> Result<f64> {
    check_labels(logits, labels)?;
    let sum: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let row = logits.row(i);
            log_sum_exp(row) - row[l]
        })
        .sum();
    Ok(sum / labels.len() as f64)
}

pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}
