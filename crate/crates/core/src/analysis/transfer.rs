use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How much earlier a pretrained run reaches the best accuracy of a scratch run.
///
/// Epochs are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSavings {
    pub best_scratch_acc: f64,
    pub epoch_scratch_best: usize,
    pub epoch_pretrained_match: Option<usize>,
    pub savings_fraction: Option<f64>,
}

/// Compares per-epoch test accuracies. `None` entries are missing measurements and are
/// rejected.
pub fn transfer_savings(scratch: &[Option<f64>], pretrained: &[Option<f64>]) -> Result<TransferSavings> {
    let unwrap = |h: &[Option<f64>], which: &str| -> Result<Vec<f64>> {
        if h.is_empty() {
            return Err(Error::Input(format!("{which} history is empty")));
        }
        h.iter()
            .enumerate()
            .map(|(i, a)| {
                a.ok_or_else(|| Error::Input(format!("{which} history has no accuracy at epoch {}", i + 1)))
            })
            .collect()
    };
    let scratch = unwrap(scratch, "scratch")?;
    let pretrained = unwrap(pretrained, "pretrained")?;
    let (best_idx, best) = scratch
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, b), (i, a)| if a > b { (i, a) } else { (bi, b) });
    let epoch_scratch_best = best_idx + 1;
    let epoch_pretrained_match = pretrained.iter().position(|&a| a >= best).map(|i| i + 1);
    Ok(TransferSavings {
        best_scratch_acc: best,
        epoch_scratch_best,
        epoch_pretrained_match,
        savings_fraction: epoch_pretrained_match
            .map(|m| 1.0 - m as f64 / epoch_scratch_best as f64),
    })
}
