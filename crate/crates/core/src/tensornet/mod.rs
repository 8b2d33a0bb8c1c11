//! A small residual 1D convolutional network with hand-written reverse-mode gradients.
//!
//! Each block is a same-padded, stride-1 convolution followed by ReLU, with the block
//! input added back through an identity skip (or a bias-free 1×1 projection when the
//! channel count changes). Global average pooling over time feeds a single dense head:
//! linear for the 55-target regression pretext task, softmax for classification.
//!
//! Activations are laid out channel-major over the whole batch, `[channel][sample][time]`,
//! so every convolution becomes one GEMM over `batch·length` columns.

mod adam;
mod gemm;
mod loss;
mod model;
mod net;

pub use adam::{adam_step, AdamState};
pub use loss::{cross_entropy_from_logits, loss_cross_entropy, loss_mse, softmax_rows};
pub use model::{build_model, init_bound, Gradients, Model, Tensor};
pub use net::{backward, forward, Batch, ForwardCache, ForwardOutput, Target};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labeler::LABEL_WIDTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub kernel_size: usize,
    pub channels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    /// Linear outputs, trained with MSE.
    Regression { outputs: usize },
    /// Softmax over classes, trained with cross-entropy.
    Classification { classes: usize },
}

impl Head {
    pub fn width(&self) -> usize {
        match *self {
            Head::Regression { outputs } => outputs,
            Head::Classification { classes } => classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub blocks: Vec<BlockSpec>,
    pub head: Head,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self::pretext()
    }
}

impl ArchConfig {
    /// Three blocks of 32 channels with kernels 7, 5, 3 and the 55-output regression head.
    pub fn pretext() -> Self {
        Self {
            blocks: [7, 5, 3]
                .into_iter()
                .map(|kernel_size| BlockSpec {
                    kernel_size,
                    channels: 32,
                })
                .collect(),
            head: Head::Regression {
                outputs: LABEL_WIDTH,
            },
        }
    }

    pub fn with_head(&self, head: Head) -> Self {
        Self {
            blocks: self.blocks.clone(),
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Config("architecture needs at least one block".into()));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.kernel_size < 3 || b.kernel_size % 2 == 0 {
                return Err(Error::Config(format!(
                    "block {i}: kernel size {} must be odd and at least 3",
                    b.kernel_size
                )));
            }
            if b.channels == 0 {
                return Err(Error::Config(format!("block {i}: zero channels")));
            }
        }
        match self.head {
            Head::Regression { outputs: 0 } => {
                Err(Error::Config("regression head needs at least one output".into()))
            }
            Head::Classification { classes } if classes < 2 => {
                Err(Error::Config("classification head needs at least two classes".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn max_kernel(&self) -> usize {
        self.blocks.iter().map(|b| b.kernel_size).max().unwrap_or(1)
    }

    pub fn last_channels(&self) -> usize {
        self.blocks.last().map_or(1, |b| b.channels)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}
