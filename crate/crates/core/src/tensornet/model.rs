use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ArchConfig, Head};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            name: name.into(),
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Parameter indices for one residual block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct BlockParams {
    pub weight: usize,
    pub bias: usize,
    pub proj: Option<usize>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub arch: ArchConfig,
    /// Core tensors in block order, then `head.weight` and `head.bias`.
    pub params: Vec<Tensor>,
}

/// Parameter shapes implied by an architecture, in storage order.
pub(crate) fn param_shapes(arch: &ArchConfig) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    let mut c_in = 1;
    for (b, block) in arch.blocks.iter().enumerate() {
        let c_out = block.channels;
        out.push((format!("block{b}.conv.weight"), vec![c_out, c_in, block.kernel_size]));
        out.push((format!("block{b}.conv.bias"), vec![c_out]));
        if c_in != c_out {
            out.push((format!("block{b}.proj.weight"), vec![c_out, c_in]));
        }
        c_in = c_out;
    }
    out.push(("head.weight".into(), vec![arch.head.width(), c_in]));
    out.push(("head.bias".into(), vec![arch.head.width()]));
    out
}

pub(crate) fn block_params(arch: &ArchConfig) -> Vec<BlockParams> {
    let mut out = Vec::with_capacity(arch.blocks.len());
    let mut idx = 0;
    let mut c_in = 1;
    for block in &arch.blocks {
        let c_out = block.channels;
        let proj = (c_in != c_out).then_some(idx + 2);
        out.push(BlockParams {
            weight: idx,
            bias: idx + 1,
            proj,
            in_channels: c_in,
            out_channels: c_out,
            kernel: block.kernel_size,
        });
        idx += if proj.is_some() { 3 } else { 2 };
        c_in = c_out;
    }
    out
}

/// Uniform initialization half-width `sqrt(gain / fan_in)`.
pub fn init_bound(fan_in: usize, gain: f64) -> f64 {
    (gain / fan_in as f64).sqrt()
}

/// Gain used for ReLU convolutions (He uniform).
pub(crate) const CONV_GAIN: f64 = 6.0;
/// Gain used for linear maps: projections and the head.
pub(crate) const LINEAR_GAIN: f64 = 3.0;

/// Builds a model with fan-in scaled uniform weights and zero biases.
///
/// Core tensors are drawn before the head, so two architectures that differ only in
/// their head get identical core weights for the same seed.
pub fn build_model(arch: &ArchConfig, init_seed: u64) -> Result<Model> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
    let params = param_shapes(arch)
        .into_iter()
        .map(|(name, shape)| {
            let mut t = Tensor::zeros(name, shape);
            if !t.name.ends_with(".bias") {
                let fan_in: usize = t.shape[1..].iter().product();
                let gain = if t.name.ends_with("conv.weight") {
                    CONV_GAIN
                } else {
                    LINEAR_GAIN
                };
                let bound = init_bound(fan_in, gain);
                t.data.iter_mut().for_each(|w| *w = rng.random_range(-bound..bound));
            }
            t
        })
        .collect();
    Ok(Model {
        arch: arch.clone(),
        params,
    })
}

impl Model {
    /// Number of leading tensors that belong to the convolutional core.
    pub fn core_len(&self) -> usize {
        self.params.len() - 2
    }

    pub fn head_weight(&self) -> &Tensor {
        &self.params[self.params.len() - 2]
    }

    pub fn param(&self, name: &str) -> Option<&Tensor> {
        self.params.iter().find(|t| t.name == name)
    }

    pub fn num_weights(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn blocks(&self) -> Vec<BlockParams> {
        block_params(&self.arch)
    }

    /// Checks that the tensors match the shapes implied by `self.arch`.
    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        let shapes = param_shapes(&self.arch);
        if shapes.len() != self.params.len() {
            return Err(Error::Shape(format!(
                "expected {} tensors, found {}",
                shapes.len(),
                self.params.len()
            )));
        }
        for ((name, shape), t) in shapes.iter().zip(&self.params) {
            if name != &t.name || shape != &t.shape || t.data.len() != shape.iter().product::<usize>() {
                return Err(Error::ArchMismatch {
                    tensor: name.clone(),
                    expected: shape.clone(),
                    found: t.shape.clone(),
                });
            }
        }
        Ok(())
    }

    /// Copies the core tensors of `source` into `self`; heads are left untouched.
    pub fn load_core_from(&mut self, source: &Model) -> Result<()> {
        if source.arch.blocks != self.arch.blocks {
            let (tensor, expected, found) = self
                .params
                .iter()
                .zip(&source.params)
                .find(|(a, b)| a.shape != b.shape || a.name != b.name)
                .map(|(a, b)| (a.name.clone(), a.shape.clone(), b.shape.clone()))
                .unwrap_or_else(|| ("blocks".into(), vec![self.arch.blocks.len()], vec![source.arch.blocks.len()]));
            return Err(Error::ArchMismatch {
                tensor,
                expected,
                found,
            });
        }
        let n = self.core_len();
        for (dst, src) in self.params[..n].iter_mut().zip(&source.params[..n]) {
            dst.data.copy_from_slice(&src.data);
        }
        Ok(())
    }

    /// Replaces the head with a freshly initialized one.
    pub fn with_new_head(&self, head: Head, init_seed: u64) -> Result<Model> {
        let mut fresh = build_model(&self.arch.with_head(head), init_seed)?;
        fresh.load_core_from(self)?;
        Ok(fresh)
    }
}

/// Gradients aligned with [`Model::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Self(model.params.iter().map(|t| vec![0.0; t.len()]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0, |m: f64, g| m.max(g.abs()))
    }
}
