use super::gemm::gemm;
use super::model::{BlockParams, Gradients, Model};
use super::{cross_entropy_from_logits, loss_mse, softmax_rows, Head, Matrix};
use crate::error::{Error, Result};

/// `size` equal-length series stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub size: usize,
    pub len: usize,
    pub data: Vec<f64>,
}

impl Batch {
    pub fn from_series<S: AsRef<[f64]>>(series: &[S]) -> Result<Self> {
        let len = series.first().map_or(0, |s| s.as_ref().len());
        if series.is_empty() || len == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if let Some((i, s)) = series.iter().enumerate().find(|(_, s)| s.as_ref().len() != len) {
            return Err(Error::Shape(format!(
                "ragged batch: series {i} has length {} but series 0 has {len}",
                s.as_ref().len()
            )));
        }
        let mut data = Vec::with_capacity(series.len() * len);
        for s in series {
            data.extend_from_slice(s.as_ref());
        }
        Ok(Self {
            size: series.len(),
            len,
            data,
        })
    }
}

/// Intermediates kept by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub batch: usize,
    pub len: usize,
    /// Input of every block, `[channel][sample][time]`.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation convolution output of every block.
    pre: Vec<Vec<f64>>,
    pooled: Matrix,
    pub logits: Matrix,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput {
    /// Raw outputs for a regression head, softmax probabilities for a classification head.
    pub outputs: Matrix,
    pub cache: ForwardCache,
}

impl ForwardCache {
    /// Pre-activation outputs of each block's convolution, `[channel][sample][time]`.
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }
}

pub enum Target<'a> {
    Regression(&'a Matrix),
    Classes(&'a [usize]),
}

/// Writes the `[c_in·k][n]` unfolding of `x` used to express the convolution as a GEMM.
fn im2col(x: &[f64], c_in: usize, k: usize, batch: usize, len: usize, col: &mut [f64]) {
    let n = batch * len;
    let pad = (k / 2) as isize;
    for i in 0..c_in {
        for kk in 0..k {
            let row = i * k + kk;
            let shift = kk as isize - pad;
            for b in 0..batch {
                let src = &x[i * n + b * len..][..len];
                let dst = &mut col[row * n + b * len..][..len];
                if shift >= 0 {
                    let s = shift as usize;
                    dst[..len - s].copy_from_slice(&src[s..]);
                    dst[len - s..].fill(0.0);
                } else {
                    let s = (-shift) as usize;
                    dst[..s].fill(0.0);
                    dst[s..].copy_from_slice(&src[..len - s]);
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates `col` back into `dx`.
fn col2im_add(col: &[f64], c_in: usize, k: usize, batch: usize, len: usize, dx: &mut [f64]) {
    let n = batch * len;
    let pad = (k / 2) as isize;
    for i in 0..c_in {
        for kk in 0..k {
            let row = i * k + kk;
            let shift = kk as isize - pad;
            for b in 0..batch {
                let src = &col[row * n + b * len..][..len];
                let dst = &mut dx[i * n + b * len..][..len];
                if shift >= 0 {
                    let s = shift as usize;
                    dst[s..].iter_mut().zip(&src[..len - s]).for_each(|(d, v)| *d += v);
                } else {
                    let s = (-shift) as usize;
                    dst[..len - s].iter_mut().zip(&src[s..]).for_each(|(d, v)| *d += v);
                }
            }
        }
    }
}

pub fn forward(model: &Model, batch: &Batch) -> Result<ForwardOutput> {
    let (bsz, len) = (batch.size, batch.len);
    if bsz == 0 || batch.data.len() != bsz * len {
        return Err(Error::Shape(format!(
            "batch data has {} values for {bsz}×{len}",
            batch.data.len()
        )));
    }
    let max_kernel = model.arch.max_kernel();
    if len < max_kernel {
        return Err(Error::Shape(format!(
            "series length {len} is shorter than the largest kernel ({max_kernel})"
        )));
    }
    let n = bsz * len;
    let mut x = batch.data.clone();
    let mut inputs = Vec::with_capacity(model.arch.blocks.len());
    let mut pre = Vec::with_capacity(model.arch.blocks.len());
    let mut col = Vec::new();
    for bp in model.blocks() {
        let BlockParams {
            in_channels: c_in,
            out_channels: c_out,
            kernel: k,
            ..
        } = bp;
        col.resize(c_in * k * n, 0.0);
        im2col(&x, c_in, k, bsz, len, &mut col);
        let mut z = vec![0.0; c_out * n];
        gemm(c_out, c_in * k, n, &model.params[bp.weight].data, false, &col, false, 0.0, &mut z);
        let bias = &model.params[bp.bias].data;
        for (c, row) in z.chunks_exact_mut(n).enumerate() {
            row.iter_mut().for_each(|v| *v += bias[c]);
        }
        let mut y = match bp.proj {
            Some(p) => {
                let mut y = vec![0.0; c_out * n];
                gemm(c_out, c_in, n, &model.params[p].data, false, &x, false, 0.0, &mut y);
                y
            }
            None => x.clone(),
        };
        y.iter_mut().zip(&z).for_each(|(y, &z)| *y += z.max(0.0));
        inputs.push(x);
        pre.push(z);
        x = y;
    }

    let channels = model.arch.last_channels();
    let mut pooled = Matrix::zeros(bsz, channels);
    for c in 0..channels {
        for b in 0..bsz {
            let s: f64 = x[c * n + b * len..][..len].iter().sum();
            pooled.data[b * channels + c] = s / len as f64;
        }
    }
    let width = model.arch.head.width();
    let mut logits = Matrix::zeros(bsz, width);
    let head_w = &model.params[model.params.len() - 2].data;
    let head_b = &model.params[model.params.len() - 1].data;
    for b in 0..bsz {
        logits.row_mut(b).copy_from_slice(head_b);
    }
    gemm(bsz, channels, width, &pooled.data, false, head_w, true, 1.0, &mut logits.data);

    let outputs = match model.arch.head {
        Head::Regression { .. } => logits.clone(),
        Head::Classification { .. } => softmax_rows(&logits),
    };
    Ok(ForwardOutput {
        outputs,
        cache: ForwardCache {
            batch: bsz,
            len,
            inputs,
            pre,
            pooled,
            logits,
        },
    })
}

/// Exact gradients of the loss (MSE for regression, cross-entropy for classification)
/// with respect to every parameter, plus the loss value.
pub fn backward(model: &Model, cache: &ForwardCache, target: Target<'_>) -> Result<(Gradients, f64)> {
    let (bsz, len) = (cache.batch, cache.len);
    let width = model.arch.head.width();
    if cache.logits.shape() != (bsz, width) || cache.inputs.len() != model.arch.blocks.len() {
        return Err(Error::Shape("forward cache does not match the model".into()));
    }
    let (loss, dlogits) = match (model.arch.head, target) {
        (Head::Regression { .. }, Target::Regression(y)) => {
            let loss = loss_mse(&cache.logits, y)?;
            let scale = 2.0 / (bsz * width) as f64;
            let mut d = cache.logits.clone();
            d.data.iter_mut().zip(&y.data).for_each(|(p, t)| *p = scale * (*p - t));
            (loss, d)
        }
        (Head::Classification { .. }, Target::Classes(labels)) => {
            let loss = cross_entropy_from_logits(&cache.logits, labels)?;
            let mut d = softmax_rows(&cache.logits);
            for (b, &l) in labels.iter().enumerate() {
                d.row_mut(b)[l] -= 1.0;
            }
            d.data.iter_mut().for_each(|v| *v /= bsz as f64);
            (loss, d)
        }
        _ => return Err(Error::Input("target kind does not match the model head".into())),
    };

    let mut grads = Gradients::zeros_like(model);
    let np = model.params.len();
    let channels = model.arch.last_channels();
    gemm(width, bsz, channels, &dlogits.data, true, &cache.pooled.data, false, 0.0, &mut grads.0[np - 2]);
    for b in 0..bsz {
        grads.0[np - 1].iter_mut().zip(dlogits.row(b)).for_each(|(g, d)| *g += d);
    }
    let mut dpooled = vec![0.0; bsz * channels];
    gemm(bsz, width, channels, &dlogits.data, false, &model.params[np - 2].data, false, 0.0, &mut dpooled);

    let n = bsz * len;
    let mut dy = vec![0.0; channels * n];
    for c in 0..channels {
        for b in 0..bsz {
            let g = dpooled[b * channels + c] / len as f64;
            dy[c * n + b * len..][..len].fill(g);
        }
    }

    let mut col = Vec::new();
    for (i, bp) in model.blocks().into_iter().enumerate().rev() {
        let BlockParams {
            in_channels: c_in,
            out_channels: c_out,
            kernel: k,
            ..
        } = bp;
        let x = &cache.inputs[i];
        let z = &cache.pre[i];
        let need_dx = i > 0;
        let mut dx = if need_dx { vec![0.0; c_in * n] } else { Vec::new() };

        match bp.proj {
            Some(p) => {
                gemm(c_out, n, c_in, &dy, false, x, true, 0.0, &mut grads.0[p]);
                if need_dx {
                    gemm(c_in, c_out, n, &model.params[p].data, true, &dy, false, 0.0, &mut dx);
                }
            }
            None if need_dx => dx.copy_from_slice(&dy),
            None => {}
        }

        let mut dz = dy;
        dz.iter_mut().zip(z).for_each(|(d, &z)| {
            if z <= 0.0 {
                *d = 0.0
            }
        });
        for (c, row) in dz.chunks_exact(n).enumerate() {
            grads.0[bp.bias][c] = row.iter().sum();
        }
        col.resize(c_in * k * n, 0.0);
        im2col(x, c_in, k, bsz, len, &mut col);
        gemm(c_out, n, c_in * k, &dz, false, &col, true, 0.0, &mut grads.0[bp.weight]);
        if need_dx {
            gemm(c_in * k, c_out, n, &model.params[bp.weight].data, true, &dz, false, 0.0, &mut col);
            col2im_add(&col, c_in, k, bsz, len, &mut dx);
        }
        dy = dx;
    }
    Ok((grads, loss))
}
