//! Model checkpoint format.
//!
//! ```text
//! "TSFW" | version u16
//! arch     : u32 byte length | JSON-encoded ArchConfig
//! tensors  : u32 count | per tensor { u16 name length | name | u8 rank | rank × u32 dims | f32 data }
//! adam     : u8 present | [u64 step | f64 lr, beta1, beta2, eps | per tensor f32 m, f32 v]
//! checksum : SHA-256 of every preceding byte
//! ```
//!
//! Weights are stored at single precision, little-endian.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, FormatError, Result};
use crate::tensornet::{AdamState, ArchConfig, Model, Tensor};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"TSFW";
pub const CHECKPOINT_VERSION: u16 = 1;
const DIGEST_LEN: usize = 32;

pub fn encode_checkpoint(model: &Model, adam: Option<&AdamState>) -> Result<Vec<u8>> {
    model.validate()?;
    let mut buf = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let arch = serde_json::to_vec(&model.arch).map_err(|e| Error::Input(format!("arch: {e}")))?;
    buf.extend_from_slice(&(arch.len() as u32).to_le_bytes());
    buf.extend_from_slice(&arch);
    buf.extend_from_slice(&(model.params.len() as u32).to_le_bytes());
    let put_f32s = |buf: &mut Vec<u8>, data: &[f64]| {
        for &v in data {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    };
    for t in &model.params {
        buf.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
        buf.extend_from_slice(t.name.as_bytes());
        buf.push(t.shape.len() as u8);
        for &d in &t.shape {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        put_f32s(&mut buf, &t.data);
    }
    match adam {
        None => buf.push(0),
        Some(state) => {
            if state.m.len() != model.params.len() {
                return Err(Error::Shape("optimizer state does not match the model".into()));
            }
            buf.push(1);
            buf.extend_from_slice(&state.step.to_le_bytes());
            for h in [state.lr, state.beta1, state.beta2, state.eps] {
                buf.extend_from_slice(&h.to_le_bytes());
            }
            for (m, v) in state.m.iter().zip(&state.v) {
                put_f32s(&mut buf, m);
                put_f32s(&mut buf, v);
            }
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    Ok(buf)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], FormatError> {
        if self.buf.len() - self.pos < n {
            return Err(FormatError::Truncated(format!("need {n} bytes at offset {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> std::result::Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> std::result::Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> std::result::Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> std::result::Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32s(&mut self, n: usize) -> std::result::Result<Vec<f64>, FormatError> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| FormatError::Invalid("size overflow".into()))?)?;
        let out: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::Invalid("non-finite tensor entry".into()));
        }
        Ok(out)
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Model, Option<AdamState>)> {
    if bytes.len() < 6 + DIGEST_LEN {
        return Err(FormatError::Truncated("checkpoint shorter than header and checksum".into()).into());
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != CHECKPOINT_MAGIC {
        return Err(FormatError::BadMagic {
            expected: CHECKPOINT_MAGIC,
            found: magic,
        }
        .into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err(FormatError::Checksum.into());
    }
    let mut c = Cursor { buf: body, pos: 4 };
    let version = c.u16()?;
    if version != CHECKPOINT_VERSION {
        return Err(FormatError::UnsupportedVersion {
            expected: CHECKPOINT_VERSION,
            found: version,
        }
        .into());
    }
    let arch_len = c.u32()? as usize;
    let arch: ArchConfig = serde_json::from_slice(c.take(arch_len)?)
        .map_err(|e| FormatError::Invalid(format!("architecture: {e}")))?;
    let n_tensors = c.u32()? as usize;
    let mut params = Vec::with_capacity(n_tensors.min(1024));
    for _ in 0..n_tensors {
        let name_len = usize::from(c.u16()?);
        let name = String::from_utf8(c.take(name_len)?.to_vec())
            .map_err(|_| FormatError::Invalid("tensor name is not UTF-8".into()))?;
        let rank = usize::from(c.u8()?);
        let shape = (0..rank)
            .map(|_| c.u32().map(|d| d as usize))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let data = c.f32s(shape.iter().product())?;
        params.push(Tensor { name, shape, data });
    }
    let model = Model { arch, params };
    model.validate()?;
    let adam = match c.u8()? {
        0 => None,
        1 => {
            let step = c.u64()?;
            let (lr, beta1, beta2, eps) = (c.f64()?, c.f64()?, c.f64()?, c.f64()?);
            let mut m = Vec::with_capacity(model.params.len());
            let mut v = Vec::with_capacity(model.params.len());
            for t in &model.params {
                m.push(c.f32s(t.len())?);
                v.push(c.f32s(t.len())?);
            }
            Some(AdamState {
                step,
                lr,
                beta1,
                beta2,
                eps,
                m,
                v,
            })
        }
        f => return Err(FormatError::Invalid(format!("optimizer flag {f}")).into()),
    };
    if c.pos != body.len() {
        return Err(FormatError::TrailingData.into());
    }
    Ok((model, adam))
}

pub fn save_checkpoint(path: &Path, model: &Model, adam: Option<&AdamState>) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model, adam)?)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, Option<AdamState>)> {
    let bytes = std::fs::read(path)?;
    decode_checkpoint(&bytes).map_err(|e| match e {
        Error::FormatData(f) => Error::at(path, f),
        other => other,
    })
}

/// Rounds every weight to single precision, the resolution checkpoints store.
pub fn quantize(model: &Model) -> Model {
    let mut q = model.clone();
    q.params
        .iter_mut()
        .for_each(|t| t.data.iter_mut().for_each(|v| *v = *v as f32 as f64));
    q
}
