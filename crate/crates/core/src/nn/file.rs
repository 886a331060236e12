//! Little-endian model container.
//!
//! ```text
//! magic "MFSK65NN" | version u16 | layer count u32
//! per layer: kind u8 | dims (BatchNorm, ReLU, Softmax: features u32; Dense: inputs u32, outputs u32)
//! f32 blobs in stack order: BatchNorm gamma, beta, moving mean, moving variance;
//!                           Dense weights (out × in, row-major), bias
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::batchnorm::BatchNorm;
use super::dense::Dense;
use super::model::{DenseModel, Layer, Mode};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"MFSK65NN";
pub const MODEL_VERSION: u16 = 1;

const KIND_BATCH_NORM: u8 = 0;
const KIND_DENSE: u8 = 1;
const KIND_RELU: u8 = 2;
const KIND_SOFTMAX: u8 = 3;

// Upper bound on any single feature dimension; guards allocation on corrupt input.
const MAX_DIM: usize = 1 << 20;

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f32s<'a>(out: &mut Vec<u8>, values: impl IntoIterator<Item = &'a f32>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn model_to_bytes(model: &DenseModel<f32>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    put_u32(&mut out, model.layers().len());
    for layer in model.layers() {
        match layer {
            Layer::BatchNorm(bn) => {
                out.push(KIND_BATCH_NORM);
                put_u32(&mut out, bn.features());
            }
            Layer::Dense(d) => {
                out.push(KIND_DENSE);
                put_u32(&mut out, d.inputs());
                put_u32(&mut out, d.outputs());
            }
            Layer::Relu(n) => {
                out.push(KIND_RELU);
                put_u32(&mut out, *n);
            }
            Layer::Softmax(n) => {
                out.push(KIND_SOFTMAX);
                put_u32(&mut out, *n);
            }
        }
    }
    for layer in model.layers() {
        match layer {
            Layer::BatchNorm(bn) => {
                put_f32s(&mut out, &bn.gamma);
                put_f32s(&mut out, &bn.beta);
                put_f32s(&mut out, &bn.moving_mean);
                put_f32s(&mut out, &bn.moving_var);
            }
            Layer::Dense(d) => {
                put_f32s(&mut out, d.weights.iter());
                put_f32s(&mut out, &d.bias);
            }
            Layer::Relu(_) | Layer::Softmax(_) => {}
        }
    }
    out
}

pub fn write_model_to<W: Write>(mut out: W, model: &DenseModel<f32>) -> Result<W> {
    out.write_all(&model_to_bytes(model))?;
    out.flush()?;
    Ok(out)
}

pub fn save_model(model: &DenseModel<f32>, path: impl AsRef<Path>) -> Result<()> {
    write_model_to(BufWriter::new(File::create(path)?), model)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format("model file is truncated"))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn dim(&mut self) -> Result<usize> {
        let d = self.u32()?;
        if d == 0 || d > MAX_DIM {
            return Err(Error::format(format!("implausible layer dimension {d}")));
        }
        Ok(d)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::format("blob too large"))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

enum Descriptor {
    BatchNorm(usize),
    Dense(usize, usize),
    Relu(usize),
    Softmax(usize),
}

/// Parses a model; the result is in inference mode.
pub fn model_from_bytes(bytes: &[u8]) -> Result<DenseModel<f32>> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != MODEL_MAGIC {
        return Err(Error::format("not a model file (bad magic)"));
    }
    let version = u16::from_le_bytes(cur.take(2)?.try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(Error::format(format!("unsupported model version {version}")));
    }
    let count = cur.u32()?;
    if count == 0 || count > 1024 {
        return Err(Error::format(format!("implausible layer count {count}")));
    }
    let mut table = Vec::with_capacity(count);
    for _ in 0..count {
        table.push(match cur.u8()? {
            KIND_BATCH_NORM => Descriptor::BatchNorm(cur.dim()?),
            KIND_DENSE => Descriptor::Dense(cur.dim()?, cur.dim()?),
            KIND_RELU => Descriptor::Relu(cur.dim()?),
            KIND_SOFTMAX => Descriptor::Softmax(cur.dim()?),
            other => return Err(Error::format(format!("unknown layer kind {other}"))),
        });
    }
    let mut layers = Vec::with_capacity(count);
    for d in table {
        layers.push(match d {
            Descriptor::BatchNorm(n) => {
                let mut bn = BatchNorm::new(n);
                bn.gamma = Array1::from(cur.f32s(n)?);
                bn.beta = Array1::from(cur.f32s(n)?);
                bn.moving_mean = Array1::from(cur.f32s(n)?);
                bn.moving_var = Array1::from(cur.f32s(n)?);
                Layer::BatchNorm(bn)
            }
            Descriptor::Dense(inputs, outputs) => {
                let weights = Array2::from_shape_vec((outputs, inputs), cur.f32s(inputs * outputs)?)
                    .map_err(|e| Error::format(e.to_string()))?;
                let bias = Array1::from(cur.f32s(outputs)?);
                Layer::Dense(Dense { weights, bias })
            }
            Descriptor::Relu(n) => Layer::Relu(n),
            Descriptor::Softmax(n) => Layer::Softmax(n),
        });
    }
    if cur.pos != bytes.len() {
        return Err(Error::format("trailing bytes after the last parameter blob"));
    }
    let mut model = DenseModel::from_layers(layers).map_err(|e| Error::format(e.to_string()))?;
    model.set_mode(Mode::Inference);
    Ok(model)
}

pub fn read_model_from<R: std::io::Read>(mut input: R) -> Result<DenseModel<f32>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    model_from_bytes(&bytes)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DenseModel<f32>> {
    model_from_bytes(&std::fs::read(path)?)
}
