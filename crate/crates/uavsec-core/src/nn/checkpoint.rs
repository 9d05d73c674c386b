//! Versioned binary checkpoint container.
//!
//! A checkpoint is a sequence of named sections behind an 8-byte magic and a
//! version word. Floats are stored as IEEE-754 bit patterns, so a decode
//! followed by a forward pass is bit-identical to the encoded network.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::layers::Layer;
use super::network::Network;
use super::optim::{AdamSlice, AdamState};
use super::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"UVSCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointError {
    BadMagic,
    UnsupportedVersion(u32),
    Truncated,
    BadLayerTag(u8),
    MissingSection(&'static str),
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::BadMagic => write!(f, "not a checkpoint file"),
            CheckpointError::UnsupportedVersion(v) => write!(f, "unsupported version {v}"),
            CheckpointError::Truncated => write!(f, "truncated checkpoint"),
            CheckpointError::BadLayerTag(t) => write!(f, "unknown layer tag {t}"),
            CheckpointError::MissingSection(name) => write!(f, "missing section '{name}'"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CheckpointError {}

// ── primitive encoding ───────────────────────────────────────────────────

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_bits().to_le_bytes());
}

pub struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub(crate) fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

// ── tensors, layers, networks ────────────────────────────────────────────

pub fn encode_tensor(out: &mut Vec<u8>, t: &Tensor) {
    put_u32(out, t.shape().len() as u32);
    for &d in t.shape() {
        put_u64(out, d as u64);
    }
    for &x in t.data() {
        put_f64(out, x);
    }
}

pub fn decode_tensor(c: &mut Cursor) -> Result<Tensor, CheckpointError> {
    let ndims = c.u32()? as usize;
    let mut shape = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        shape.push(c.u64()? as usize);
    }
    let numel: usize = shape.iter().product();
    let mut data = Vec::with_capacity(numel);
    for _ in 0..numel {
        data.push(c.f64()?);
    }
    Ok(Tensor::new(&shape, data))
}

fn layer_tag(layer: &Layer) -> u8 {
    match layer {
        Layer::Dense { .. } => 1,
        Layer::Conv3x3 { .. } => 2,
        Layer::BatchNorm { .. } => 3,
        Layer::Relu => 4,
        Layer::Tanh => 5,
        Layer::MaxPool2 => 6,
        Layer::Flatten => 7,
    }
}

pub fn encode_network(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, net.layers.len() as u32);
    for layer in &net.layers {
        out.push(layer_tag(layer));
        match layer {
            Layer::Dense { weight, bias } | Layer::Conv3x3 { weight, bias } => {
                encode_tensor(&mut out, weight);
                encode_tensor(&mut out, bias);
            }
            Layer::BatchNorm {
                gamma,
                beta,
                running_mean,
                running_var,
                momentum,
                eps,
            } => {
                encode_tensor(&mut out, gamma);
                encode_tensor(&mut out, beta);
                encode_tensor(&mut out, running_mean);
                encode_tensor(&mut out, running_var);
                put_f64(&mut out, *momentum);
                put_f64(&mut out, *eps);
            }
            _ => {}
        }
    }
    out
}

pub fn decode_network(bytes: &[u8]) -> Result<Network, CheckpointError> {
    let mut c = Cursor::new(bytes);
    let n = c.u32()? as usize;
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let tag = c.u8()?;
        let layer = match tag {
            1 => Layer::Dense {
                weight: decode_tensor(&mut c)?,
                bias: decode_tensor(&mut c)?,
            },
            2 => Layer::Conv3x3 {
                weight: decode_tensor(&mut c)?,
                bias: decode_tensor(&mut c)?,
            },
            3 => Layer::BatchNorm {
                gamma: decode_tensor(&mut c)?,
                beta: decode_tensor(&mut c)?,
                running_mean: decode_tensor(&mut c)?,
                running_var: decode_tensor(&mut c)?,
                momentum: c.f64()?,
                eps: c.f64()?,
            },
            4 => Layer::Relu,
            5 => Layer::Tanh,
            6 => Layer::MaxPool2,
            7 => Layer::Flatten,
            t => return Err(CheckpointError::BadLayerTag(t)),
        };
        layers.push(layer);
    }
    Ok(Network::new(layers))
}

pub fn encode_f64s(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + values.len() * 8);
    put_u64(&mut out, values.len() as u64);
    for &v in values {
        put_f64(&mut out, v);
    }
    out
}

pub fn decode_f64s(bytes: &[u8]) -> Result<Vec<f64>, CheckpointError> {
    let mut c = Cursor::new(bytes);
    let n = c.u64()? as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(c.f64()?);
    }
    Ok(out)
}

pub fn encode_adam(state: &AdamState) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, state.slices.len() as u32);
    for s in &state.slices {
        let (m, v, t) = s.moments();
        put_u64(&mut out, t);
        put_u64(&mut out, m.len() as u64);
        for &x in m {
            put_f64(&mut out, x);
        }
        for &x in v {
            put_f64(&mut out, x);
        }
    }
    out
}

pub fn decode_adam(bytes: &[u8]) -> Result<AdamState, CheckpointError> {
    let mut c = Cursor::new(bytes);
    let n = c.u32()? as usize;
    let mut slices = Vec::with_capacity(n);
    for _ in 0..n {
        let t = c.u64()?;
        let len = c.u64()? as usize;
        let mut m = Vec::with_capacity(len);
        for _ in 0..len {
            m.push(c.f64()?);
        }
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push(c.f64()?);
        }
        slices.push(AdamSlice::restore(m, v, t));
    }
    Ok(AdamState { slices })
}

// ── sectioned container ──────────────────────────────────────────────────

/// Builds a checkpoint byte stream out of named sections.
#[derive(Default)]
pub struct SectionWriter {
    sections: Vec<(String, Vec<u8>)>,
}

impl SectionWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, payload: Vec<u8>) {
        self.sections.push((String::from(name), payload));
    }

    pub fn finish(self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        put_u32(&mut out, CHECKPOINT_VERSION);
        put_u32(&mut out, self.sections.len() as u32);
        for (name, payload) in &self.sections {
            put_u32(&mut out, name.len() as u32);
            out.extend_from_slice(name.as_bytes());
            put_u64(&mut out, payload.len() as u64);
            out.extend_from_slice(payload);
        }
        out
    }
}

/// Parses a checkpoint byte stream back into named sections.
pub struct SectionReader {
    sections: Vec<(String, Vec<u8>)>,
}

impl SectionReader {
    pub fn parse(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 8 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut c = Cursor::new(&bytes[8..]);
        let version = c.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let n = c.u32()? as usize;
        let mut sections = Vec::with_capacity(n);
        for _ in 0..n {
            let name_len = c.u32()? as usize;
            let name_bytes = c.take(name_len)?;
            let name = String::from_utf8(name_bytes.to_vec())
                .map_err(|_| CheckpointError::Truncated)?;
            let payload_len = c.u64()? as usize;
            let payload = c.take(payload_len)?.to_vec();
            sections.push((name, payload));
        }
        let _ = c.done();
        Ok(Self { sections })
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p.as_slice())
    }

    pub fn require(&self, name: &'static str) -> Result<&[u8], CheckpointError> {
        self.get(name).ok_or(CheckpointError::MissingSection(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Mode, Tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn network_round_trip_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut net = Network::new(vec![
            Network::conv3x3(2, 3, &mut rng),
            Network::batchnorm(3),
            Layer::Relu,
            Layer::MaxPool2,
            Layer::Flatten,
            Network::dense(3 * 2 * 2, 4, &mut rng),
            Layer::Tanh,
        ]);
        let x = Tensor::new(&[1, 2, 4, 4], (0..32).map(|i| (i as f64 * 0.21).sin()).collect());
        // Push some state into the running statistics first.
        let _ = net.forward(&x, Mode::Train).unwrap();
        let (expected, _) = net.forward(&x, Mode::Eval).unwrap();

        let bytes = encode_network(&net);
        let mut restored = decode_network(&bytes).unwrap();
        assert_eq!(restored, net);
        let (got, _) = restored.forward(&x, Mode::Eval).unwrap();
        assert_eq!(got.data(), expected.data(), "bit-identical forward");
    }

    #[test]
    fn section_container_round_trip() {
        let mut w = SectionWriter::new();
        w.add("alpha", encode_f64s(&[0.5, 0.25]));
        w.add("meta", encode_f64s(&[42.0]));
        let bytes = w.finish();
        let r = SectionReader::parse(&bytes).unwrap();
        assert_eq!(decode_f64s(r.require("alpha").unwrap()).unwrap(), vec![0.5, 0.25]);
        assert_eq!(decode_f64s(r.require("meta").unwrap()).unwrap(), vec![42.0]);
        assert!(r.get("missing").is_none());
    }

    #[test]
    fn bad_magic_is_rejected() {
        assert!(matches!(
            SectionReader::parse(b"NOTACKPT"),
            Err(CheckpointError::BadMagic)
        ));
    }
}
