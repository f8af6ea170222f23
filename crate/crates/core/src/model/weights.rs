//! Named-tensor weight storage and its single-file container format.
//!
//! The container is little-endian throughout: magic, version, the
//! human-readable config document, the config fingerprint, a manifest
//! of (name, shape) entries, then one flat blob of 32-bit reals holding
//! every tensor's data in manifest order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Weight container magic bytes.
pub const WEIGHTS_MAGIC: [u8; 4] = *b"SMGW";
/// Current weight container version.
pub const WEIGHTS_VERSION: u16 = 1;

/// 64-bit FNV-1a over a byte string. Used wherever the crate needs a
/// cheap deterministic fingerprint (configs, weight blobs, engine
/// state snapshots).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// One named tensor: a shape and its row-major 32-bit data.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn element_count(&self) -> usize {
        self.data.len()
    }
}

/// An ordered collection of named tensors bound to one configuration.
///
/// Order is insertion order and is part of the serialized form, so two
/// stores built the same way serialize identically.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStore {
    tensors: Vec<Tensor>,
    config_doc: String,
    config_fingerprint: u64,
}

impl WeightStore {
    /// An empty store bound to a config document (see
    /// [`GeneratorConfig::to_doc`](super::GeneratorConfig::to_doc)).
    pub fn new(config_doc: String) -> Self {
        let config_fingerprint = fnv1a64(config_doc.as_bytes());
        WeightStore {
            tensors: Vec::new(),
            config_doc,
            config_fingerprint,
        }
    }

    pub fn insert(&mut self, name: &str, shape: Vec<usize>, data: Vec<f32>) -> Result<()> {
        if self.get(name).is_some() {
            return Err(Error::validation(format!("duplicate tensor `{name}`")));
        }
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(Error::validation(format!(
                "tensor `{name}` holds {} values but its shape {:?} needs {}",
                data.len(),
                shape,
                expect
            )));
        }
        self.tensors.push(Tensor {
            name: name.to_string(),
            shape,
            data,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// The embedded human-readable config document.
    pub fn config_doc(&self) -> &str {
        &self.config_doc
    }

    /// Fingerprint of the config document this store was built for.
    pub fn config_fingerprint(&self) -> u64 {
        self.config_fingerprint
    }

    /// Fingerprint over everything: config plus every tensor's name,
    /// shape, and data. Two stores with equal content fingerprints are
    /// byte-identical when serialized.
    pub fn content_fingerprint(&self) -> u64 {
        fnv1a64(&self.to_bytes())
    }

    /// Serializes to the "SMGW" container layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&WEIGHTS_MAGIC);
        out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.config_doc.len() as u32).to_le_bytes());
        out.extend_from_slice(self.config_doc.as_bytes());
        out.extend_from_slice(&self.config_fingerprint.to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.push(t.shape.len() as u8);
            for &d in &t.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
        }
        for t in &self.tensors {
            for v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Parses and validates a container.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
            let end = pos
                .checked_add(n)
                .filter(|&e| e <= bytes.len())
                .ok_or_else(|| Error::format("weight container truncated"))?;
            let s = &bytes[*pos..end];
            *pos = end;
            Ok(s)
        }
        let mut pos = 0usize;

        if take(bytes, &mut pos, 4)? != WEIGHTS_MAGIC {
            return Err(Error::format("bad weight container magic"));
        }
        let version = u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().unwrap());
        if version != WEIGHTS_VERSION {
            return Err(Error::format(format!(
                "unsupported weight container version {version}"
            )));
        }
        let doc_len = u32::from_le_bytes(take(bytes, &mut pos, 4)?.try_into().unwrap()) as usize;
        let config_doc = std::str::from_utf8(take(bytes, &mut pos, doc_len)?)
            .map_err(|_| Error::format("config document is not UTF-8"))?
            .to_string();
        let stored_fp = u64::from_le_bytes(take(bytes, &mut pos, 8)?.try_into().unwrap());
        if stored_fp != fnv1a64(config_doc.as_bytes()) {
            return Err(Error::format(
                "config fingerprint does not match the embedded document",
            ));
        }
        let count = u32::from_le_bytes(take(bytes, &mut pos, 4)?.try_into().unwrap()) as usize;

        let mut manifest = Vec::with_capacity(count);
        for _ in 0..count {
            let name_len = u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(take(bytes, &mut pos, name_len)?)
                .map_err(|_| Error::format("tensor name is not UTF-8"))?
                .to_string();
            let ndim = take(bytes, &mut pos, 1)?[0] as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(u32::from_le_bytes(take(bytes, &mut pos, 4)?.try_into().unwrap()) as usize);
            }
            manifest.push((name, shape));
        }

        let mut store = WeightStore::new(config_doc);
        for (name, shape) in manifest {
            let elems: usize = shape.iter().product();
            let raw = take(bytes, &mut pos, elems * 4)?;
            let data: Vec<f32> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "tensor `{name}` contains non-finite values"
                )));
            }
            store.insert(&name, shape, data)?;
        }
        if pos != bytes.len() {
            return Err(Error::format(format!(
                "weight container has {} trailing bytes",
                bytes.len() - pos
            )));
        }
        Ok(store)
    }
}

/// Deterministic seeded initialization for a tensor manifest:
/// convolution weights are uniform with fan-in scaling (the last shape
/// axis is the kernel, the middle one the input width), biases small
/// uniform, embeddings moderate uniform.
pub(super) fn fill_random(store: &mut WeightStore, seed: u64, manifest: &[(String, Vec<usize>)]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |amplitude: f32| -> f32 {
        let u = (rng.next_u32() >> 8) as f32 / (1u32 << 24) as f32;
        (2.0 * u - 1.0) * amplitude
    };
    for (name, shape) in manifest {
        let elems: usize = shape.iter().product();
        let amplitude = match shape.len() {
            // [out][in][K] conv weight
            3 => 1.0 / ((shape[1] * shape[2]) as f32).sqrt(),
            // [vocab][channels] embedding
            2 => 0.5,
            // bias
            _ => 0.05,
        };
        let data: Vec<f32> = (0..elems).map(|_| draw(amplitude)).collect();
        store
            .insert(name, shape.clone(), data)
            .expect("manifest names are unique");
    }
}
