//! Checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "WEARCKPT"
//! version      u32
//! header_len   u32
//! header       JSON (configuration, seed, init scheme, Δt scaling, Adam)
//! digest       32 bytes SHA-256 of the header
//! count        u32
//! count × { name_len u16, name, rank u8, dims u32 × rank, data f32 × Πdims }
//! crc32        u32 over every preceding byte
//! ```
//!
//! Tensors are the parameters in network order followed by the first and
//! second Adam moments (`adam.m.<name>`, `adam.v.<name>`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wearcast_core::adam::AdamState;
use wearcast_core::net::{DELTA_SCALING, INIT_SCHEME};
use wearcast_core::train::ExperimentConfig;
use wearcast_core::{ModelParams, NetworkConfig, Tensor, Variant};

use crate::error::{CheckpointError, Error, Result};

pub const MAGIC: &[u8; 8] = b"WEARCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams<f32>,
    pub config: ExperimentConfig,
    pub epochs_completed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkHeader {
    pub variant: String,
    pub input_height: usize,
    pub input_width: usize,
    pub encoder_channels: [usize; 5],
    pub delta_hidden: usize,
    pub delta_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl NetworkHeader {
    pub fn of(n: &NetworkConfig) -> Self {
        NetworkHeader {
            variant: n.variant.to_string(),
            input_height: n.input_height,
            input_width: n.input_width,
            encoder_channels: n.encoder_channels,
            delta_hidden: n.delta_hidden,
            delta_channels: n.delta_channels,
            kernel: n.kernel,
            stride: n.stride,
            padding: n.padding,
        }
    }

    pub fn to_config(&self) -> wearcast_core::Result<NetworkConfig> {
        let n = NetworkConfig {
            variant: self.variant.parse()?,
            input_height: self.input_height,
            input_width: self.input_width,
            encoder_channels: self.encoder_channels,
            delta_hidden: self.delta_hidden,
            delta_channels: self.delta_channels,
            kernel: self.kernel,
            stride: self.stride,
            padding: self.padding,
        };
        n.validate()?;
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    network: NetworkHeader,
    learning_rate: f64,
    epochs: usize,
    batch_size: Option<usize>,
    seed: u64,
    train_fraction: f64,
    checkpoint_every: usize,
    epochs_completed: usize,
    init_scheme: String,
    delta_scaling: String,
    adam_beta1: f64,
    adam_beta2: f64,
    adam_epsilon: f64,
    adam_steps: u64,
}

pub fn encode(ck: &Checkpoint) -> Vec<u8> {
    let c = &ck.config;
    let states = ck.params.adam_states();
    let first = &states[0];
    let header = Header {
        network: NetworkHeader::of(ck.params.config()),
        learning_rate: c.learning_rate,
        epochs: c.epochs,
        batch_size: c.batch_size,
        seed: ck.params.seed(),
        train_fraction: c.train_fraction,
        checkpoint_every: c.checkpoint_every,
        epochs_completed: ck.epochs_completed,
        init_scheme: INIT_SCHEME.into(),
        delta_scaling: DELTA_SCALING.into(),
        adam_beta1: first.beta1,
        adam_beta2: first.beta2,
        adam_epsilon: first.epsilon,
        adam_steps: first.step_count,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&Sha256::digest(&json));

    let names = ModelParams::<f32>::names();
    let mut tensors: Vec<(String, &Tensor<f32>)> = Vec::new();
    tensors.extend(names.iter().cloned().zip(ck.params.tensors()));
    tensors.extend(names.iter().map(|n| format!("adam.m.{n}")).zip(states.iter().map(|s| &s.first_moment)));
    tensors.extend(names.iter().map(|n| format!("adam.v.{n}")).zip(states.iter().map(|s| &s.second_moment)));
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in tensors {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(t.shape().len() as u8);
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(CheckpointError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> std::result::Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> std::result::Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> std::result::Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Checkpoint, CheckpointError> {
    if bytes.len() < MAGIC.len() + 4 {
        return Err(if MAGIC.starts_with(&bytes[..bytes.len().min(MAGIC.len())]) {
            CheckpointError::Truncated
        } else {
            CheckpointError::BadMagic
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion {
            found: version,
            supported: VERSION,
        });
    }
    // Verify the checksum before trusting any length field.
    if bytes.len() < 16 {
        return Err(CheckpointError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CheckpointError::Checksum { stored, computed });
    }

    let mut r = Reader { bytes: body, pos: 12 };
    let len = r.u32()? as usize;
    let json = r.take(len)?;
    if r.take(32)? != Sha256::digest(json).as_slice() {
        return Err(CheckpointError::Digest);
    }
    let header: Header = serde_json::from_slice(json).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let malformed = |e: wearcast_core::Error| CheckpointError::Malformed(e.to_string());
    let network = header.network.to_config().map_err(malformed)?;

    let count = r.u32()? as usize;
    let mut named = Vec::with_capacity(count);
    for _ in 0..count {
        let n = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(n)?)
            .map_err(|_| CheckpointError::Malformed("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let len: usize = shape.iter().product();
        let raw = r.take(len.checked_mul(4).ok_or(CheckpointError::Truncated)?)?;
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        named.push((name, Tensor::new(&shape, data).map_err(malformed)?));
    }
    if r.pos != body.len() {
        return Err(CheckpointError::Malformed(format!("{} trailing bytes", body.len() - r.pos)));
    }

    let names = ModelParams::<f32>::names();
    let expected: Vec<String> = names
        .iter()
        .cloned()
        .chain(names.iter().map(|n| format!("adam.m.{n}")))
        .chain(names.iter().map(|n| format!("adam.v.{n}")))
        .collect();
    if named.len() != expected.len() || named.iter().zip(&expected).any(|((a, _), b)| a != b) {
        return Err(CheckpointError::Malformed("unexpected tensor list".into()));
    }
    let mut it = named.into_iter().map(|(_, t)| t);
    let tensors: Vec<_> = it.by_ref().take(names.len()).collect();
    let first: Vec<_> = it.by_ref().take(names.len()).collect();
    let adam = first
        .into_iter()
        .zip(it)
        .map(|(m, v)| AdamState {
            step_count: header.adam_steps,
            first_moment: m,
            second_moment: v,
            beta1: header.adam_beta1,
            beta2: header.adam_beta2,
            epsilon: header.adam_epsilon,
        })
        .collect();
    let params = ModelParams::from_parts(network, header.seed, tensors, adam).map_err(malformed)?;
    let config = ExperimentConfig {
        network,
        learning_rate: header.learning_rate,
        epochs: header.epochs,
        batch_size: header.batch_size,
        seed: header.seed,
        train_fraction: header.train_fraction,
        checkpoint_every: header.checkpoint_every,
    };
    Ok(Checkpoint {
        params,
        config,
        epochs_completed: header.epochs_completed,
    })
}

/// Writes through a temporary file so an interrupted save never leaves a
/// half-written checkpoint behind.
pub fn save_checkpoint(path: impl AsRef<Path>, ck: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("partial");
    fs::write(&tmp, encode(ck)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|kind| Error::Checkpoint {
        path: path.to_path_buf(),
        kind,
    })
}

/// Loads a checkpoint that must hold the `expected` variant.
pub fn load_for(path: impl AsRef<Path>, expected: Variant) -> Result<Checkpoint> {
    let ck = load_checkpoint(path)?;
    let found = ck.params.config().variant;
    if found != expected {
        return Err(wearcast_core::Error::VariantMismatch {
            expected: expected.as_str(),
            found: found.as_str(),
        }
        .into());
    }
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let network = NetworkConfig::scaled(Variant::Backward, 32, 32, 2);
        let config = ExperimentConfig {
            network,
            seed: 9,
            ..ExperimentConfig::desk(Variant::Backward)
        };
        Checkpoint {
            params: ModelParams::build(network, 9).unwrap(),
            config,
            epochs_completed: 3,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let ck = sample();
        let bytes = encode(&ck);
        assert_eq!(decode(&bytes).unwrap(), ck);
        assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
    }

    #[test]
    fn damage_is_reported_not_loaded() {
        let bytes = encode(&sample());
        for cut in [0, 5, 11, 40, bytes.len() / 2, bytes.len() - 1] {
            let err = decode(&bytes[..cut]).unwrap_err();
            assert!(
                matches!(err, CheckpointError::Truncated | CheckpointError::Checksum { .. }),
                "cut {cut}: {err:?}"
            );
        }
        let mut flipped = bytes.clone();
        flipped[bytes.len() / 2] ^= 0x10;
        assert!(matches!(decode(&flipped), Err(CheckpointError::Checksum { .. })));

        let mut future = bytes.clone();
        future[8] = 2;
        assert_eq!(
            decode(&future),
            Err(CheckpointError::UnsupportedVersion { found: 2, supported: 1 })
        );
        assert_eq!(decode(b"P5\n1 1\n255\n\x00"), Err(CheckpointError::BadMagic));
    }
}
