//! `VCKP` checkpoint files.
//!
//! Layout (little-endian):
//!
//! ```text
//! "VCKP"  u32 version
//! u32 input_channels  u32 kernel_size  u32 levels  levels × u32 channels
//! u64 iteration  u64 total_iterations  f32 validation_f1 (NaN if none)
//! u64 parameter_count  parameter_count × f32
//! u32 descriptor_count, then per descriptor:
//!     u8 class (0 neuron, 1 background)  u8 mode (0 relaxed, 1 strict)
//!     u64 iteration  u32 dim (0 = unset)  dim × f32
//! ```

use std::fs;
use std::path::Path;

use super::{SegNet, SegNetConfig};
use crate::autodiff::Tensor;
use crate::binio::{put_f32s, put_u32, put_u64, Reader};
use crate::error::{Error, FormatError, Result};
use crate::vcvrl::{DescriptorMode, DescriptorSet, PoolClass, PoolDescriptor};

pub const MAGIC: [u8; 4] = *b"VCKP";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub net: SegNet,
    /// Pool descriptor state, present for descriptor-mode runs.
    pub descriptors: Option<DescriptorSet>,
    pub iteration: u64,
    pub total_iterations: u64,
    pub validation_f1: Option<f32>,
}

impl Checkpoint {
    pub fn new(net: SegNet) -> Self {
        Self {
            net,
            descriptors: None,
            iteration: 0,
            total_iterations: 0,
            validation_f1: None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let config = self.net.config();
        let mut out = Vec::with_capacity(64 + 4 * self.net.parameter_count());
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, config.input_channels as u32);
        put_u32(&mut out, config.kernel_size as u32);
        put_u32(&mut out, config.levels as u32);
        for &c in &config.channels {
            put_u32(&mut out, c as u32);
        }
        put_u64(&mut out, self.iteration);
        put_u64(&mut out, self.total_iterations);
        out.extend_from_slice(&self.validation_f1.unwrap_or(f32::NAN).to_le_bytes());
        put_u64(&mut out, self.net.parameter_count() as u64);
        for p in self.net.parameters() {
            put_f32s(&mut out, p.data());
        }
        let descriptors: Vec<&PoolDescriptor> = self
            .descriptors
            .iter()
            .flat_map(|set| [&set.neuron, &set.background])
            .collect();
        put_u32(&mut out, descriptors.len() as u32);
        for d in descriptors {
            out.push(match d.class() {
                PoolClass::Neuron => 0,
                PoolClass::Background => 1,
            });
            out.push(match d.mode() {
                DescriptorMode::Relaxed => 0,
                DescriptorMode::Strict => 1,
            });
            put_u64(&mut out, d.iteration());
            let v = d.vector().unwrap_or(&[]);
            put_u32(&mut out, v.len() as u32);
            put_f32s(&mut out, v);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        r.version(VERSION)?;
        let config_offset = r.offset();
        let input_channels = r.u32()? as usize;
        let kernel_size = r.u32()? as usize;
        let levels = r.u32()? as usize;
        if levels > 16 {
            return Err(FormatError::InvalidField {
                offset: config_offset + 8,
                reason: format!("{levels} levels"),
            }
            .into());
        }
        let channels = (0..levels)
            .map(|_| r.u32().map(|c| c as usize))
            .collect::<Result<Vec<_>, _>>()?;
        if kernel_size > 15 || input_channels > 1 << 16 || channels.iter().any(|&c| c > 1 << 16) {
            let mut dims = vec![input_channels as u64, kernel_size as u64];
            dims.extend(channels.iter().map(|&c| c as u64));
            return Err(FormatError::DimensionOverflow { dims }.into());
        }
        let config = SegNetConfig {
            levels,
            channels,
            input_channels,
            kernel_size,
        };
        config.validate().map_err(|e| FormatError::InvalidField {
            offset: config_offset,
            reason: e.to_string(),
        })?;

        let iteration = r.u64()?;
        let total_iterations = r.u64()?;
        let f1 = f32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
        let validation_f1 = (!f1.is_nan()).then_some(f1);

        let count_offset = r.offset();
        let count = r.u64()?;
        let expected = config.parameter_count() as u64;
        if count != expected {
            return Err(FormatError::InvalidField {
                offset: count_offset,
                reason: format!(
                    "parameter count {count} does not match the stored config ({expected})"
                ),
            }
            .into());
        }
        let flat = r.f32s(expected as usize)?;
        let mut params = Vec::new();
        let mut at = 0;
        for (cout, cin, k) in config.layer_shapes() {
            let wlen = cout * cin * k * k * k;
            params.push(Tensor::new(
                [cout, cin, k, k, k],
                flat[at..at + wlen].to_vec(),
            )?);
            at += wlen;
            params.push(Tensor::new([cout], flat[at..at + cout].to_vec())?);
            at += cout;
        }
        let net = SegNet::from_parameters(config, params)?;

        let desc_offset = r.offset();
        let descriptors = match r.u32()? {
            0 => None,
            2 => {
                let neuron = read_descriptor(&mut r, PoolClass::Neuron)?;
                let background = read_descriptor(&mut r, PoolClass::Background)?;
                Some(DescriptorSet { neuron, background })
            }
            n => {
                return Err(FormatError::InvalidField {
                    offset: desc_offset,
                    reason: format!("{n} descriptors (expected 0 or 2)"),
                }
                .into())
            }
        };
        r.finish()?;
        Ok(Self {
            net,
            descriptors,
            iteration,
            total_iterations,
            validation_f1,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Parse(source) => Error::Format {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }
}

fn read_descriptor(r: &mut Reader<'_>, expected: PoolClass) -> Result<PoolDescriptor> {
    let offset = r.offset();
    let class = match r.u8()? {
        0 => PoolClass::Neuron,
        1 => PoolClass::Background,
        other => {
            return Err(FormatError::InvalidField {
                offset,
                reason: format!("descriptor class tag {other}"),
            }
            .into())
        }
    };
    if class != expected {
        return Err(FormatError::InvalidField {
            offset,
            reason: format!("expected the {expected} descriptor, found {class}"),
        }
        .into());
    }
    let mode = match r.u8()? {
        0 => DescriptorMode::Relaxed,
        1 => DescriptorMode::Strict,
        other => {
            return Err(FormatError::InvalidField {
                offset: offset + 1,
                reason: format!("descriptor mode tag {other}"),
            }
            .into())
        }
    };
    let iteration = r.u64()?;
    let dim = r.u32()? as usize;
    let vector = (dim > 0).then(|| r.f32s(dim)).transpose()?;
    Ok(PoolDescriptor::restore(class, mode, iteration, vector))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let mut ckpt = Checkpoint::new(SegNet::new(SegNetConfig::desk(), 5).unwrap());
        let mut set = DescriptorSet::new(DescriptorMode::Strict);
        set.neuron.update(&[0.25; 16], 3, 10, 1.0, true).unwrap();
        ckpt.descriptors = Some(set);
        ckpt.iteration = 3;
        ckpt.total_iterations = 10;
        ckpt.validation_f1 = Some(0.75);
        ckpt
    }

    #[test]
    fn byte_exact_round_trip() {
        let ckpt = sample();
        let bytes = ckpt.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn corruption_is_reported() {
        let bytes = sample().to_bytes();
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(Error::Parse(FormatError::BadMagic { offset: 0, .. }))
        ));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(Error::Parse(FormatError::UnsupportedVersion {
                found: 9,
                ..
            }))
        ));
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Parse(FormatError::Truncated { .. }))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(
            Checkpoint::from_bytes(&long),
            Err(Error::Parse(FormatError::TrailingBytes { count: 1, .. }))
        ));
    }
}
