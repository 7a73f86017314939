//! `VVOL` volume files.
//!
//! Little-endian: magic `"VVOL"`, `u32` version, `u8` dtype (0 = f32
//! intensity, 1 = u8 label in {0, 1}), `u32` D, H, W, then `D·H·W` elements
//! depth-major. The header is 21 bytes.

use std::fs;
use std::path::Path;

use crate::binio::{checked_volume, put_f32s, put_u32, Reader};
use crate::error::{Error, FormatError, Result};

pub const MAGIC: [u8; 4] = *b"VVOL";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 21;

const DTYPE_F32: u8 = 0;
const DTYPE_LABEL: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum VolumeData {
    Intensity { dims: [usize; 3], data: Vec<f32> },
    Label { dims: [usize; 3], data: Vec<u8> },
}

impl VolumeData {
    pub fn dims(&self) -> [usize; 3] {
        match self {
            VolumeData::Intensity { dims, .. } | VolumeData::Label { dims, .. } => *dims,
        }
    }

    fn check(&self) -> Result<()> {
        let (dims, len) = match self {
            VolumeData::Intensity { dims, data } => (dims, data.len()),
            VolumeData::Label { dims, data } => {
                if let Some(&bad) = data.iter().find(|&&l| l > 1) {
                    return Err(Error::DataQuality(format!(
                        "label value {bad} is not binary"
                    )));
                }
                (dims, data.len())
            }
        };
        if dims.iter().any(|&d| d > u32::MAX as usize) || dims.iter().product::<usize>() != len {
            return Err(Error::shape(format!(
                "{len} elements do not fill extents {dims:?}"
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check()?;
        let dims = self.dims();
        let n: usize = dims.iter().product();
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * n);
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, VERSION);
        match self {
            VolumeData::Intensity { data, .. } => {
                out.push(DTYPE_F32);
                dims.iter().for_each(|&d| put_u32(&mut out, d as u32));
                put_f32s(&mut out, data);
            }
            VolumeData::Label { data, .. } => {
                out.push(DTYPE_LABEL);
                dims.iter().for_each(|&d| put_u32(&mut out, d as u32));
                out.extend_from_slice(data);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader::new(bytes);
        r.magic(MAGIC)?;
        r.version(VERSION)?;
        let dtype_offset = r.offset();
        let dtype = r.u8()?;
        let elem = match dtype {
            DTYPE_F32 => 4,
            DTYPE_LABEL => 1,
            found => {
                return Err(FormatError::BadDtype {
                    offset: dtype_offset,
                    found,
                })
            }
        };
        let raw = [r.u32()? as u64, r.u32()? as u64, r.u32()? as u64];
        let n = checked_volume(&raw, elem)?;
        let dims = raw.map(|d| d as usize);
        let out = if dtype == DTYPE_F32 {
            VolumeData::Intensity {
                dims,
                data: r.f32s(n)?,
            }
        } else {
            let start = r.offset();
            let data = r.take(n)?.to_vec();
            if let Some(i) = data.iter().position(|&l| l > 1) {
                return Err(FormatError::InvalidLabel {
                    offset: start + i,
                    found: data[i],
                });
            }
            VolumeData::Label { dims, data }
        };
        r.finish()?;
        Ok(out)
    }
}

pub fn write_volume(path: impl AsRef<Path>, volume: &VolumeData) -> Result<()> {
    fs::write(path, volume.to_bytes()?)?;
    Ok(())
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<VolumeData> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    VolumeData::from_bytes(&bytes).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })
}
