//! Little-endian cursor helpers shared by the volume and checkpoint formats.

use crate::error::FormatError;

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(FormatError::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let offset = self.pos;
        let available = (self.buf.len() - self.pos).min(4);
        let found = &self.buf[self.pos..self.pos + available];
        if found != expected {
            return Err(FormatError::BadMagic {
                offset,
                expected,
                found: found.to_vec(),
            });
        }
        self.pos += 4;
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub fn version(&mut self, expected: u32) -> Result<(), FormatError> {
        let offset = self.pos;
        let found = self.u32()?;
        if found != expected {
            return Err(FormatError::UnsupportedVersion {
                offset,
                expected,
                found,
            });
        }
        Ok(())
    }

    pub fn f32s(&mut self, count: usize) -> Result<Vec<f32>, FormatError> {
        let bytes = count.checked_mul(4).ok_or(FormatError::DimensionOverflow {
            dims: vec![count as u64, 4],
        })?;
        Ok(self
            .take(bytes)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    pub fn finish(self) -> Result<(), FormatError> {
        let count = self.buf.len() - self.pos;
        if count > 0 {
            return Err(FormatError::TrailingBytes {
                offset: self.pos,
                count,
            });
        }
        Ok(())
    }
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_f32s(out: &mut Vec<u8>, values: &[f32]) {
    out.reserve(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Element count of a shape read from disk, rejecting products that do not
/// fit in memory.
pub(crate) fn checked_volume(dims: &[u64], elem_size: usize) -> Result<usize, FormatError> {
    let overflow = || FormatError::DimensionOverflow {
        dims: dims.to_vec(),
    };
    let mut n: usize = 1;
    for &d in dims {
        n = n
            .checked_mul(usize::try_from(d).map_err(|_| overflow())?)
            .ok_or_else(overflow)?;
    }
    n.checked_mul(elem_size)
        .filter(|&bytes| bytes <= isize::MAX as usize)
        .ok_or_else(overflow)?;
    Ok(n)
}
