//! Minimal big-endian byte codec shared by the key, payload and wire formats.

use alloc::vec::Vec;

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unexpected end of input: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{0} trailing bytes after the last field")]
    TrailingBytes(usize),
    #[error("non-canonical integer encoding (leading zero byte)")]
    NonCanonical,
    #[error("length field {0} exceeds the remaining input")]
    LengthOverflow(u64),
}

pub fn put_u8(out: &mut Vec<u8>, v: u8) {
    out.push(v);
}

pub fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

pub fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// Length-prefixed (u32) byte string.
pub fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, bytes.len() as u32);
    out.extend_from_slice(bytes);
}

/// Length-prefixed minimal big-endian unsigned integer. Zero encodes as an
/// empty string.
pub fn put_biguint(out: &mut Vec<u8>, v: &BigUint) {
    put_bytes(out, &biguint_to_minimal_be(v));
}

pub fn biguint_to_minimal_be(v: &BigUint) -> Vec<u8> {
    if v.bits() == 0 {
        Vec::new()
    } else {
        v.to_bytes_be()
    }
}

/// Big-endian, left-padded to exactly `width` bytes. Panics if `v` needs more.
pub fn biguint_to_fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let raw = biguint_to_minimal_be(v);
    assert!(raw.len() <= width, "value wider than the fixed field");
    let mut out = Vec::with_capacity(width);
    out.resize(width - raw.len(), 0);
    out.extend_from_slice(&raw);
    out
}

/// Cursor over an input buffer.
pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < len {
            return Err(CodecError::Truncated {
                needed: len - self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(len);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_be_bytes(a))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let len = self.u32()? as usize;
        if len > self.buf.len() {
            return Err(CodecError::LengthOverflow(len as u64));
        }
        self.take(len)
    }

    pub fn biguint(&mut self) -> Result<BigUint, CodecError> {
        let raw = self.bytes()?;
        if raw.first() == Some(&0) {
            return Err(CodecError::NonCanonical);
        }
        Ok(BigUint::from_bytes_be(raw))
    }

    pub fn finish(self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes(self.buf.len()))
        }
    }
}
