//! Symmetric authenticated encryption for images and, in the revised scheme,
//! feature vectors.
//!
//! AES-256-GCM with a random 96-bit nonce per message. Wire form:
//! `nonce (12) ‖ ciphertext ‖ tag (16)`.

use core::fmt;

use alloc::vec::Vec;

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes256Gcm, Key, Nonce};
use num_bigint::BigUint;
use rand_core::CryptoRngCore;
use thiserror::Error;

use crate::codec::{self, CodecError, Reader};
use crate::encoding::{EncodedVector, EncodingError};

pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    /// Wrong key, flipped bit or truncated ciphertext; GCM cannot tell which.
    #[error("authentication failed")]
    Authentication,
    #[error("envelope is {0} bytes, shorter than nonce and tag")]
    TooShort(usize),
    #[error("malformed feature payload: {0}")]
    Payload(&'static str),
    #[error("feature payload: {0}")]
    Codec(#[from] CodecError),
    #[error("feature payload: {0}")]
    Encoding(#[from] EncodingError),
}

/// 256-bit symmetric key. Debug output is redacted.
#[derive(Clone, PartialEq, Eq)]
pub struct SymKey([u8; KEY_LEN]);

impl SymKey {
    pub fn generate<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; KEY_LEN];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        Self(bytes)
    }

    fn cipher(&self) -> Aes256Gcm {
        Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(&self.0))
    }
}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymKey(..)")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Envelope {
    nonce: [u8; NONCE_LEN],
    ciphertext_and_tag: Vec<u8>,
}

impl Envelope {
    pub fn nonce(&self) -> &[u8; NONCE_LEN] {
        &self.nonce
    }

    pub fn ciphertext_and_tag(&self) -> &[u8] {
        &self.ciphertext_and_tag
    }

    /// Encoded length: nonce, ciphertext and tag.
    pub fn len(&self) -> usize {
        NONCE_LEN + self.ciphertext_and_tag.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.ciphertext_and_tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EnvelopeError> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(EnvelopeError::TooShort(bytes.len()));
        }
        let mut nonce = [0u8; NONCE_LEN];
        nonce.copy_from_slice(&bytes[..NONCE_LEN]);
        Ok(Self {
            nonce,
            ciphertext_and_tag: bytes[NONCE_LEN..].to_vec(),
        })
    }

    #[cfg(test)]
    pub(crate) fn flip_bit(&mut self, bit: usize) {
        self.ciphertext_and_tag[bit / 8] ^= 1 << (bit % 8);
    }
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope")
            .field("len", &self.len())
            .finish_non_exhaustive()
    }
}

pub fn sym_encrypt<R: CryptoRngCore + ?Sized>(key: &SymKey, plaintext: &[u8], rng: &mut R) -> Envelope {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let ciphertext_and_tag = key
        .cipher()
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .expect("AES-GCM accepts any message below 64 GiB");
    Envelope {
        nonce,
        ciphertext_and_tag,
    }
}

pub fn sym_decrypt(key: &SymKey, envelope: &Envelope) -> Result<Vec<u8>, EnvelopeError> {
    if envelope.ciphertext_and_tag.len() < TAG_LEN {
        return Err(EnvelopeError::TooShort(envelope.len()));
    }
    key.cipher()
        .decrypt(Nonce::from_slice(&envelope.nonce), envelope.ciphertext_and_tag.as_slice())
        .map_err(|_| EnvelopeError::Authentication)
}

/// Header: `t (u32) ‖ S (u64) ‖ L (u32) ‖ n (L bytes)`, followed by `t`
/// residues of `L` bytes each, all big-endian.
pub fn encode_feature_payload(v: &EncodedVector) -> Vec<u8> {
    let width = v.modulus().bits().div_ceil(8) as usize;
    let mut out = Vec::with_capacity(feature_payload_len(v.dim(), width));
    codec::put_u32(&mut out, v.dim() as u32);
    codec::put_u64(&mut out, v.scale());
    codec::put_bytes(&mut out, &codec::biguint_to_minimal_be(v.modulus()));
    for r in v.residues() {
        out.extend_from_slice(&codec::biguint_to_fixed_be(r, width));
    }
    out
}

/// Byte length of a payload with `t` residues of `width` bytes.
pub fn feature_payload_len(t: usize, width: usize) -> usize {
    4 + 8 + 4 + width + t * width
}

pub fn decode_feature_payload(bytes: &[u8]) -> Result<EncodedVector, EnvelopeError> {
    let mut r = Reader::new(bytes);
    let t = r.u32()? as usize;
    let scale = r.u64()?;
    let modulus_bytes = r.bytes()?;
    if t == 0 {
        return Err(EnvelopeError::Payload("dimension must be at least 1"));
    }
    if modulus_bytes.first().is_none_or(|&b| b == 0) {
        return Err(EnvelopeError::Payload("modulus must be non-zero and minimally encoded"));
    }
    let width = modulus_bytes.len();
    if r.remaining() != t * width {
        return Err(EnvelopeError::Payload("residue block length does not match t and n"));
    }
    let modulus = BigUint::from_bytes_be(modulus_bytes);
    let residues = (0..t)
        .map(|_| r.take(width).map(BigUint::from_bytes_be))
        .collect::<Result<Vec<_>, _>>()?;
    r.finish()?;
    Ok(EncodedVector::new(residues, scale, modulus)?)
}
