//! Length-prefixed binary framing: `kind (u8) ‖ payload length (u32) ‖ payload`.
//!
//! Integers are big-endian. Paillier ciphertexts travel as length-prefixed
//! minimal big-endian strings; envelopes as length-prefixed
//! `nonce ‖ ciphertext ‖ tag`.

use alloc::vec::Vec;

use num_bigint::BigUint;

use super::transcript::MessageKind;
use super::ProtocolError;
use crate::codec::{self, Reader};
use crate::encoding::EncodedVector;
use crate::envelope::{decode_feature_payload, encode_feature_payload, Envelope};
use crate::paillier::{Ciphertext, PublicKey};

pub const FRAME_HEADER_LEN: usize = 5;

const FEATURES_PAILLIER: u8 = 0;
const FEATURES_SYMMETRIC: u8 = 1;

/// How a record's feature vector is protected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncryptedFeatures {
    /// One Paillier ciphertext per component (Schemes 1 and 2).
    Paillier(Vec<Ciphertext>),
    /// One envelope over the encoded feature payload (revised scheme).
    Symmetric(Envelope),
}

/// Server-side bundle for image `index`: `chi` (Scheme 2 only), the
/// encrypted features and the encrypted image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredRecord {
    pub index: u32,
    pub chi: Option<Ciphertext>,
    pub features: EncryptedFeatures,
    pub image: Envelope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    UploadRecords(Vec<StoredRecord>),
    FeatureRequest,
    EncryptedFeatures(Vec<(u32, EncryptedFeatures)>),
    /// The query vector, sent unencrypted as the protocol prescribes.
    PlainQuery(EncodedVector),
    EncryptedDistances(Vec<(u32, Ciphertext)>),
    IndexSet(Vec<u32>),
    Images(Vec<(u32, Envelope)>),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::UploadRecords(_) => MessageKind::UploadRecords,
            Message::FeatureRequest => MessageKind::FeatureRequest,
            Message::EncryptedFeatures(_) => MessageKind::EncryptedFeatures,
            Message::PlainQuery(_) => MessageKind::PlainQuery,
            Message::EncryptedDistances(_) => MessageKind::EncryptedDistances,
            Message::IndexSet(_) => MessageKind::IndexSet,
            Message::Images(_) => MessageKind::Images,
        }
    }
}

fn put_ciphertext(out: &mut Vec<u8>, c: &Ciphertext) {
    codec::put_biguint(out, c.value());
}

fn put_features(out: &mut Vec<u8>, f: &EncryptedFeatures) {
    match f {
        EncryptedFeatures::Paillier(cts) => {
            codec::put_u8(out, FEATURES_PAILLIER);
            codec::put_u32(out, cts.len() as u32);
            cts.iter().for_each(|c| put_ciphertext(out, c));
        }
        EncryptedFeatures::Symmetric(env) => {
            codec::put_u8(out, FEATURES_SYMMETRIC);
            codec::put_bytes(out, &env.to_bytes());
        }
    }
}

fn encode_payload(msg: &Message) -> Vec<u8> {
    let mut out = Vec::new();
    match msg {
        Message::UploadRecords(records) => {
            codec::put_u32(&mut out, records.len() as u32);
            for r in records {
                codec::put_u32(&mut out, r.index);
                match &r.chi {
                    Some(chi) => {
                        codec::put_u8(&mut out, 1);
                        put_ciphertext(&mut out, chi);
                    }
                    None => codec::put_u8(&mut out, 0),
                }
                put_features(&mut out, &r.features);
                codec::put_bytes(&mut out, &r.image.to_bytes());
            }
        }
        Message::FeatureRequest => {}
        Message::EncryptedFeatures(items) => {
            codec::put_u32(&mut out, items.len() as u32);
            for (index, f) in items {
                codec::put_u32(&mut out, *index);
                put_features(&mut out, f);
            }
        }
        Message::PlainQuery(q) => out = encode_feature_payload(q),
        Message::EncryptedDistances(items) => {
            codec::put_u32(&mut out, items.len() as u32);
            for (index, c) in items {
                codec::put_u32(&mut out, *index);
                put_ciphertext(&mut out, c);
            }
        }
        Message::IndexSet(indices) => {
            codec::put_u32(&mut out, indices.len() as u32);
            indices.iter().for_each(|i| codec::put_u32(&mut out, *i));
        }
        Message::Images(items) => {
            codec::put_u32(&mut out, items.len() as u32);
            for (index, env) in items {
                codec::put_u32(&mut out, *index);
                codec::put_bytes(&mut out, &env.to_bytes());
            }
        }
    }
    out
}

/// Serializes `msg` into one frame.
pub fn encode(msg: &Message) -> Vec<u8> {
    let payload = encode_payload(msg);
    let mut frame = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    codec::put_u8(&mut frame, msg.kind().tag());
    codec::put_u32(&mut frame, payload.len() as u32);
    frame.extend_from_slice(&payload);
    frame
}

/// Counts bound by the remaining input so a hostile length cannot force a
/// huge allocation.
fn read_count(r: &mut Reader<'_>, min_item_len: usize) -> Result<usize, ProtocolError> {
    let count = r.u32()? as usize;
    if count.saturating_mul(min_item_len) > r.remaining() {
        return Err(ProtocolError::Malformed("item count exceeds payload"));
    }
    Ok(count)
}

fn read_ciphertext(r: &mut Reader<'_>, pk: &PublicKey) -> Result<Ciphertext, ProtocolError> {
    let v: BigUint = r.biguint()?;
    Ok(Ciphertext::new(pk, v)?)
}

fn read_envelope(r: &mut Reader<'_>) -> Result<Envelope, ProtocolError> {
    Ok(Envelope::from_bytes(r.bytes()?)?)
}

fn read_features(r: &mut Reader<'_>, pk: &PublicKey) -> Result<EncryptedFeatures, ProtocolError> {
    match r.u8()? {
        FEATURES_PAILLIER => {
            let t = read_count(r, 4)?;
            let cts = (0..t)
                .map(|_| read_ciphertext(r, pk))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(EncryptedFeatures::Paillier(cts))
        }
        FEATURES_SYMMETRIC => Ok(EncryptedFeatures::Symmetric(read_envelope(r)?)),
        _ => Err(ProtocolError::Malformed("unknown feature encryption tag")),
    }
}

/// Parses one frame. Ciphertexts are validated against `pk`.
pub fn decode(frame: &[u8], pk: &PublicKey) -> Result<Message, ProtocolError> {
    let mut r = Reader::new(frame);
    let kind = MessageKind::from_tag(r.u8()?).ok_or(ProtocolError::Malformed("unknown message kind"))?;
    let payload = r.bytes()?;
    r.finish()?;
    let mut r = Reader::new(payload);
    let msg = match kind {
        MessageKind::UploadRecords => {
            let count = read_count(&mut r, 4)?;
            let mut records = Vec::with_capacity(count);
            for _ in 0..count {
                let index = r.u32()?;
                let chi = match r.u8()? {
                    0 => None,
                    1 => Some(read_ciphertext(&mut r, pk)?),
                    _ => return Err(ProtocolError::Malformed("bad chi flag")),
                };
                let features = read_features(&mut r, pk)?;
                let image = read_envelope(&mut r)?;
                records.push(StoredRecord {
                    index,
                    chi,
                    features,
                    image,
                });
            }
            Message::UploadRecords(records)
        }
        MessageKind::FeatureRequest => Message::FeatureRequest,
        MessageKind::EncryptedFeatures => {
            let count = read_count(&mut r, 4)?;
            let items = (0..count)
                .map(|_| Ok((r.u32()?, read_features(&mut r, pk)?)))
                .collect::<Result<Vec<_>, ProtocolError>>()?;
            Message::EncryptedFeatures(items)
        }
        MessageKind::PlainQuery => {
            let q = decode_feature_payload(payload)?;
            return Ok(Message::PlainQuery(q));
        }
        MessageKind::EncryptedDistances => {
            let count = read_count(&mut r, 4)?;
            let items = (0..count)
                .map(|_| Ok((r.u32()?, read_ciphertext(&mut r, pk)?)))
                .collect::<Result<Vec<_>, ProtocolError>>()?;
            Message::EncryptedDistances(items)
        }
        MessageKind::IndexSet => {
            let count = read_count(&mut r, 4)?;
            let items = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
            Message::IndexSet(items)
        }
        MessageKind::Images => {
            let count = read_count(&mut r, 4)?;
            let items = (0..count)
                .map(|_| Ok((r.u32()?, read_envelope(&mut r)?)))
                .collect::<Result<Vec<_>, ProtocolError>>()?;
            Message::Images(items)
        }
    };
    r.finish()?;
    Ok(msg)
}
