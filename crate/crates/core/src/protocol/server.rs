use alloc::boxed::Box;
use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_core::CryptoRngCore;

use super::transcript::MessageKind;
use super::wire::{EncryptedFeatures, Message, StoredRecord};
use super::{ProtocolError, RoleCounters, Scheme};
use crate::encoding::{EncodedVector, EncodingError};
use crate::paillier::{encrypt, hom_add, hom_scale, invert, Ciphertext, Plaintext, PublicKey};

/// `h = E(||f - q||^2)` for one stored record, from `chi = E(||f||^2)`,
/// `E(f_l)` and the plaintext query:
///
/// `h = chi * prod_l E(f_l)^(-2 q_l) * E(||q||^2)`
///
/// Terms with `q_l < 0` are folded into `chi` directly, terms with
/// `q_l >= 0` into a second product that is inverted once. That costs `t`
/// exponentiate-and-accumulate steps, one inversion and two multiplications.
pub fn compute_encrypted_distance(
    pk: &PublicKey,
    record: &StoredRecord,
    q: &EncodedVector,
    q_sq: &Ciphertext,
    counters: &mut RoleCounters,
) -> Result<Ciphertext, ProtocolError> {
    let chi = record.chi.as_ref().ok_or(ProtocolError::Malformed("record has no chi"))?;
    let EncryptedFeatures::Paillier(f) = &record.features else {
        return Err(ProtocolError::Malformed("record features are not Paillier ciphertexts"));
    };
    if f.len() != q.dim() {
        return Err(ProtocolError::Query(EncodingError::DimensionMismatch {
            expected: f.len(),
            found: q.dim(),
        }));
    }
    let mut neg = chi.clone();
    // E(0) with r = 1
    let mut pos = Ciphertext::from_raw(num_bigint::BigUint::from(1u8));
    for (f_l, q_l) in f.iter().zip(q.centered()) {
        let k = BigInt::from(2u8) * BigInt::from(q_l.magnitude().clone());
        let term = hom_scale(pk, f_l, &k)?;
        counters.hom_exps += 1;
        if q_l.sign() == num_bigint::Sign::Minus {
            neg = hom_add(pk, &neg, &term);
        } else {
            pos = hom_add(pk, &pos, &term);
        }
    }
    let pos_inv = invert(pk, &pos)?;
    counters.hom_inversions += 1;
    let d = hom_add(pk, &neg, &pos_inv);
    counters.hom_mults += 2;
    Ok(hom_add(pk, &d, q_sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Empty,
    Ready,
    AwaitingIndices,
}

pub(crate) struct Server {
    scheme: Scheme,
    pk: PublicKey,
    records: Vec<StoredRecord>,
    state: State,
    rng: Box<dyn CryptoRngCore + Send>,
    pub(crate) counters: RoleCounters,
}

impl Server {
    pub(crate) fn new(scheme: Scheme, pk: PublicKey, rng: Box<dyn CryptoRngCore + Send>) -> Self {
        Self {
            scheme,
            pk,
            records: Vec::new(),
            state: State::Empty,
            rng,
            counters: RoleCounters::default(),
        }
    }

    pub(crate) fn records(&self) -> &[StoredRecord] {
        &self.records
    }

    fn unexpected(&self, kind: MessageKind) -> ProtocolError {
        ProtocolError::UnexpectedMessage {
            scheme: self.scheme,
            kind,
        }
    }

    fn validate_upload(&self, records: &[StoredRecord]) -> Result<(), ProtocolError> {
        let mut t = None;
        for (i, r) in records.iter().enumerate() {
            if r.index as usize != i + 1 {
                return Err(ProtocolError::Malformed("record indices must run 1..=N"));
            }
            let fits = match (&r.features, self.scheme) {
                (EncryptedFeatures::Paillier(f), Scheme::Scheme1 | Scheme::Scheme2) => {
                    if *t.get_or_insert(f.len()) != f.len() {
                        return Err(ProtocolError::Malformed("feature dimensions differ"));
                    }
                    true
                }
                (EncryptedFeatures::Symmetric(_), Scheme::Revised) => true,
                _ => false,
            };
            if !fits || r.chi.is_some() != (self.scheme == Scheme::Scheme2) {
                return Err(ProtocolError::Malformed("record layout does not fit the scheme"));
            }
        }
        Ok(())
    }

    /// Processes one client message and returns the reply, if any.
    pub(crate) fn handle(&mut self, msg: Message) -> Result<Option<Message>, ProtocolError> {
        let kind = msg.kind();
        match (msg, self.state) {
            (Message::UploadRecords(records), State::Empty) => {
                self.validate_upload(&records)?;
                self.records = records;
                self.state = State::Ready;
                Ok(None)
            }
            (Message::UploadRecords(_), _) => Err(ProtocolError::AlreadyUploaded),
            (_, State::Empty) => Err(ProtocolError::NotUploaded),
            (Message::FeatureRequest, State::Ready) if self.scheme != Scheme::Scheme2 => {
                self.state = State::AwaitingIndices;
                let items = self.records.iter().map(|r| (r.index, r.features.clone())).collect();
                Ok(Some(Message::EncryptedFeatures(items)))
            }
            (Message::PlainQuery(q), State::Ready) if self.scheme == Scheme::Scheme2 => {
                if q.modulus() != self.pk.n() {
                    return Err(ProtocolError::Query(EncodingError::ParameterMismatch));
                }
                let mut items = Vec::with_capacity(self.records.len());
                if !self.records.is_empty() {
                    let q_sq = encrypt(&self.pk, &Plaintext::new(q.sq_norm_residue()), &mut *self.rng)?;
                    self.counters.pk_encrypts += 1;
                    for r in &self.records {
                        let h = compute_encrypted_distance(&self.pk, r, &q, &q_sq, &mut self.counters)?;
                        items.push((r.index, h));
                    }
                }
                self.state = State::AwaitingIndices;
                Ok(Some(Message::EncryptedDistances(items)))
            }
            (Message::IndexSet(indices), State::AwaitingIndices) => {
                let n = self.records.len() as u32;
                if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
                    return Err(ProtocolError::IndexOutOfRange(bad));
                }
                if indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ProtocolError::Malformed("index set must be strictly increasing"));
                }
                self.state = State::Ready;
                let items = indices
                    .iter()
                    .map(|&i| (i, self.records[i as usize - 1].image.clone()))
                    .collect();
                Ok(Some(Message::Images(items)))
            }
            _ => Err(self.unexpected(kind)),
        }
    }
}
