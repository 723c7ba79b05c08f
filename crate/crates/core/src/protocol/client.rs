use alloc::boxed::Box;
use alloc::vec::Vec;

use num_bigint::BigUint;
use rand_core::CryptoRngCore;

use super::wire::{EncryptedFeatures, Message, StoredRecord};
use super::{pad_index_set, MatchSets, ProtocolError, RoleCounters, Scheme};
use crate::encoding::{
    encode_vector, encoded_sq_distance, residue_within, DistanceBound, EncodedVector,
    EncodingError, FeatureVector,
};
use crate::envelope::{
    decode_feature_payload, encode_feature_payload, sym_decrypt, sym_encrypt, Envelope, SymKey,
};
use crate::paillier::{
    decrypt, encrypt_as_owner, keygen, Ciphertext, PaillierError, Plaintext, PublicKey, SecretKey,
};

/// Everything the client keeps private: the Paillier key pair and the
/// symmetric key for images (and, in the revised scheme, features).
#[derive(Debug, Clone)]
pub struct ClientKeys {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub symmetric: SymKey,
}

impl ClientKeys {
    pub fn generate<R: CryptoRngCore + ?Sized>(bits: u64, rng: &mut R) -> Result<Self, PaillierError> {
        let (public, secret) = keygen(bits, rng)?;
        let symmetric = SymKey::generate(rng);
        Ok(Self {
            public,
            secret,
            symmetric,
        })
    }

    pub fn new(public: PublicKey, secret: SecretKey, symmetric: SymKey) -> Self {
        Self {
            public,
            secret,
            symmetric,
        }
    }
}

pub(crate) struct Client {
    scheme: Scheme,
    keys: ClientKeys,
    scale: u64,
    enforce_bound: bool,
    rng: Box<dyn CryptoRngCore + Send>,
    pub(crate) counters: RoleCounters,
    /// `(N, t)` once the store is populated.
    store: Option<(u32, usize)>,
}

impl Client {
    pub(crate) fn new(
        scheme: Scheme,
        keys: ClientKeys,
        scale: u64,
        enforce_bound: bool,
        rng: Box<dyn CryptoRngCore + Send>,
    ) -> Self {
        Self {
            scheme,
            keys,
            scale,
            enforce_bound,
            rng,
            counters: RoleCounters::default(),
            store: None,
        }
    }

    pub(crate) fn public_key(&self) -> &PublicKey {
        &self.keys.public
    }

    pub(crate) fn scale(&self) -> u64 {
        self.scale
    }

    pub(crate) fn store(&self) -> Option<(u32, usize)> {
        self.store
    }

    fn bound(&self, t: usize) -> Result<Option<DistanceBound>, EncodingError> {
        if self.enforce_bound {
            DistanceBound::new(self.keys.public.n(), t, self.scale).map(Some)
        } else {
            Ok(None)
        }
    }

    fn encode_checked(
        &self,
        v: &FeatureVector,
        bound: Option<&DistanceBound>,
    ) -> Result<EncodedVector, EncodingError> {
        let encoded = encode_vector(v, self.scale, self.keys.public.n())?;
        if let Some(b) = bound {
            b.check(&encoded)?;
        }
        Ok(encoded)
    }

    fn pk_encrypt(&mut self, m: BigUint) -> Result<Ciphertext, PaillierError> {
        self.counters.pk_encrypts += 1;
        encrypt_as_owner(&self.keys.public, &self.keys.secret, &Plaintext::new(m), &mut *self.rng)
    }

    fn pk_decrypt(&mut self, c: &Ciphertext) -> Result<BigUint, PaillierError> {
        self.counters.pk_decrypts += 1;
        Ok(decrypt(&self.keys.public, &self.keys.secret, c)?.into_inner())
    }

    fn seal(&mut self, plaintext: &[u8]) -> Envelope {
        self.counters.sym_encrypts += 1;
        sym_encrypt(&self.keys.symmetric, plaintext, &mut *self.rng)
    }

    fn open(&mut self, envelope: &Envelope) -> Result<Vec<u8>, ProtocolError> {
        self.counters.sym_decrypts += 1;
        Ok(sym_decrypt(&self.keys.symmetric, envelope)?)
    }

    /// Encodes and encrypts the collection for the server.
    pub(crate) fn prepare_upload(
        &mut self,
        features: &[FeatureVector],
        images: &[Vec<u8>],
    ) -> Result<Message, ProtocolError> {
        if self.store.is_some() {
            return Err(ProtocolError::AlreadyUploaded);
        }
        if features.len() != images.len() {
            return Err(ProtocolError::LengthMismatch {
                features: features.len(),
                images: images.len(),
            });
        }
        let n = u32::try_from(features.len()).map_err(|_| ProtocolError::Malformed("too many images"))?;
        let t = features.first().map_or(0, FeatureVector::dim);
        let bound = if n > 0 { self.bound(t)? } else { None };

        let mut encoded = Vec::with_capacity(features.len());
        for (i, v) in features.iter().enumerate() {
            let index = i as u32 + 1;
            if v.dim() != t {
                return Err(ProtocolError::Record {
                    index,
                    source: EncodingError::DimensionMismatch {
                        expected: t,
                        found: v.dim(),
                    },
                });
            }
            let e = self
                .encode_checked(v, bound.as_ref())
                .map_err(|source| ProtocolError::Record { index, source })?;
            encoded.push(e);
        }

        let mut records = Vec::with_capacity(encoded.len());
        for (i, (e, image)) in encoded.iter().zip(images).enumerate() {
            let features = match self.scheme {
                Scheme::Scheme1 | Scheme::Scheme2 => EncryptedFeatures::Paillier(
                    e.residues()
                        .iter()
                        .map(|x| self.pk_encrypt(x.clone()))
                        .collect::<Result<_, _>>()?,
                ),
                Scheme::Revised => EncryptedFeatures::Symmetric(self.seal(&encode_feature_payload(e))),
            };
            let chi = match self.scheme {
                Scheme::Scheme2 => Some(self.pk_encrypt(e.sq_norm_residue())?),
                _ => None,
            };
            let image = self.seal(image);
            records.push(StoredRecord {
                index: i as u32 + 1,
                chi,
                features,
                image,
            });
        }
        self.store = Some((n, t));
        Ok(Message::UploadRecords(records))
    }

    pub(crate) fn encode_query(&self, q: &FeatureVector) -> Result<EncodedVector, ProtocolError> {
        let (n, t) = self.store.ok_or(ProtocolError::NotUploaded)?;
        if n > 0 && q.dim() != t {
            return Err(ProtocolError::Query(EncodingError::DimensionMismatch {
                expected: t,
                found: q.dim(),
            }));
        }
        let bound = if n > 0 {
            self.bound(t).map_err(ProtocolError::Query)?
        } else {
            None
        };
        self.encode_checked(q, bound.as_ref()).map_err(ProtocolError::Query)
    }

    fn expect_indices<'a, I>(&self, indices: I) -> Result<(), ProtocolError>
    where
        I: ExactSizeIterator<Item = &'a u32>,
    {
        let (n, _) = self.store.ok_or(ProtocolError::NotUploaded)?;
        if indices.len() != n as usize {
            return Err(ProtocolError::Malformed("response does not cover the store"));
        }
        for (expected, &got) in (1..=n).zip(indices) {
            if got != expected {
                return Err(ProtocolError::Malformed("response indices out of order"));
            }
        }
        Ok(())
    }

    /// Scheme 1 and revised: decrypt every feature vector and compare in
    /// the clear.
    pub(crate) fn match_features(
        &mut self,
        q: &EncodedVector,
        cutoff: &BigUint,
        items: &[(u32, EncryptedFeatures)],
    ) -> Result<Vec<u32>, ProtocolError> {
        self.expect_indices(items.iter().map(|(i, _)| i))?;
        let n = self.keys.public.n().clone();
        let mut matched = Vec::new();
        for (index, features) in items {
            let f = match (self.scheme, features) {
                (Scheme::Scheme1, EncryptedFeatures::Paillier(cts)) => {
                    let residues = cts.iter().map(|c| self.pk_decrypt(c)).collect::<Result<_, _>>()?;
                    EncodedVector::new(residues, self.scale, n.clone())?
                }
                (Scheme::Revised, EncryptedFeatures::Symmetric(env)) => {
                    decode_feature_payload(&self.open(env)?)?
                }
                _ => return Err(ProtocolError::Malformed("feature encryption does not fit the scheme")),
            };
            if encoded_sq_distance(&f, q)? <= *cutoff {
                matched.push(*index);
            }
        }
        Ok(matched)
    }

    /// Scheme 2: decrypt one distance per image, then pad.
    pub(crate) fn match_distances(
        &mut self,
        cutoff: &BigUint,
        items: &[(u32, Ciphertext)],
        pad_count: usize,
    ) -> Result<MatchSets, ProtocolError> {
        self.expect_indices(items.iter().map(|(i, _)| i))?;
        let n = self.keys.public.n().clone();
        let mut matched = Vec::new();
        for (index, h) in items {
            if residue_within(&self.pk_decrypt(h)?, &n, cutoff) {
                matched.push(*index);
            }
        }
        let (count, _) = self.store.ok_or(ProtocolError::NotUploaded)?;
        pad_index_set(&matched, count, pad_count, &mut *self.rng)
    }

    /// Decrypts the images for `I` and drops the decoys unopened.
    pub(crate) fn open_images(
        &mut self,
        sets: &MatchSets,
        images: &[(u32, Envelope)],
    ) -> Result<Vec<(u32, Vec<u8>)>, ProtocolError> {
        if images.len() != sets.padded.len()
            || images.iter().zip(&sets.padded).any(|((got, _), want)| got != want)
        {
            return Err(ProtocolError::Malformed("images do not match the requested set"));
        }
        images
            .iter()
            .filter(|(i, _)| sets.matched.binary_search(i).is_ok())
            .map(|(i, env)| Ok((*i, self.open(env)?)))
            .collect()
    }
}
