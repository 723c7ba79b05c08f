//! Confidentiality-preserving image search over Paillier-encrypted features.
//!
//! The crate carries three search protocols that share one client/server
//! model:
//!
//! * [`Scheme::Scheme1`]: the server returns every Paillier-encrypted feature
//!   vector and the client decrypts all of them.
//! * [`Scheme::Scheme2`]: the server evaluates an encrypted squared distance
//!   per image with the additive homomorphism and the client decrypts one
//!   ciphertext per image.
//! * [`Scheme::Revised`]: features are stored under symmetric encryption;
//!   the client decrypts them and compares in the clear.
//!
//! Every run is metered by a [`CostLedger`] and recorded in a
//! [`SessionTranscript`], so the client-side cost of each scheme can be
//! compared operation by operation.
//!
//! The crate is `no_std` and only needs `alloc`. IO, timing and the command
//! line live in the companion `imgseek` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod codec;
pub mod encoding;
pub mod envelope;
pub mod paillier;
pub mod protocol;

pub use encoding::{
    decode_centered, encode_vector, max_safe_magnitude, plain_sq_distance, DistanceBound,
    EncodedVector, EncodingError, FeatureVector,
};
pub use envelope::{
    decode_feature_payload, encode_feature_payload, sym_decrypt, sym_encrypt, Envelope,
    EnvelopeError, SymKey,
};
pub use paillier::{
    decrypt, encrypt, hom_add, hom_scale, keygen, Ciphertext, PaillierError, Plaintext, PublicKey,
    SecretKey,
};
pub use protocol::{
    pad_index_set, ClientKeys, Clock, CostLedger, MatchSets, ProtocolError, QueryOutcome, Role,
    RoleCounters, Scheme, Session, SessionOptions, SessionTranscript, TickClock,
};
