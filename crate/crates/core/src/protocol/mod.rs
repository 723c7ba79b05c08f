//! Client/server search protocols with cost accounting.
//!
//! A [`Session`] pairs one client and one server for a single [`Scheme`].
//! Every message is serialized with the [`wire`] framing, logged in the
//! [`SessionTranscript`] and counted in the [`CostLedger`] before the
//! receiving side parses it back.
//!
//! Match sets use 1-based image indices. The match rule is the same in all
//! schemes: an image matches when its encoded squared distance to the query
//! is at most `floor((threshold * S)^2)`.

mod client;
mod ledger;
mod padding;
mod server;
mod session;
pub mod transcript;
pub mod wire;

use core::fmt;
use core::str::FromStr;

use alloc::vec::Vec;

use thiserror::Error;

use crate::codec::CodecError;
use crate::encoding::EncodingError;
use crate::envelope::EnvelopeError;
use crate::paillier::PaillierError;

pub use client::ClientKeys;
pub use ledger::{CostLedger, RoleCounters};
pub use padding::pad_index_set;
pub use server::compute_encrypted_distance;
pub use session::{Session, SessionOptions};
pub use transcript::{Clock, Direction, MessageKind, SessionTranscript, TickClock, TranscriptEntry};
pub use wire::{EncryptedFeatures, Message, StoredRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    /// Server returns all Paillier-encrypted features; client decrypts `tN`.
    #[cfg_attr(feature = "serde", serde(rename = "1"))]
    Scheme1,
    /// Server evaluates encrypted distances; client decrypts `N`.
    #[cfg_attr(feature = "serde", serde(rename = "2"))]
    Scheme2,
    /// Features under symmetric encryption; client decrypts `N + |I|`
    /// envelopes and no Paillier ciphertexts.
    #[cfg_attr(feature = "serde", serde(rename = "revised"))]
    Revised,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Scheme1, Scheme::Scheme2, Scheme::Revised];

    pub fn id(&self) -> &'static str {
        match self {
            Scheme::Scheme1 => "1",
            Scheme::Scheme2 => "2",
            Scheme::Revised => "revised",
        }
    }

    pub fn uses_paillier_features(&self) -> bool {
        !matches!(self, Scheme::Revised)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(Scheme::Scheme1),
            "2" => Ok(Scheme::Scheme2),
            "revised" => Ok(Scheme::Revised),
            _ => Err(ProtocolError::UnknownScheme),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Client,
    Server,
}

/// `I` (matched), `Î` (decoys) and `I' = I ∪ Î` (padded), each sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchSets {
    pub matched: Vec<u32>,
    pub decoys: Vec<u32>,
    pub padded: Vec<u32>,
}

impl MatchSets {
    /// Sets for schemes that send `I` unpadded.
    pub fn unpadded(mut matched: Vec<u32>) -> Self {
        matched.sort_unstable();
        matched.dedup();
        Self {
            padded: matched.clone(),
            matched,
            decoys: Vec::new(),
        }
    }
}

/// Result of one query round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub sets: MatchSets,
    /// Decrypted images for `I`, in index order.
    pub images: Vec<(u32, Vec<u8>)>,
    /// Counters accumulated during this query only.
    pub ledger: CostLedger,
    pub client_ns: u64,
    pub server_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Paillier(#[from] PaillierError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error("wire format: {0}")]
    Codec(#[from] CodecError),
    #[error("feature vector {index}: {source}")]
    Record { index: u32, source: EncodingError },
    #[error("query vector: {0}")]
    Query(EncodingError),
    #[error("malformed message: {0}")]
    Malformed(&'static str),
    #[error("{kind:?} is not valid in scheme {scheme} at this point")]
    UnexpectedMessage { scheme: Scheme, kind: MessageKind },
    #[error("pad count {pad_count} exceeds the {n} stored images")]
    PadCount { pad_count: usize, n: u32 },
    #[error("image index {0} is out of range")]
    IndexOutOfRange(u32),
    #[error("{features} feature vectors but {images} images")]
    LengthMismatch { features: usize, images: usize },
    #[error("nothing has been uploaded")]
    NotUploaded,
    #[error("the store has already been populated")]
    AlreadyUploaded,
    #[error("transcript diverges from the protocol at message {position}")]
    FlowMismatch { position: usize },
    #[error("session runs scheme {session}, not {requested}")]
    WrongScheme { session: Scheme, requested: Scheme },
    #[error("unknown scheme (expected 1, 2 or revised)")]
    UnknownScheme,
}
