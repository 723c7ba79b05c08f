//! Ordered message log of a session and the clocks that timestamp it.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{ProtocolError, Scheme};

/// Monotonic time source in nanoseconds.
pub trait Clock {
    fn now_ns(&mut self) -> u64;
}

/// Logical clock advancing by one per reading. Deterministic.
#[derive(Debug, Clone, Default)]
pub struct TickClock(u64);

impl TickClock {
    pub fn new() -> Self {
        Self(0)
    }
}

impl Clock for TickClock {
    fn now_ns(&mut self) -> u64 {
        self.0 += 1;
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::ClientToServer => "client_to_server",
            Direction::ServerToClient => "server_to_client",
        }
    }
}

/// Message kinds with their one-byte wire tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
#[repr(u8)]
pub enum MessageKind {
    UploadRecords = 1,
    FeatureRequest = 2,
    EncryptedFeatures = 3,
    PlainQuery = 4,
    EncryptedDistances = 5,
    IndexSet = 6,
    Images = 7,
}

impl MessageKind {
    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => Self::UploadRecords,
            2 => Self::FeatureRequest,
            3 => Self::EncryptedFeatures,
            4 => Self::PlainQuery,
            5 => Self::EncryptedDistances,
            6 => Self::IndexSet,
            7 => Self::Images,
            _ => return None,
        })
    }

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UploadRecords => "upload_records",
            Self::FeatureRequest => "feature_request",
            Self::EncryptedFeatures => "encrypted_features",
            Self::PlainQuery => "plain_query",
            Self::EncryptedDistances => "encrypted_distances",
            Self::IndexSet => "index_set",
            Self::Images => "images",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub kind: MessageKind,
    /// Payload bytes, excluding the 5-byte frame header.
    pub size: u64,
    pub timestamp_ns: u64,
}

type Step = (Direction, MessageKind);

const UPLOAD: Step = (Direction::ClientToServer, MessageKind::UploadRecords);

const SCHEME1_QUERY: [Step; 4] = [
    (Direction::ClientToServer, MessageKind::FeatureRequest),
    (Direction::ServerToClient, MessageKind::EncryptedFeatures),
    (Direction::ClientToServer, MessageKind::IndexSet),
    (Direction::ServerToClient, MessageKind::Images),
];

const SCHEME2_QUERY: [Step; 4] = [
    (Direction::ClientToServer, MessageKind::PlainQuery),
    (Direction::ServerToClient, MessageKind::EncryptedDistances),
    (Direction::ClientToServer, MessageKind::IndexSet),
    (Direction::ServerToClient, MessageKind::Images),
];

/// Message sequence of one query round. Scheme 1 and the revised scheme
/// share a shape; only the feature encryption differs.
pub fn query_flow(scheme: Scheme) -> &'static [Step] {
    match scheme {
        Scheme::Scheme1 | Scheme::Revised => &SCHEME1_QUERY,
        Scheme::Scheme2 => &SCHEME2_QUERY,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionTranscript {
    entries: Vec<TranscriptEntry>,
}

impl SessionTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, entry: TranscriptEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The transcript without timestamps, for determinism comparisons.
    pub fn shape(&self) -> Vec<(Direction, MessageKind, u64)> {
        self.entries.iter().map(|e| (e.direction, e.kind, e.size)).collect()
    }

    /// Checks the log against one upload followed by whole query rounds of
    /// `scheme`.
    pub fn verify_flow(&self, scheme: Scheme) -> Result<(), ProtocolError> {
        verify_steps(self.entries.iter().map(|e| (e.direction, e.kind)), scheme)
    }

    /// One JSON object per line: `direction`, `kind`, `size`, `timestamp_ns`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                r#"{{"direction":"{}","kind":"{}","size":{},"timestamp_ns":{}}}"#,
                e.direction.as_str(),
                e.kind.as_str(),
                e.size,
                e.timestamp_ns
            );
        }
        out
    }
}

pub fn verify_steps<I>(steps: I, scheme: Scheme) -> Result<(), ProtocolError>
where
    I: IntoIterator<Item = Step>,
{
    let round = query_flow(scheme);
    let mut count = 0;
    for (position, step) in steps.into_iter().enumerate() {
        let expected = if position == 0 {
            UPLOAD
        } else {
            round[(position - 1) % round.len()]
        };
        if step != expected {
            return Err(ProtocolError::FlowMismatch { position });
        }
        count = position + 1;
    }
    if count == 0 || (count - 1) % round.len() != 0 {
        return Err(ProtocolError::FlowMismatch { position: count });
    }
    Ok(())
}
