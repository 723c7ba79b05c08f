use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_core::CryptoRngCore;

use super::client::{Client, ClientKeys};
use super::server::Server;
use super::transcript::{Clock, Direction, SessionTranscript, TranscriptEntry};
use super::wire::{self, Message, StoredRecord, FRAME_HEADER_LEN};
use super::{CostLedger, MatchSets, ProtocolError, QueryOutcome, Role, Scheme};
use crate::encoding::{scaled_threshold, FeatureVector, DEFAULT_SCALE};
use crate::paillier::PublicKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOptions {
    /// Fixed-point scale `S`.
    pub scale: u64,
    /// Reject feature and query vectors whose squared distances could wrap
    /// modulo `n`. Turning this off exists to demonstrate the wrap.
    pub enforce_distance_bound: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            scale: DEFAULT_SCALE,
            enforce_distance_bound: true,
        }
    }
}

/// One client and one server running a single scheme in-process.
///
/// All traffic passes through the wire encoding, so byte counts and the
/// transcript reflect what a network deployment would send.
pub struct Session {
    scheme: Scheme,
    client: Client,
    server: Server,
    clock: Box<dyn Clock + Send>,
    transcript: SessionTranscript,
    client_ns: u64,
    server_ns: u64,
}

impl Session {
    pub fn new<C, S, K>(
        scheme: Scheme,
        keys: ClientKeys,
        options: SessionOptions,
        client_rng: C,
        server_rng: S,
        clock: K,
    ) -> Self
    where
        C: CryptoRngCore + Send + 'static,
        S: CryptoRngCore + Send + 'static,
        K: Clock + Send + 'static,
    {
        let pk = keys.public.clone();
        Self {
            scheme,
            client: Client::new(
                scheme,
                keys,
                options.scale,
                options.enforce_distance_bound,
                Box::new(client_rng),
            ),
            server: Server::new(scheme, pk, Box::new(server_rng)),
            clock: Box::new(clock),
            transcript: SessionTranscript::new(),
            client_ns: 0,
            server_ns: 0,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn public_key(&self) -> &PublicKey {
        self.client.public_key()
    }

    pub fn scale(&self) -> u64 {
        self.client.scale()
    }

    pub fn ledger(&self) -> CostLedger {
        CostLedger {
            client: self.client.counters,
            server: self.server.counters,
        }
    }

    pub fn transcript(&self) -> &SessionTranscript {
        &self.transcript
    }

    /// Time charged to `role` so far, as measured by the session clock.
    pub fn busy_ns(&self, role: Role) -> u64 {
        match role {
            Role::Client => self.client_ns,
            Role::Server => self.server_ns,
        }
    }

    /// What the server holds.
    pub fn stored_records(&self) -> &[StoredRecord] {
        self.server.records()
    }

    fn timed<T>(&mut self, role: Role, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = self.clock.now_ns();
        let out = f(self);
        let elapsed = self.clock.now_ns().saturating_sub(start);
        match role {
            Role::Client => self.client_ns += elapsed,
            Role::Server => self.server_ns += elapsed,
        }
        out
    }

    /// Serializes, logs and parses one message. Each side is charged for
    /// its half of the codec work.
    fn transmit(&mut self, direction: Direction, msg: &Message) -> Result<Message, ProtocolError> {
        let (from, to) = match direction {
            Direction::ClientToServer => (Role::Client, Role::Server),
            Direction::ServerToClient => (Role::Server, Role::Client),
        };
        let frame = self.timed(from, |_| wire::encode(msg));
        let timestamp_ns = self.clock.now_ns();
        self.transcript.push(TranscriptEntry {
            direction,
            kind: msg.kind(),
            size: (frame.len() - FRAME_HEADER_LEN) as u64,
            timestamp_ns,
        });
        let bytes = frame.len() as u64;
        match from {
            Role::Client => {
                self.client.counters.bytes_sent += bytes;
                self.server.counters.bytes_received += bytes;
            }
            Role::Server => {
                self.server.counters.bytes_sent += bytes;
                self.client.counters.bytes_received += bytes;
            }
        }
        let pk = self.client.public_key().clone();
        self.timed(to, |_| wire::decode(&frame, &pk))
    }

    /// Client request, server processing, server reply.
    fn round_trip(&mut self, request: Message) -> Result<Message, ProtocolError> {
        let received = self.transmit(Direction::ClientToServer, &request)?;
        let reply = self
            .timed(Role::Server, |s| s.server.handle(received))?
            .ok_or(ProtocolError::Malformed("server sent no reply"))?;
        self.transmit(Direction::ServerToClient, &reply)
    }

    /// Encrypts and uploads the collection. Image `i` (1-based) pairs
    /// `features[i - 1]` with `images[i - 1]`.
    pub fn upload(&mut self, features: &[FeatureVector], images: &[Vec<u8>]) -> Result<(), ProtocolError> {
        let msg = self.timed(Role::Client, |s| s.client.prepare_upload(features, images))?;
        let received = self.transmit(Direction::ClientToServer, &msg)?;
        match self.timed(Role::Server, |s| s.server.handle(received))? {
            None => Ok(()),
            Some(_) => Err(ProtocolError::Malformed("unexpected reply to upload")),
        }
    }

    /// Runs one query with the session's scheme. `pad_count` is used by
    /// Scheme 2 only.
    pub fn query(
        &mut self,
        q: &FeatureVector,
        threshold: f64,
        pad_count: usize,
    ) -> Result<QueryOutcome, ProtocolError> {
        let before = (self.ledger(), self.client_ns, self.server_ns);
        let cutoff = scaled_threshold(threshold, self.scale()).map_err(ProtocolError::Query)?;
        let q_enc = self.timed(Role::Client, |s| s.client.encode_query(q))?;

        let sets = match self.scheme {
            Scheme::Scheme1 | Scheme::Revised => {
                let Message::EncryptedFeatures(items) = self.round_trip(Message::FeatureRequest)? else {
                    return Err(ProtocolError::Malformed("expected encrypted features"));
                };
                let matched =
                    self.timed(Role::Client, |s| s.client.match_features(&q_enc, &cutoff, &items))?;
                MatchSets::unpadded(matched)
            }
            Scheme::Scheme2 => {
                let (n, _) = self.client.store().ok_or(ProtocolError::NotUploaded)?;
                if pad_count > n as usize {
                    return Err(ProtocolError::PadCount { pad_count, n });
                }
                let Message::EncryptedDistances(items) = self.round_trip(Message::PlainQuery(q_enc))? else {
                    return Err(ProtocolError::Malformed("expected encrypted distances"));
                };
                self.timed(Role::Client, |s| s.client.match_distances(&cutoff, &items, pad_count))?
            }
        };

        let Message::Images(envelopes) = self.round_trip(Message::IndexSet(sets.padded.clone()))? else {
            return Err(ProtocolError::Malformed("expected images"));
        };
        let images = self.timed(Role::Client, |s| s.client.open_images(&sets, &envelopes))?;

        Ok(QueryOutcome {
            sets,
            images,
            ledger: self.ledger().since(&before.0),
            client_ns: self.client_ns - before.1,
            server_ns: self.server_ns - before.2,
        })
    }

    pub fn scheme1_query(&mut self, q: &FeatureVector, threshold: f64) -> Result<QueryOutcome, ProtocolError> {
        self.require(Scheme::Scheme1)?;
        self.query(q, threshold, 0)
    }

    pub fn scheme2_query(
        &mut self,
        q: &FeatureVector,
        threshold: f64,
        pad_count: usize,
    ) -> Result<QueryOutcome, ProtocolError> {
        self.require(Scheme::Scheme2)?;
        self.query(q, threshold, pad_count)
    }

    pub fn revised_query(&mut self, q: &FeatureVector, threshold: f64) -> Result<QueryOutcome, ProtocolError> {
        self.require(Scheme::Revised)?;
        self.query(q, threshold, 0)
    }

    fn require(&self, scheme: Scheme) -> Result<(), ProtocolError> {
        if self.scheme == scheme {
            Ok(())
        } else {
            Err(ProtocolError::WrongScheme {
                session: self.scheme,
                requested: scheme,
            })
        }
    }
}
