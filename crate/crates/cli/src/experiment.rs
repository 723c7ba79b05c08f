use std::str::FromStr;
use std::time::Instant;

use imgseek_core::protocol::SessionTranscript;
use imgseek_core::{
    max_safe_magnitude, ClientKeys, Clock, CostLedger, FeatureVector, QueryOutcome, Role, Scheme,
    Session, SessionOptions,
};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::fixture::{derive_query, generate_fixture, pseudo_images, Fixture};
use crate::report::ReportRow;
use crate::HarnessError;

pub const MAX_KEY_BITS: u64 = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSelection {
    One(Scheme),
    All,
}

impl SchemeSelection {
    pub fn schemes(&self) -> Vec<Scheme> {
        match self {
            SchemeSelection::One(s) => vec![*s],
            SchemeSelection::All => Scheme::ALL.to_vec(),
        }
    }
}

impl FromStr for SchemeSelection {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(SchemeSelection::All);
        }
        s.parse()
            .map(SchemeSelection::One)
            .map_err(|_| HarnessError::Config(format!("unknown scheme {s:?} (expected 1, 2, revised or all)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: SchemeSelection,
    pub num_images: usize,
    pub dim: usize,
    pub key_bits: u64,
    pub scale: u64,
    pub threshold: f64,
    /// Decoy count for Scheme 2; `None` means `ceil(N / 10)`.
    pub pad_count: Option<usize>,
    pub image_bytes: usize,
    pub seed: u64,
    pub repeats: usize,
    /// Derive the key pair from `seed` instead of the OS generator.
    pub test_key: bool,
    /// Generated components are uniform in `[-value_range, value_range]`.
    pub value_range: f64,
    /// Largest per-component offset of the query from its source image.
    pub query_noise: f64,
    /// Replaces the generated feature vectors.
    pub features: Option<Vec<FeatureVector>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schemes: SchemeSelection::All,
            num_images: 100,
            dim: 128,
            key_bits: 2048,
            scale: 10_000,
            threshold: 0.5,
            pad_count: None,
            image_bytes: 4096,
            seed: 1,
            repeats: 1,
            test_key: false,
            value_range: 1.0,
            query_noise: 0.01,
            features: None,
        }
    }
}

impl ExperimentConfig {
    fn image_count(&self) -> usize {
        self.features.as_ref().map_or(self.num_images, Vec::len)
    }

    fn feature_dim(&self) -> usize {
        match &self.features {
            Some(f) => f.first().map_or(self.dim, FeatureVector::dim),
            None => self.dim,
        }
    }

    pub fn effective_pad_count(&self) -> usize {
        self.pad_count.unwrap_or_else(|| self.image_count().div_ceil(10))
    }

    /// Largest admissible component magnitude for any key of
    /// `key_bits` bits, less one quantization step for rounding.
    pub fn magnitude_limit(&self) -> Result<f64, HarnessError> {
        if !(16..=MAX_KEY_BITS).contains(&self.key_bits) {
            return Err(HarnessError::Config(format!("unsupported key size {}", self.key_bits)));
        }
        let n_min = BigUint::from(1u8) << (self.key_bits - 1);
        Ok(max_safe_magnitude(&n_min, self.feature_dim(), self.scale)? - 1.0 / self.scale as f64)
    }

    /// Every check that can run before key generation.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let config = |msg: String| Err(HarnessError::Config(msg));
        if !(16..=MAX_KEY_BITS).contains(&self.key_bits) {
            return config(format!("key size {} is outside 16..={MAX_KEY_BITS} bits", self.key_bits));
        }
        if self.scale == 0 {
            return config("scale must be positive".into());
        }
        if self.feature_dim() == 0 {
            return config("feature dimension must be positive".into());
        }
        if self.repeats == 0 {
            return config("repeats must be positive".into());
        }
        if u32::try_from(self.image_count()).is_err() {
            return config(format!("{} images is too many", self.image_count()));
        }
        if !self.threshold.is_finite() || self.threshold < 0.0 {
            return config(format!("invalid threshold {}", self.threshold));
        }
        if !self.query_noise.is_finite() || self.query_noise < 0.0 {
            return config(format!("invalid query noise {}", self.query_noise));
        }
        if self.effective_pad_count() > self.image_count() {
            return config(format!(
                "pad count {} exceeds the {} images",
                self.effective_pad_count(),
                self.image_count()
            ));
        }
        let limit = self.magnitude_limit()?;
        if let Some(features) = &self.features {
            if features.iter().any(|f| f.dim() != self.feature_dim()) {
                return config("feature vectors have differing dimensions".into());
            }
            let max = features.iter().map(FeatureVector::max_magnitude).fold(0.0, f64::max);
            if max >= limit {
                return config(format!("feature magnitude {max} is not below the safe magnitude {limit:e}"));
            }
        } else if !(self.value_range >= 0.0 && self.value_range < limit) {
            return config(format!(
                "value range {} is not below the safe magnitude {limit:e}",
                self.value_range
            ));
        }
        Ok(())
    }

    pub fn fixture(&self) -> Result<Fixture, HarnessError> {
        match &self.features {
            Some(features) => Ok(Fixture {
                features: features.clone(),
                images: pseudo_images(self.seed, features.len(), self.image_bytes),
            }),
            None => generate_fixture(
                self.seed,
                self.num_images,
                self.dim,
                self.value_range,
                self.image_bytes,
                self.magnitude_limit()?,
            ),
        }
    }

    pub fn query(&self, fixture: &Fixture) -> Result<FeatureVector, HarnessError> {
        let clamp = match &self.features {
            Some(f) => f.iter().map(FeatureVector::max_magnitude).fold(0.0, f64::max),
            None => self.value_range,
        };
        match derive_query(fixture, self.seed, self.query_noise, clamp) {
            Some((q, _)) => Ok(q),
            None => FeatureVector::new(vec![0.0; self.feature_dim()]).map_err(|e| HarnessError::Config(e.to_string())),
        }
    }

    pub fn keys(&self) -> Result<ClientKeys, HarnessError> {
        Ok(if self.test_key {
            let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ 0x6b65_7973);
            ClientKeys::generate(self.key_bits, &mut rng)?
        } else {
            ClientKeys::generate(self.key_bits, &mut rand::rngs::OsRng)?
        })
    }
}

/// Wall clock for sessions.
pub struct MonotonicClock(Instant);

impl MonotonicClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_ns(&mut self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}

/// Everything measured for one scheme.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub row: ReportRow,
    pub upload_ledger: CostLedger,
    pub upload_client_ns: u64,
    /// Outcome of the last repetition.
    pub outcome: QueryOutcome,
    pub client_ns: Vec<u64>,
    pub server_ns: Vec<u64>,
    pub transcript: SessionTranscript,
}

pub fn median(values: &[u64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0,
    }
}

fn scheme_seed(seed: u64, scheme: Scheme, role: Role) -> u64 {
    let s = match scheme {
        Scheme::Scheme1 => 1,
        Scheme::Scheme2 => 2,
        Scheme::Revised => 3,
    };
    let r = match role {
        Role::Client => 0,
        Role::Server => 1,
    };
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(s * 2 + r)
}

/// Uploads the fixture and runs `repeats` queries for every selected
/// scheme, all under one key pair.
pub fn run_with_keys(
    cfg: &ExperimentConfig,
    keys: &ClientKeys,
    fixture: &Fixture,
    q: &FeatureVector,
) -> Result<Vec<SchemeRun>, HarnessError> {
    let options = SessionOptions {
        scale: cfg.scale,
        enforce_distance_bound: true,
    };
    let pad = cfg.effective_pad_count();
    let mut runs = Vec::new();
    for scheme in cfg.schemes.schemes() {
        let mut session = Session::new(
            scheme,
            keys.clone(),
            options,
            ChaCha20Rng::seed_from_u64(scheme_seed(cfg.seed, scheme, Role::Client)),
            ChaCha20Rng::seed_from_u64(scheme_seed(cfg.seed, scheme, Role::Server)),
            MonotonicClock::new(),
        );
        session.upload(&fixture.features, &fixture.images)?;
        let upload_ledger = session.ledger();
        let upload_client_ns = session.busy_ns(Role::Client);
        let mut client_ns = Vec::with_capacity(cfg.repeats);
        let mut server_ns = Vec::with_capacity(cfg.repeats);
        let mut last = None;
        for _ in 0..cfg.repeats {
            let out = session.query(q, cfg.threshold, pad)?;
            client_ns.push(out.client_ns);
            server_ns.push(out.server_ns);
            last = Some(out);
        }
        let outcome = last.expect("repeats is positive");
        let c = outcome.ledger.client;
        let row = ReportRow {
            scheme: scheme.id().to_string(),
            pk_dec: c.pk_decrypts,
            sym_dec: c.sym_decrypts,
            client_ms: median(&client_ns) / 1e6,
            server_ms: median(&server_ns) / 1e6,
            bytes_up: c.bytes_sent,
            bytes_down: c.bytes_received,
            matched: outcome.sets.matched.len(),
            padded: outcome.sets.padded.len(),
        };
        runs.push(SchemeRun {
            scheme,
            row,
            upload_ledger,
            upload_client_ns,
            outcome,
            client_ns,
            server_ns,
            transcript: session.transcript().clone(),
        });
    }
    Ok(runs)
}

pub fn run_experiment_detailed(cfg: &ExperimentConfig) -> Result<Vec<SchemeRun>, HarnessError> {
    cfg.validate()?;
    let fixture = cfg.fixture()?;
    let q = cfg.query(&fixture)?;
    let keys = cfg.keys()?;
    run_with_keys(cfg, &keys, &fixture, &q)
}

/// One row per selected scheme, in the order 1, 2, revised.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>, HarnessError> {
    Ok(run_experiment_detailed(cfg)?.into_iter().map(|r| r.row).collect())
}
