use imgseek_core::paillier::{decrypt, encrypt, keypair_from_primes, Plaintext};
use imgseek_core::protocol::wire::{EncryptedFeatures, StoredRecord};
use imgseek_core::protocol::{compute_encrypted_distance, Direction, MessageKind};
use imgseek_core::{
    sym_encrypt, ClientKeys, EncodedVector, EncodingError, FeatureVector, ProtocolError,
    RoleCounters, Scheme, Session, SessionOptions, SymKey, TickClock,
};
use num_bigint::BigUint;
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

fn keys(seed: u64, bits: u64) -> ClientKeys {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    ClientKeys::generate(bits, &mut rng).unwrap()
}

fn session(scheme: Scheme, seed: u64) -> Session {
    Session::new(
        scheme,
        keys(seed, 256),
        SessionOptions::default(),
        ChaCha20Rng::seed_from_u64(seed + 1),
        ChaCha20Rng::seed_from_u64(seed + 2),
        TickClock::new(),
    )
}

fn fv(v: &[f64]) -> FeatureVector {
    FeatureVector::new(v.to_vec()).unwrap()
}

fn three_images() -> (Vec<FeatureVector>, Vec<Vec<u8>>) {
    let features = vec![fv(&[0.0, 0.0]), fv(&[3.0, 4.0]), fv(&[10.0, 10.0])];
    let images = (1..=3).map(|i| format!("image-{i}").into_bytes()).collect();
    (features, images)
}

fn uploaded(scheme: Scheme, seed: u64) -> Session {
    let mut s = session(scheme, seed);
    let (f, i) = three_images();
    s.upload(&f, &i).unwrap();
    s
}

#[test]
fn three_image_fixture_matches_in_every_scheme() {
    for scheme in Scheme::ALL {
        let mut s = uploaded(scheme, 7);
        let out = s.query(&fv(&[0.0, 0.0]), 5.0, 0).unwrap();
        assert_eq!(out.sets.matched, vec![1, 2], "{scheme}");
        assert_eq!(
            out.images,
            vec![(1, b"image-1".to_vec()), (2, b"image-2".to_vec())]
        );
        let out = s.query(&fv(&[0.0, 0.0]), 0.0, 0).unwrap();
        assert_eq!(out.sets.matched, vec![1], "{scheme}");
        let out = s.query(&fv(&[0.0, 0.0]), 4.99, 0).unwrap();
        assert_eq!(out.sets.matched, vec![1], "{scheme}");
    }
}

#[test]
fn upload_costs() {
    let (n, t) = (3u64, 2u64);
    let c = |s: &Session| s.ledger().client;
    let s1 = uploaded(Scheme::Scheme1, 8);
    assert_eq!(c(&s1).pk_encrypts, t * n);
    assert_eq!(c(&s1).sym_encrypts, n);
    let s2 = uploaded(Scheme::Scheme2, 8);
    assert_eq!(c(&s2).pk_encrypts, t * n + n);
    assert_eq!(c(&s2).sym_encrypts, n);
    let r = uploaded(Scheme::Revised, 8);
    assert_eq!(c(&r).pk_encrypts, 0);
    assert_eq!(c(&r).sym_encrypts, 2 * n);
}

#[test]
fn query_costs() {
    let (n, t, matched) = (3u64, 2u64, 2u64);
    let q = fv(&[0.0, 0.0]);

    let out = uploaded(Scheme::Scheme1, 9).query(&q, 5.0, 0).unwrap();
    assert_eq!((out.ledger.client.pk_decrypts, out.ledger.client.sym_decrypts), (t * n, matched));
    assert_eq!(out.ledger.server.hom_total(), 0);

    let out = uploaded(Scheme::Scheme2, 9).query(&q, 5.0, 1).unwrap();
    assert_eq!((out.ledger.client.pk_decrypts, out.ledger.client.sym_decrypts), (n, matched));
    let server = out.ledger.server;
    assert_eq!(server.hom_exps, n * t);
    assert_eq!(server.hom_mults, 2 * n);
    assert_eq!(server.hom_inversions, n);
    assert_eq!(server.hom_mult_equivalents(), n * (t + 2));
    assert_eq!(server.pk_encrypts, 1);

    let out = uploaded(Scheme::Revised, 9).query(&q, 5.0, 0).unwrap();
    assert_eq!((out.ledger.client.pk_decrypts, out.ledger.client.sym_decrypts), (0, n + matched));
    assert_eq!(out.ledger.client.pk_encrypts, 0);
}

#[test]
fn scheme2_padding_hides_matches_but_opens_only_them() {
    let mut s = uploaded(Scheme::Scheme2, 10);
    let out = s.scheme2_query(&fv(&[0.0, 0.0]), 0.0, 3).unwrap();
    assert_eq!(out.sets.matched, vec![1]);
    assert_eq!(out.sets.padded, vec![1, 2, 3]);
    assert_eq!(out.images, vec![(1, b"image-1".to_vec())]);
    assert_eq!(out.ledger.client.sym_decrypts, 1);
    let index_set = s
        .transcript()
        .entries()
        .iter()
        .rev()
        .find(|e| e.kind == MessageKind::IndexSet)
        .unwrap();
    assert_eq!(index_set.size, 4 + 3 * 4);
}

#[test]
fn scheme2_distance_for_toy_key() {
    // n = 35, t = 1, S = 1, f = 3, q = 1: ||f - q||^2 = 4
    let (pk, sk) = keypair_from_primes(BigUint::from(5u8), BigUint::from(7u8)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let key = SymKey::generate(&mut rng);
    let e = |m: u64, rng: &mut ChaCha20Rng| encrypt(&pk, &Plaintext::from(m), rng).unwrap();
    let record = StoredRecord {
        index: 1,
        chi: Some(e(9, &mut rng)),
        features: EncryptedFeatures::Paillier(vec![e(3, &mut rng)]),
        image: sym_encrypt(&key, b"x", &mut rng),
    };
    let mut counters = RoleCounters::default();
    for (q, want) in [(1u64, 4u64), (34, 16), (0, 9), (3, 0)] {
        let q = EncodedVector::new(vec![BigUint::from(q)], 1, pk.n().clone()).unwrap();
        let q_sq = e(q.sq_norm_residue().try_into().unwrap(), &mut rng);
        let h = compute_encrypted_distance(&pk, &record, &q, &q_sq, &mut counters).unwrap();
        assert_eq!(decrypt(&pk, &sk, &h).unwrap(), Plaintext::from(want));
    }
    assert_eq!(counters.hom_exps, 4);
    assert_eq!(counters.hom_mults, 8);
    assert_eq!(counters.hom_inversions, 4);
}

#[test]
fn transcripts_follow_the_flow_and_account_for_bytes() {
    for scheme in Scheme::ALL {
        let mut s = uploaded(scheme, 12);
        s.query(&fv(&[1.0, 1.0]), 5.0, 1).unwrap();
        s.query(&fv(&[9.0, 9.0]), 2.0, 2).unwrap();
        let tr = s.transcript();
        assert_eq!(tr.len(), 9);
        tr.verify_flow(scheme).unwrap();
        let other = match scheme {
            Scheme::Scheme2 => Scheme::Scheme1,
            _ => Scheme::Scheme2,
        };
        assert!(matches!(tr.verify_flow(other), Err(ProtocolError::FlowMismatch { position: 1 })));

        let sent: u64 = tr
            .entries()
            .iter()
            .filter(|e| e.direction == Direction::ClientToServer)
            .map(|e| e.size + 5)
            .sum();
        let ledger = s.ledger();
        assert_eq!(ledger.client.bytes_sent, sent);
        assert_eq!(ledger.client.bytes_sent, ledger.server.bytes_received);
        assert_eq!(ledger.server.bytes_sent, ledger.client.bytes_received);
        assert!(tr.entries().windows(2).all(|w| w[0].timestamp_ns < w[1].timestamp_ns));
        assert_eq!(tr.to_json_lines().lines().count(), 9);
    }
}

#[test]
fn sessions_are_deterministic_under_fixed_seeds() {
    for scheme in Scheme::ALL {
        let run = || {
            let mut s = uploaded(scheme, 13);
            let out = s.query(&fv(&[3.0, 3.0]), 4.0, 2).unwrap();
            (s.stored_records().to_vec(), s.transcript().clone(), out)
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn lifecycle_errors() {
    let mut s = session(Scheme::Scheme1, 14);
    assert_eq!(s.query(&fv(&[0.0, 0.0]), 1.0, 0).unwrap_err(), ProtocolError::NotUploaded);
    let (f, i) = three_images();
    assert!(matches!(
        s.upload(&f, &i[..2]),
        Err(ProtocolError::LengthMismatch { features: 3, images: 2 })
    ));
    s.upload(&f, &i).unwrap();
    assert_eq!(s.upload(&f, &i).unwrap_err(), ProtocolError::AlreadyUploaded);
    assert!(matches!(
        s.scheme2_query(&fv(&[0.0, 0.0]), 1.0, 0),
        Err(ProtocolError::WrongScheme { .. })
    ));
    assert!(matches!(
        s.query(&fv(&[0.0]), 1.0, 0),
        Err(ProtocolError::Query(EncodingError::DimensionMismatch { expected: 2, found: 1 }))
    ));
    assert!(matches!(s.query(&fv(&[0.0, 0.0]), -1.0, 0), Err(ProtocolError::Query(_))));

    let mut s2 = uploaded(Scheme::Scheme2, 14);
    assert_eq!(
        s2.query(&fv(&[0.0, 0.0]), 1.0, 4).unwrap_err(),
        ProtocolError::PadCount { pad_count: 4, n: 3 }
    );

    let mut mixed = session(Scheme::Revised, 14);
    assert!(matches!(
        mixed.upload(&[fv(&[1.0, 2.0]), fv(&[1.0])], &[vec![], vec![]]),
        Err(ProtocolError::Record { index: 2, .. })
    ));
}

#[test]
fn empty_store_yields_empty_results() {
    for scheme in Scheme::ALL {
        let mut s = session(scheme, 15);
        s.upload(&[], &[]).unwrap();
        let out = s.query(&fv(&[1.0, 2.0, 3.0]), 10.0, 0).unwrap();
        assert!(out.sets.matched.is_empty() && out.sets.padded.is_empty() && out.images.is_empty());
        assert_eq!(out.ledger.client.pk_decrypts, 0);
    }
}

#[test]
fn unbounded_vectors_wrap_in_scheme2() {
    // n = 1009 * 1013 = 1022117; (1011 - 0)^2 = n + 4
    let (public, secret) = keypair_from_primes(BigUint::from(1009u32), BigUint::from(1013u32)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let make = |scheme, enforce, rng: &mut ChaCha20Rng| {
        let keys = ClientKeys::new(public.clone(), secret.clone(), SymKey::generate(rng));
        let options = SessionOptions {
            scale: 1,
            enforce_distance_bound: enforce,
        };
        Session::new(
            scheme,
            keys,
            options,
            ChaCha20Rng::seed_from_u64(1),
            ChaCha20Rng::seed_from_u64(2),
            TickClock::new(),
        )
    };
    let features = [fv(&[1011.0])];
    let images = [b"far".to_vec()];

    let mut guarded = make(Scheme::Scheme2, true, &mut rng);
    assert!(matches!(
        guarded.upload(&features, &images),
        Err(ProtocolError::Record {
            index: 1,
            source: EncodingError::UnsafeMagnitude { index: 0 }
        })
    ));

    let mut s2 = make(Scheme::Scheme2, false, &mut rng);
    s2.upload(&features, &images).unwrap();
    assert_eq!(s2.query(&fv(&[0.0]), 2.0, 0).unwrap().sets.matched, vec![1]);

    let mut s1 = make(Scheme::Scheme1, false, &mut rng);
    s1.upload(&features, &images).unwrap();
    assert!(s1.query(&fv(&[0.0]), 2.0, 0).unwrap().sets.matched.is_empty());
}

