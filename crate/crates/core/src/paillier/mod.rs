//! Paillier public-key encryption over `Z_n` with ciphertexts in `Z*_{n^2}`.
//!
//! Encryption is `c = g^m * r^n mod n^2` and decryption is
//! `m = L(c^lambda mod n^2) * mu mod n` with `L(u) = (u - 1) / n`,
//! `lambda = lcm(p - 1, q - 1)` and `mu = L(g^lambda mod n^2)^-1 mod n`.
//! The final reduction is modulo `n`; [`decrypt_mod_n_squared`] keeps the
//! incorrect modulo-`n^2` reduction around so tests can show where it breaks.
//!
//! Multiplying ciphertexts adds plaintexts ([`hom_add`]) and raising a
//! ciphertext to `k` multiplies its plaintext by `k` ([`hom_scale`]), both
//! modulo `n`.
//!
//! The default generator is `g = n + 1`. Keys built with
//! [`keygen_with_random_generator`] or [`keypair_from_primes_with_generator`]
//! use an arbitrary `g`, validated by checking that `L(g^lambda mod n^2)` is
//! invertible modulo `n`.

mod prime;

use core::fmt;

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::CryptoRngCore;
use thiserror::Error;

use crate::codec::{self, CodecError, Reader};

pub use prime::{is_prime_fixed_bases, is_probable_prime, random_prime, MILLER_RABIN_ROUNDS};

/// Smallest modulus size accepted by [`keygen`].
pub const MIN_KEY_BITS: u64 = 16;

/// Candidates tried per prime before key generation gives up.
const PRIME_CANDIDATES_PER_BIT: usize = 64;

/// Full `(p, q)` draws before key generation gives up.
const KEYGEN_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaillierError {
    #[error("key size of {0} bits is below the {MIN_KEY_BITS}-bit minimum")]
    KeySizeTooSmall(u64),
    #[error("key generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("invalid key material: {0}")]
    InvalidKey(&'static str),
    #[error("plaintext is not in Z_n")]
    PlaintextOutOfRange,
    #[error("encryption randomness is not a unit modulo n")]
    InvalidRandomness,
    #[error("value is not a ciphertext in Z*_(n^2)")]
    InvalidCiphertext,
    #[error("malformed ciphertext: c^lambda is not 1 modulo n")]
    MalformedCiphertext,
    #[error("ciphertext has no inverse modulo n^2")]
    NotInvertible,
    #[error("key encoding: {0}")]
    Codec(#[from] CodecError),
}

/// Public parameters `(n, g)`.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_sq: BigUint,
    g: BigUint,
    standard_generator: bool,
}

/// Secret `lambda` with the precomputed `mu`, plus the factors and the CRT
/// constants derived from them.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    lambda: BigUint,
    mu: BigUint,
    p: BigUint,
    q: BigUint,
    crt: CrtParams,
}

#[derive(Clone, PartialEq, Eq)]
struct CrtParams {
    p_sq: BigUint,
    q_sq: BigUint,
    p_minus_1: BigUint,
    q_minus_1: BigUint,
    /// `L_p(g^(p-1) mod p^2)^-1 mod p`
    hp: BigUint,
    /// `L_q(g^(q-1) mod q^2)^-1 mod q`
    hq: BigUint,
    /// `p^-1 mod q`
    p_inv_q: BigUint,
    /// `(p^2)^-1 mod q^2`
    p_sq_inv_q_sq: BigUint,
    /// `q mod (p - 1)`, the exponent of `r^n` modulo `p`
    n_mod_p_minus_1: BigUint,
    /// `p mod (q - 1)`
    n_mod_q_minus_1: BigUint,
}

/// Element of `Z*_{n^2}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(BigUint);

/// Element of `Z_n`. The range is checked against a key at encryption time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaintext(BigUint);

impl Plaintext {
    pub fn new(value: BigUint) -> Self {
        Self(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

impl From<u64> for Plaintext {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl From<BigUint> for Plaintext {
    fn from(v: BigUint) -> Self {
        Self(v)
    }
}

impl Ciphertext {
    /// Validates `0 < value < n^2` and `gcd(value, n) = 1`.
    pub fn new(pk: &PublicKey, value: BigUint) -> Result<Self, PaillierError> {
        if value.is_zero() || value >= pk.n_sq || !(&value % &pk.n).gcd(&pk.n).is_one() {
            return Err(PaillierError::InvalidCiphertext);
        }
        Ok(Self(value))
    }

    pub(crate) fn from_raw(value: BigUint) -> Self {
        Self(value)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Fixed-width big-endian encoding, `byte_len(n^2)` bytes.
    pub fn to_bytes_be(&self, pk: &PublicKey) -> Vec<u8> {
        codec::biguint_to_fixed_be(&self.0, pk.ciphertext_len())
    }

    pub fn from_bytes_be(pk: &PublicKey, bytes: &[u8]) -> Result<Self, PaillierError> {
        if bytes.len() != pk.ciphertext_len() {
            return Err(PaillierError::InvalidCiphertext);
        }
        Self::new(pk, BigUint::from_bytes_be(bytes))
    }
}

impl fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ciphertext({:#x})", self.0)
    }
}

impl PublicKey {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_sq
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    /// Bit length of `n`.
    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// Bytes needed for one ciphertext in fixed-width form.
    pub fn ciphertext_len(&self) -> usize {
        self.n_sq.bits().div_ceil(8) as usize
    }

    pub fn uses_standard_generator(&self) -> bool {
        self.standard_generator
    }

    fn new_unchecked(n: BigUint, g: BigUint) -> Self {
        let n_sq = &n * &n;
        let standard_generator = g == &n + 1u8;
        Self {
            n,
            n_sq,
            g,
            standard_generator,
        }
    }

    /// `g^m mod n^2` for `m < n`, using `(1 + n)^m = 1 + mn` for the
    /// standard generator.
    fn g_pow(&self, m: &BigUint) -> BigUint {
        debug_assert!(m < &self.n);
        if self.standard_generator {
            m * &self.n + 1u8
        } else {
            self.g.modpow(m, &self.n_sq)
        }
    }

    /// `len(n) ‖ n ‖ len(g) ‖ g`, lengths as big-endian u32.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        codec::put_biguint(&mut out, &self.n);
        codec::put_biguint(&mut out, &self.g);
        out
    }

    /// Parses [`PublicKey::to_bytes`] output. Only structural checks are
    /// possible without the factorization: `n` odd and composite-sized,
    /// `g` a unit modulo `n^2`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PaillierError> {
        let mut r = Reader::new(bytes);
        let n = r.biguint()?;
        let g = r.biguint()?;
        r.finish()?;
        if n.bits() < MIN_KEY_BITS || n.is_even() {
            return Err(PaillierError::InvalidKey("modulus must be odd and at least 16 bits"));
        }
        let pk = Self::new_unchecked(n, g);
        if pk.g.is_zero() || pk.g >= pk.n_sq || !pk.g.gcd(&pk.n).is_one() {
            return Err(PaillierError::InvalidKey("g is not a unit modulo n^2"));
        }
        Ok(pk)
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PublicKey")
            .field("bits", &self.n.bits())
            .field("standard_generator", &self.standard_generator)
            .finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub fn mu(&self) -> &BigUint {
        &self.mu
    }

    /// Prime factors `(p, q)`.
    pub fn factors(&self) -> (&BigUint, &BigUint) {
        (&self.p, &self.q)
    }

    /// `len(p) ‖ p ‖ len(q) ‖ q`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        codec::put_biguint(&mut out, &self.p);
        codec::put_biguint(&mut out, &self.q);
        out
    }

    /// Rebuilds the secret key for `pk` from [`SecretKey::to_bytes`] output.
    pub fn from_bytes(pk: &PublicKey, bytes: &[u8]) -> Result<Self, PaillierError> {
        let mut r = Reader::new(bytes);
        let p = r.biguint()?;
        let q = r.biguint()?;
        r.finish()?;
        if &p * &q != pk.n {
            return Err(PaillierError::InvalidKey("factors do not match the public modulus"));
        }
        let (_, sk) = keypair_from_primes_with_generator(p, q, pk.g.clone())?;
        Ok(sk)
    }

    /// `r^n mod n^2` for `r` in `Z*_n`, through the factorization.
    ///
    /// Modulo `p^2`, `r^n` only depends on `r mod p`: it equals
    /// `(r^(q mod (p-1)) mod p)^p mod p^2`. The two halves are joined by CRT.
    #[cfg(test)]
    pub(crate) fn nth_power(&self, r: &BigUint) -> BigUint {
        let c = &self.crt;
        let a_p = (r % &self.p).modpow(&c.n_mod_p_minus_1, &self.p);
        let a_q = (r % &self.q).modpow(&c.n_mod_q_minus_1, &self.q);
        self.lift(&a_p, &a_q)
    }

    /// The `n`-th residue whose `p`- and `q`-halves are `a_p^p mod p^2`
    /// and `a_q^q mod q^2`.
    fn lift(&self, a_p: &BigUint, a_q: &BigUint) -> BigUint {
        let c = &self.crt;
        let xp = a_p.modpow(&self.p, &c.p_sq);
        let xq = a_q.modpow(&self.q, &c.q_sq);
        crt_combine(&xp, &xq, &c.p_sq, &c.q_sq, &c.p_sq_inv_q_sq)
    }

    /// A uniformly random `n`-th residue modulo `n^2`, distributed exactly
    /// as `r^n` for uniform `r` in `Z*_n`.
    ///
    /// `r -> (r^q mod p, r^p mod q)` is a bijection from `Z*_n` onto
    /// `Z*_p x Z*_q` because `gcd(q, p - 1) = gcd(p, q - 1) = 1`, so the two
    /// halves can be drawn directly.
    fn random_nth_residue<R: CryptoRngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        let one = BigUint::one();
        let a_p = rng.as_rngcore().gen_biguint_range(&one, &self.p);
        let a_q = rng.as_rngcore().gen_biguint_range(&one, &self.q);
        self.lift(&a_p, &a_q)
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// `x` with `x = a mod m1`, `x = b mod m2`, given `m1^-1 mod m2`.
fn crt_combine(a: &BigUint, b: &BigUint, m1: &BigUint, m2: &BigUint, m1_inv_m2: &BigUint) -> BigUint {
    let a_mod_m2 = a % m2;
    let diff = if b >= &a_mod_m2 {
        b - &a_mod_m2
    } else {
        m2 - (&a_mod_m2 - b)
    };
    a + m1 * ((diff * m1_inv_m2) % m2)
}

/// `(u - 1) / d` when `u = 1 mod d`.
fn l_function(u: &BigUint, d: &BigUint) -> Option<BigUint> {
    if u.is_zero() {
        return None;
    }
    let (quot, rem) = (u - 1u8).div_rem(d);
    rem.is_zero().then_some(quot)
}

/// Generates a key pair with `n` of exactly `bits` bits and `g = n + 1`.
pub fn keygen<R: CryptoRngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, SecretKey), PaillierError> {
    if bits < MIN_KEY_BITS {
        return Err(PaillierError::KeySizeTooSmall(bits));
    }
    let p_bits = bits - bits / 2;
    let q_bits = bits / 2;
    for _ in 0..KEYGEN_ATTEMPTS {
        let budget = PRIME_CANDIDATES_PER_BIT * bits as usize;
        let (Some(p), Some(q)) = (
            random_prime(p_bits, budget, rng),
            random_prime(q_bits, budget, rng),
        ) else {
            continue;
        };
        let n = &p * &q;
        if p == q || n.bits() != bits {
            continue;
        }
        let g = &n + 1u8;
        match build_keypair(p, q, g) {
            Ok(pair) => return Ok(pair),
            Err(PaillierError::InvalidKey(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(PaillierError::GenerationFailed(KEYGEN_ATTEMPTS))
}

/// Like [`keygen`] but with a uniformly random generator `g` in
/// `Z*_{n^2}` that passes the order check.
pub fn keygen_with_random_generator<R: CryptoRngCore + ?Sized>(
    bits: u64,
    rng: &mut R,
) -> Result<(PublicKey, SecretKey), PaillierError> {
    let (pk, sk) = keygen(bits, rng)?;
    for _ in 0..KEYGEN_ATTEMPTS {
        let g = rng.as_rngcore().gen_biguint_range(&BigUint::from(2u8), &pk.n_sq);
        match build_keypair(sk.p.clone(), sk.q.clone(), g) {
            Ok(pair) => return Ok(pair),
            Err(PaillierError::InvalidKey(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(PaillierError::GenerationFailed(KEYGEN_ATTEMPTS))
}

/// Deterministic key pair from caller-supplied primes and `g = n + 1`.
///
/// Intended for reproducible test vectors such as `(p, q) = (5, 7)`; the
/// primes are checked with fixed-base Miller-Rabin.
pub fn keypair_from_primes(p: BigUint, q: BigUint) -> Result<(PublicKey, SecretKey), PaillierError> {
    let g = &p * &q + 1u8;
    keypair_from_primes_with_generator(p, q, g)
}

/// Deterministic key pair with an explicit generator.
pub fn keypair_from_primes_with_generator(
    p: BigUint,
    q: BigUint,
    g: BigUint,
) -> Result<(PublicKey, SecretKey), PaillierError> {
    if !is_prime_fixed_bases(&p) || !is_prime_fixed_bases(&q) {
        return Err(PaillierError::InvalidKey("factors must be prime"));
    }
    build_keypair(p, q, g)
}

fn build_keypair(p: BigUint, q: BigUint, g: BigUint) -> Result<(PublicKey, SecretKey), PaillierError> {
    if p == q {
        return Err(PaillierError::InvalidKey("p and q must differ"));
    }
    if p.is_even() || q.is_even() {
        return Err(PaillierError::InvalidKey("p and q must be odd"));
    }
    let n = &p * &q;
    let p_minus_1 = &p - 1u8;
    let q_minus_1 = &q - 1u8;
    if !n.gcd(&(&p_minus_1 * &q_minus_1)).is_one() {
        return Err(PaillierError::InvalidKey("gcd(n, (p-1)(q-1)) must be 1"));
    }
    let pk = PublicKey::new_unchecked(n, g);
    if pk.g.is_zero() || pk.g >= pk.n_sq || !pk.g.gcd(&pk.n).is_one() {
        return Err(PaillierError::InvalidKey("g is not a unit modulo n^2"));
    }

    let lambda = p_minus_1.lcm(&q_minus_1);
    let g_lambda = pk.g.modpow(&lambda, &pk.n_sq);
    let mu = l_function(&g_lambda, &pk.n)
        .and_then(|l| l.modinv(&pk.n))
        .ok_or(PaillierError::InvalidKey("n does not divide the order of g"))?;

    let p_sq = &p * &p;
    let q_sq = &q * &q;
    let h = |prime: &BigUint, prime_sq: &BigUint, prime_minus_1: &BigUint| {
        let gp = pk.g.modpow(prime_minus_1, prime_sq);
        l_function(&gp, prime).and_then(|l| l.modinv(prime))
    };
    let hp = h(&p, &p_sq, &p_minus_1).ok_or(PaillierError::InvalidKey("n does not divide the order of g"))?;
    let hq = h(&q, &q_sq, &q_minus_1).ok_or(PaillierError::InvalidKey("n does not divide the order of g"))?;
    let p_inv_q = p.modinv(&q).ok_or(PaillierError::InvalidKey("p not invertible mod q"))?;
    let p_sq_inv_q_sq = p_sq
        .modinv(&q_sq)
        .ok_or(PaillierError::InvalidKey("p^2 not invertible mod q^2"))?;
    let crt = CrtParams {
        n_mod_p_minus_1: &q % &p_minus_1,
        n_mod_q_minus_1: &p % &q_minus_1,
        p_sq,
        q_sq,
        p_minus_1,
        q_minus_1,
        hp,
        hq,
        p_inv_q,
        p_sq_inv_q_sq,
    };
    let sk = SecretKey {
        lambda,
        mu,
        p,
        q,
        crt,
    };
    Ok((pk, sk))
}

fn sample_unit<R: CryptoRngCore + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    let one = BigUint::one();
    loop {
        let r = rng.as_rngcore().gen_biguint_range(&one, n);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}

/// Encrypts `m` with fresh randomness `r` drawn from `Z*_n`.
pub fn encrypt<R: CryptoRngCore + ?Sized>(
    pk: &PublicKey,
    m: &Plaintext,
    rng: &mut R,
) -> Result<Ciphertext, PaillierError> {
    if m.0 >= pk.n {
        return Err(PaillierError::PlaintextOutOfRange);
    }
    let r = sample_unit(&pk.n, rng);
    Ok(encrypt_raw(pk, &m.0, &r.modpow(&pk.n, &pk.n_sq)))
}

/// Encrypts with caller-chosen randomness `r`; for reproducible vectors.
pub fn encrypt_with_randomness(
    pk: &PublicKey,
    m: &Plaintext,
    r: &BigUint,
) -> Result<Ciphertext, PaillierError> {
    if m.0 >= pk.n {
        return Err(PaillierError::PlaintextOutOfRange);
    }
    if r.is_zero() || r >= &pk.n || !r.gcd(&pk.n).is_one() {
        return Err(PaillierError::InvalidRandomness);
    }
    Ok(encrypt_raw(pk, &m.0, &r.modpow(&pk.n, &pk.n_sq)))
}

/// Encryption by the key owner. Produces `g^m r^n mod n^2` with the same
/// distribution as [`encrypt`], building `r^n` from the factorization
/// (roughly 4x cheaper).
pub fn encrypt_as_owner<R: CryptoRngCore + ?Sized>(
    pk: &PublicKey,
    sk: &SecretKey,
    m: &Plaintext,
    rng: &mut R,
) -> Result<Ciphertext, PaillierError> {
    if m.0 >= pk.n {
        return Err(PaillierError::PlaintextOutOfRange);
    }
    Ok(encrypt_raw(pk, &m.0, &sk.random_nth_residue(rng)))
}

fn encrypt_raw(pk: &PublicKey, m: &BigUint, r_to_n: &BigUint) -> Ciphertext {
    Ciphertext((pk.g_pow(m) * r_to_n) % &pk.n_sq)
}

/// Decrypts `c`, returning `L(c^lambda mod n^2) * mu mod n`.
///
/// Evaluated modulo `p^2` and `q^2` separately and recombined, which gives
/// the same value as [`decrypt_direct`] at about a quarter of the cost.
pub fn decrypt(pk: &PublicKey, sk: &SecretKey, c: &Ciphertext) -> Result<Plaintext, PaillierError> {
    if c.0.is_zero() || c.0 >= pk.n_sq {
        return Err(PaillierError::InvalidCiphertext);
    }
    let k = &sk.crt;
    let half = |prime: &BigUint, prime_sq: &BigUint, exp: &BigUint, h: &BigUint| {
        let u = (&c.0 % prime_sq).modpow(exp, prime_sq);
        l_function(&u, prime)
            .map(|l| (l * h) % prime)
            .ok_or(PaillierError::MalformedCiphertext)
    };
    let mp = half(&sk.p, &k.p_sq, &k.p_minus_1, &k.hp)?;
    let mq = half(&sk.q, &k.q_sq, &k.q_minus_1, &k.hq)?;
    Ok(Plaintext(crt_combine(&mp, &mq, &sk.p, &sk.q, &k.p_inv_q)))
}

/// Decryption by the textbook formula `L(c^lambda mod n^2) * mu mod n`.
pub fn decrypt_direct(
    pk: &PublicKey,
    sk: &SecretKey,
    c: &Ciphertext,
) -> Result<Plaintext, PaillierError> {
    if c.0.is_zero() || c.0 >= pk.n_sq {
        return Err(PaillierError::InvalidCiphertext);
    }
    let u = c.0.modpow(&sk.lambda, &pk.n_sq);
    let l = l_function(&u, &pk.n).ok_or(PaillierError::MalformedCiphertext)?;
    Ok(Plaintext((l * &sk.mu) % &pk.n))
}

/// The decryption formula with its last reduction taken modulo `n^2`
/// instead of `n`: `L(c^lambda) * L(g^lambda)^-1 mod n^2`.
///
/// This is wrong for most plaintexts and exists only to demonstrate that.
pub fn decrypt_mod_n_squared(
    pk: &PublicKey,
    sk: &SecretKey,
    c: &Ciphertext,
) -> Result<BigUint, PaillierError> {
    let u = c.0.modpow(&sk.lambda, &pk.n_sq);
    let l = l_function(&u, &pk.n).ok_or(PaillierError::MalformedCiphertext)?;
    let denom = l_function(&pk.g.modpow(&sk.lambda, &pk.n_sq), &pk.n)
        .and_then(|d| d.modinv(&pk.n_sq))
        .ok_or(PaillierError::InvalidKey("L(g^lambda) not invertible modulo n^2"))?;
    Ok((l * denom) % &pk.n_sq)
}

/// `a * b mod n^2`; decrypts to `m_a + m_b mod n`.
pub fn hom_add(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
    Ciphertext((&a.0 * &b.0) % &pk.n_sq)
}

/// `c^k mod n^2` (through `c^-1` when `k < 0`); decrypts to `k * m mod n`.
pub fn hom_scale(pk: &PublicKey, c: &Ciphertext, k: &BigInt) -> Result<Ciphertext, PaillierError> {
    let base = match k.sign() {
        Sign::Minus => invert(pk, c)?.0,
        _ => c.0.clone(),
    };
    let e = k.magnitude();
    Ok(Ciphertext(if e.bits() <= SMALL_EXPONENT_BITS {
        small_pow(&base, e, &pk.n_sq)
    } else {
        base.modpow(e, &pk.n_sq)
    }))
}

/// Below this size, plain square-and-multiply beats the Montgomery setup
/// cost of `modpow`.
const SMALL_EXPONENT_BITS: u64 = 64;

fn small_pow(base: &BigUint, e: &BigUint, m: &BigUint) -> BigUint {
    let mut acc = BigUint::one() % m;
    for i in (0..e.bits()).rev() {
        acc = &acc * &acc % m;
        if e.bit(i) {
            acc = acc * base % m;
        }
    }
    acc
}

/// `c^-1 mod n^2`; decrypts to `-m mod n`.
pub fn invert(pk: &PublicKey, c: &Ciphertext) -> Result<Ciphertext, PaillierError> {
    c.0.modinv(&pk.n_sq)
        .map(Ciphertext)
        .ok_or(PaillierError::NotInvertible)
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::*;
    use alloc::string::String;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    fn to_hex(v: &BigUint) -> String {
        hex::encode(codec::biguint_to_minimal_be(v))
    }

    fn from_hex<E: de::Error>(s: &str) -> Result<BigUint, E> {
        hex::decode(s)
            .map(|b| BigUint::from_bytes_be(&b))
            .map_err(E::custom)
    }

    #[derive(Serialize, Deserialize)]
    struct PublicKeyRepr {
        n: String,
        g: String,
    }

    impl Serialize for PublicKey {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            PublicKeyRepr {
                n: to_hex(&self.n),
                g: to_hex(&self.g),
            }
            .serialize(s)
        }
    }

    impl<'de> Deserialize<'de> for PublicKey {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let repr = PublicKeyRepr::deserialize(d)?;
            let mut bytes = Vec::new();
            codec::put_biguint(&mut bytes, &from_hex::<D::Error>(&repr.n)?);
            codec::put_biguint(&mut bytes, &from_hex::<D::Error>(&repr.g)?);
            PublicKey::from_bytes(&bytes).map_err(de::Error::custom)
        }
    }

    impl Serialize for Ciphertext {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&to_hex(&self.0))
        }
    }

    /// Structural only; use [`Ciphertext::new`] to validate against a key.
    impl<'de> Deserialize<'de> for Ciphertext {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            let v = from_hex::<D::Error>(&s)?;
            if v.is_zero() {
                return Err(de::Error::custom("ciphertext cannot be zero"));
            }
            Ok(Ciphertext(v))
        }
    }
}
